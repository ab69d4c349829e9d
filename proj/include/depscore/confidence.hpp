#pragma once

// Beta-posterior confidence interval for a compatibility score.
//
// With a uniform Beta(1, 1) prior and S successes out of N candidate updates
// the posterior is Beta(1 + S, 1 + N - S). The interval is the score plus or
// minus z times the posterior standard deviation, clamped to [0, 1].

#include <cstdint>

namespace depscore {

/// Critical value for the 90% level, rounded to 1.65 rather than 1.6449.
inline constexpr double kZ90 = 1.65;

struct PosteriorParams {
    double a = 1.0;
    double b = 1.0;

    /// Candidate updates implied by the parameters (a + b - 2).
    double candidates() const { return a + b - 2.0; }
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Throws std::invalid_argument when successes > candidates.
PosteriorParams posterior_params(std::uint64_t candidates, std::uint64_t successes);

double score_sigma(PosteriorParams p);

/// Half-width of the interval before clamping.
double ci_precision(PosteriorParams p, double z = kZ90);

/// Throws std::invalid_argument when p carries no candidates (score undefined).
Interval confidence_interval(double score, PosteriorParams p, double z = kZ90);

/// Convenience over counts: score = S / N.
Interval confidence_interval(std::uint64_t candidates, std::uint64_t successes, double z = kZ90);

}  // namespace depscore
