#include "depscore/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace depscore {

PosteriorParams posterior_params(std::uint64_t candidates, std::uint64_t successes) {
    if (successes > candidates) throw std::invalid_argument("successful updates exceed candidate updates");
    return {1.0 + static_cast<double>(successes), 1.0 + static_cast<double>(candidates - successes)};
}

double score_sigma(PosteriorParams p) {
    const double total = p.a + p.b;
    return std::sqrt(p.a * p.b / (total * total * (total + 1.0)));
}

double ci_precision(PosteriorParams p, double z) { return z * score_sigma(p); }

Interval confidence_interval(double score, PosteriorParams p, double z) {
    if (p.candidates() < 0.5) throw std::invalid_argument("confidence interval needs at least one candidate update");
    const double precision = ci_precision(p, z);
    return {std::max(score - precision, 0.0), std::min(score + precision, 1.0)};
}

Interval confidence_interval(std::uint64_t candidates, std::uint64_t successes, double z) {
    const auto p = posterior_params(candidates, successes);
    if (candidates == 0) throw std::invalid_argument("confidence interval needs at least one candidate update");
    return confidence_interval(static_cast<double>(successes) / static_cast<double>(candidates), p, z);
}

}  // namespace depscore
