#pragma once

// Synthetic ecosystems: providers publish releases, a bot opens one update PR
// per dependent client and release, CI runs, and the client decides to merge.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "depscore/datasets.hpp"

namespace depscore {

/// Coefficients of the logistic merge decision. Each signal is centered on
/// [-1, 1]: CI passed (+1), failed (-1) or absent (0); the crowd's smoothed
/// exact score mapped by 2s - 1; and the client's latent trust mapped by
/// 2t - 1.
struct MergePolicy {
    double intercept = 0.0;
    double ci_passed = 1.0;
    double score_signal = 1.0;
    double client_trust = 2.0;
};

struct EcosystemSpec {
    std::size_t provider_count = 8;
    std::size_t releases_per_provider = 11;
    std::size_t client_count = 50;
    std::size_t dependencies_per_client = 4;  // clamped to provider_count
    double breaking_release_prob = 0.1;
    double ci_coverage = 0.7;
    double flakiness = 0.05;
    MergePolicy merge_policy;
    /// Share of clients whose trust is 0 or 1 instead of uniform on [0, 1].
    double trust_polarization = 0.0;
    double no_ci_prob = 0.05;           // per client
    double base_failure_prob = 0.03;    // per PR
    double auto_merge_prob = 0.2;       // merged PRs merged by automation
    std::size_t snapshot_rounds = 4;
    std::string ecosystem = "npm";
    std::uint64_t seed = 1;
};

/// Throws DomainError when the spec cannot be generated (zero counts, ratios
/// outside [0, 1], non-finite coefficients).
void validate(const EcosystemSpec& spec);

/// Reads a JSON object whose keys mirror EcosystemSpec; missing keys keep
/// their defaults. Unknown keys throw std::invalid_argument.
EcosystemSpec parse_ecosystem_spec(std::string_view json_text);

struct ReleaseTruth {
    std::string version;
    Timestamp released_at{};
    bool breaking = false;
};

struct ProviderTruth {
    std::string name;
    std::vector<ReleaseTruth> releases;
};

struct ClientTruth {
    std::string name;
    double trust = 0.5;
    bool has_ci = true;
    std::vector<std::string> pipeline;
    std::vector<std::string> dependencies;
};

struct GroundTruth {
    EcosystemSpec spec;
    std::vector<ProviderTruth> providers;
    std::vector<ClientTruth> clients;
};

struct Ecosystem {
    std::vector<UpdateEvent> events;     // ordered by opened_at, client, provider
    std::vector<ScoreRecord> snapshots;  // ordered by fetched_at, key
    GroundTruth truth;
};

Ecosystem generate_ecosystem(const EcosystemSpec& spec);

void write_ground_truth(std::ostream& out, const GroundTruth& truth);

struct EcosystemFiles {
    std::filesystem::path events;
    std::filesystem::path snapshots;
    std::filesystem::path ground_truth;
};

/// Writes events.ndjson, snapshots.ndjson and ground_truth.json into `dir`,
/// creating it if needed. Throws IoError on failure.
EcosystemFiles write_ecosystem(const std::filesystem::path& dir, const Ecosystem& eco);

}  // namespace depscore
