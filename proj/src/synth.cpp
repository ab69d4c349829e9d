#include "depscore/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "depscore/errors.hpp"
#include "depscore/random.hpp"

namespace depscore {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using namespace std::chrono_literals;

namespace {

constexpr std::uint64_t kWorldStream = 0x776f726cULL;  // "worl"

// Check-name pipelines a client may run. Two of them only contain checks
// that test nothing.
const std::vector<std::vector<std::string>>& pipeline_templates() {
    static const std::vector<std::vector<std::string>> templates{
        {"build", "test"},
        {"Travis CI"},
        {"build", "lint", "test"},
        {"ubuntu-latest", "codecov/patch"},
        {"ci", "WIP"},
        {"test", "CodeQL", "deploy"},
        {"Node 16", "ESLint Report Analysis", "e2e"},
        {"WIP"},
        {"DCO", "stale"},
    };
    return templates;
}

constexpr std::chrono::seconds kHour = 1h;
constexpr std::chrono::seconds kDay = 24h;

std::chrono::seconds uniform_duration(Rng& rng, std::chrono::seconds lo, std::chrono::seconds hi) {
    const auto span = static_cast<std::uint64_t>((hi - lo).count());
    return lo + std::chrono::seconds(static_cast<std::int64_t>(uniform_index(rng, span + 1)));
}

std::string padded(std::string_view prefix, std::size_t i, std::size_t width) {
    std::string digits = std::to_string(i);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return std::string(prefix) + digits;
}

std::size_t digits_for(std::size_t count) {
    return std::max<std::size_t>(2, std::to_string(count - 1).size());
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_ratio(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

std::vector<ReleaseTruth> make_releases(Rng& rng, const EcosystemSpec& spec, Timestamp start) {
    std::uint64_t major = uniform_index(rng, 3);
    std::uint64_t minor = uniform_index(rng, 4);
    std::uint64_t patch = 0;
    // Gaps of at least three days keep one release's PRs closed before the
    // next release of the same provider appears.
    Timestamp at = start + uniform_duration(rng, 0s, 10 * kDay);
    std::vector<ReleaseTruth> out;
    for (std::size_t r = 0; r < spec.releases_per_provider; ++r) {
        if (r > 0) {
            const double u = uniform01(rng);
            if (u < 0.6) {
                ++patch;
            } else if (u < 0.9) {
                ++minor;
                patch = 0;
            } else {
                ++major;
                minor = 0;
                patch = 0;
            }
            at += 3 * kDay + uniform_duration(rng, 0s, 7 * kDay);
        }
        ReleaseTruth rel;
        rel.version = std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
        rel.released_at = at;
        // The first release is the starting point every client already has.
        rel.breaking = r > 0 && bernoulli(rng, spec.breaking_release_prob);
        out.push_back(std::move(rel));
    }
    return out;
}

struct PendingPr {
    std::size_t client = 0;
    Timestamp opened_at{};
};

struct CrowdCounts {
    std::uint64_t n = 0;
    std::uint64_t s = 0;
};

}  // namespace

void validate(const EcosystemSpec& spec) {
    if (spec.provider_count == 0) throw DomainError("provider_count must be at least 1");
    if (spec.client_count == 0) throw DomainError("client_count must be at least 1");
    if (spec.dependencies_per_client == 0) throw DomainError("dependencies_per_client must be at least 1");
    if (spec.releases_per_provider < 2) {
        throw DomainError("releases_per_provider must be at least 2 (one starting release plus one update)");
    }
    if (spec.snapshot_rounds == 0) throw DomainError("snapshot_rounds must be at least 1");
    if (spec.ecosystem.empty()) throw DomainError("ecosystem must not be empty");
    check_ratio(spec.breaking_release_prob, "breaking_release_prob");
    check_ratio(spec.ci_coverage, "ci_coverage");
    check_ratio(spec.flakiness, "flakiness");
    check_ratio(spec.trust_polarization, "trust_polarization");
    check_ratio(spec.no_ci_prob, "no_ci_prob");
    check_ratio(spec.base_failure_prob, "base_failure_prob");
    check_ratio(spec.auto_merge_prob, "auto_merge_prob");
    const auto& p = spec.merge_policy;
    for (double c : {p.intercept, p.ci_passed, p.score_signal, p.client_trust}) {
        if (!std::isfinite(c)) throw DomainError("merge policy coefficients must be finite");
    }
}

EcosystemSpec parse_ecosystem_spec(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("ecosystem spec is not valid JSON: ") + ex.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("ecosystem spec must be a JSON object");

    auto count = [](const json& v, const std::string& key) -> std::uint64_t {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        throw std::invalid_argument("'" + key + "' must be a non-negative integer");
    };
    auto real = [](const json& v, const std::string& key) -> double {
        if (!v.is_number()) throw std::invalid_argument("'" + key + "' must be a number");
        return v.get<double>();
    };

    EcosystemSpec spec;
    for (const auto& [key, value] : doc.items()) {
        if (key == "provider_count") {
            spec.provider_count = count(value, key);
        } else if (key == "releases_per_provider") {
            spec.releases_per_provider = count(value, key);
        } else if (key == "client_count") {
            spec.client_count = count(value, key);
        } else if (key == "dependencies_per_client") {
            spec.dependencies_per_client = count(value, key);
        } else if (key == "breaking_release_prob") {
            spec.breaking_release_prob = real(value, key);
        } else if (key == "ci_coverage") {
            spec.ci_coverage = real(value, key);
        } else if (key == "flakiness") {
            spec.flakiness = real(value, key);
        } else if (key == "trust_polarization") {
            spec.trust_polarization = real(value, key);
        } else if (key == "no_ci_prob") {
            spec.no_ci_prob = real(value, key);
        } else if (key == "base_failure_prob") {
            spec.base_failure_prob = real(value, key);
        } else if (key == "auto_merge_prob") {
            spec.auto_merge_prob = real(value, key);
        } else if (key == "snapshot_rounds") {
            spec.snapshot_rounds = count(value, key);
        } else if (key == "ecosystem") {
            if (!value.is_string()) throw std::invalid_argument("'ecosystem' must be a string");
            spec.ecosystem = value.get<std::string>();
        } else if (key == "seed") {
            spec.seed = count(value, key);
        } else if (key == "merge_policy") {
            if (!value.is_object()) throw std::invalid_argument("'merge_policy' must be an object");
            for (const auto& [mk, mv] : value.items()) {
                if (mk == "intercept") {
                    spec.merge_policy.intercept = real(mv, mk);
                } else if (mk == "ci_passed") {
                    spec.merge_policy.ci_passed = real(mv, mk);
                } else if (mk == "score_signal") {
                    spec.merge_policy.score_signal = real(mv, mk);
                } else if (mk == "client_trust") {
                    spec.merge_policy.client_trust = real(mv, mk);
                } else {
                    throw std::invalid_argument("unknown merge_policy key '" + mk + "'");
                }
            }
        } else {
            throw std::invalid_argument("unknown ecosystem spec key '" + key + "'");
        }
    }
    return spec;
}

Ecosystem generate_ecosystem(const EcosystemSpec& spec) {
    validate(spec);
    Rng rng(derive_seed(spec.seed, kWorldStream));
    const Timestamp start = std::chrono::sys_days{std::chrono::year{2021} / 1 / 1};

    Ecosystem eco;
    GroundTruth& truth = eco.truth;
    truth.spec = spec;

    const std::size_t pwidth = digits_for(spec.provider_count);
    for (std::size_t p = 0; p < spec.provider_count; ++p) {
        ProviderTruth prov;
        prov.name = padded("provider-", p, pwidth);
        prov.releases = make_releases(rng, spec, start);
        truth.providers.push_back(std::move(prov));
    }

    const auto& templates = pipeline_templates();
    const std::size_t deps = std::min(spec.dependencies_per_client, spec.provider_count);
    const std::size_t cwidth = digits_for(spec.client_count);
    std::vector<std::vector<std::size_t>> dependents(spec.provider_count);
    for (std::size_t c = 0; c < spec.client_count; ++c) {
        ClientTruth client;
        client.name = padded("client-", c, cwidth);
        if (bernoulli(rng, spec.trust_polarization)) {
            client.trust = bernoulli(rng, 0.5) ? 1.0 : 0.0;
        } else {
            client.trust = uniform01(rng);
        }
        client.has_ci = !bernoulli(rng, spec.no_ci_prob);
        if (client.has_ci) client.pipeline = templates[uniform_index(rng, templates.size())];

        std::vector<std::size_t> order(spec.provider_count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Partial Fisher-Yates: the first `deps` slots are a uniform sample.
        for (std::size_t i = 0; i < deps; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_index(rng, order.size() - i));
            std::swap(order[i], order[j]);
        }
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(deps));
        for (std::size_t i = 0; i < deps; ++i) {
            client.dependencies.push_back(truth.providers[order[i]].name);
            dependents[order[i]].push_back(c);
        }
        truth.clients.push_back(std::move(client));
    }

    // Release waves in time order; ties by provider index.
    struct Wave {
        Timestamp at;
        std::size_t provider;
        std::size_t release;
    };
    std::vector<Wave> waves;
    for (std::size_t p = 0; p < spec.provider_count; ++p) {
        for (std::size_t r = 1; r < spec.releases_per_provider; ++r) {
            waves.push_back({truth.providers[p].releases[r].released_at, p, r});
        }
    }
    std::stable_sort(waves.begin(), waves.end(), [](const Wave& a, const Wave& b) {
        return a.at != b.at ? a.at < b.at : a.provider < b.provider;
    });

    // current[c][p]: index of the release client c is on for provider p.
    std::vector<std::map<std::size_t, std::size_t>> current(spec.client_count);
    for (std::size_t p = 0; p < spec.provider_count; ++p) {
        for (std::size_t c : dependents[p]) current[c][p] = 0;
    }

    std::map<TupleKey, CrowdCounts> crowd;
    const MergePolicy& policy = spec.merge_policy;
    for (const Wave& wave : waves) {
        const ProviderTruth& prov = truth.providers[wave.provider];
        const ReleaseTruth& rel = prov.releases[wave.release];

        std::vector<PendingPr> prs;
        for (std::size_t c : dependents[wave.provider]) {
            prs.push_back({c, wave.at + uniform_duration(rng, 0s, kDay)});
        }
        std::stable_sort(prs.begin(), prs.end(), [](const PendingPr& a, const PendingPr& b) {
            return a.opened_at != b.opened_at ? a.opened_at < b.opened_at : a.client < b.client;
        });

        // Crowd counts become visible only to PRs opened strictly later.
        std::vector<std::pair<TupleKey, bool>> unpublished;
        Timestamp unpublished_at{};
        for (const PendingPr& pr : prs) {
            if (!unpublished.empty() && pr.opened_at > unpublished_at) {
                for (const auto& [key, ok] : unpublished) {
                    auto& cc = crowd[key];
                    ++cc.n;
                    cc.s += ok;
                }
                unpublished.clear();
            }

            const ClientTruth& client = truth.clients[pr.client];
            std::size_t& on = current[pr.client][wave.provider];

            UpdateEvent ev;
            ev.client = client.name;
            ev.ecosystem = spec.ecosystem;
            ev.provider = prov.name;
            ev.origin = prov.releases[on].version;
            ev.target = rel.version;
            ev.opened_at = pr.opened_at;
            ev.base_ci_passing = !bernoulli(rng, spec.base_failure_prob);

            double ci_signal = 0.0;
            if (client.has_ci) {
                const bool fails = rel.breaking ? bernoulli(rng, spec.ci_coverage) : bernoulli(rng, spec.flakiness);
                for (std::size_t i = 0; i < client.pipeline.size(); ++i) {
                    const bool failed_check = fails && i == 0;
                    ev.checks.push_back({client.pipeline[i],
                                         failed_check ? CheckConclusion::Failure : CheckConclusion::Success});
                }
                ci_signal = fails ? -1.0 : 1.0;
            }

            const auto it = crowd.find(ev.key());
            const CrowdCounts counts = it == crowd.end() ? CrowdCounts{} : it->second;
            const double smoothed = (static_cast<double>(counts.s) + 1.0) / (static_cast<double>(counts.n) + 2.0);
            const double logit = policy.intercept + policy.ci_passed * ci_signal +
                                 policy.score_signal * (2.0 * smoothed - 1.0) +
                                 policy.client_trust * (2.0 * client.trust - 1.0);
            ev.merged = bernoulli(rng, logistic(logit));
            ev.closed_at = ev.opened_at + uniform_duration(rng, kHour, 20 * kHour);
            if (ev.merged) {
                ev.merged_by_human = !bernoulli(rng, spec.auto_merge_prob);
                on = wave.release;
            }

            if (is_candidate_update(ev)) {
                unpublished.emplace_back(ev.key(), ci_conclusion(ev) == CiConclusion::Success);
                unpublished_at = ev.opened_at;
            }
            eco.events.push_back(std::move(ev));
        }
        for (const auto& [key, ok] : unpublished) {
            auto& cc = crowd[key];
            ++cc.n;
            cc.s += ok;
        }
    }

    std::stable_sort(eco.events.begin(), eco.events.end(), [](const UpdateEvent& a, const UpdateEvent& b) {
        if (a.opened_at != b.opened_at) return a.opened_at < b.opened_at;
        if (a.client != b.client) return a.client < b.client;
        return a.provider < b.provider;
    });

    // Cumulative crowd records at evenly spaced fetch times; the last round
    // sees every event.
    if (!eco.events.empty()) {
        const Timestamp first = eco.events.front().opened_at;
        const Timestamp last = eco.events.back().opened_at;
        std::map<TupleKey, CrowdCounts> running;
        std::size_t next = 0;
        for (std::size_t round = 1; round <= spec.snapshot_rounds; ++round) {
            const auto offset = (last - first) * static_cast<std::int64_t>(round) /
                                static_cast<std::int64_t>(spec.snapshot_rounds);
            const Timestamp fetched = first + offset + kHour;
            while (next < eco.events.size() && eco.events[next].opened_at < fetched) {
                const UpdateEvent& ev = eco.events[next++];
                if (!is_candidate_update(ev)) continue;
                auto& cc = running[ev.key()];
                ++cc.n;
                cc.s += ci_conclusion(ev) == CiConclusion::Success;
            }
            for (const auto& [key, cc] : running) {
                eco.snapshots.push_back({key, cc.n, cc.s, fetched});
            }
        }
    }
    return eco;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
    const EcosystemSpec& s = truth.spec;
    ordered_json doc;
    doc["spec"] = {
        {"provider_count", s.provider_count},
        {"releases_per_provider", s.releases_per_provider},
        {"client_count", s.client_count},
        {"dependencies_per_client", s.dependencies_per_client},
        {"breaking_release_prob", s.breaking_release_prob},
        {"ci_coverage", s.ci_coverage},
        {"flakiness", s.flakiness},
        {"trust_polarization", s.trust_polarization},
        {"no_ci_prob", s.no_ci_prob},
        {"base_failure_prob", s.base_failure_prob},
        {"auto_merge_prob", s.auto_merge_prob},
        {"snapshot_rounds", s.snapshot_rounds},
        {"ecosystem", s.ecosystem},
        {"seed", s.seed},
    };
    doc["merge_policy"] = {
        {"intercept", s.merge_policy.intercept},
        {"ci_passed", s.merge_policy.ci_passed},
        {"score_signal", s.merge_policy.score_signal},
        {"client_trust", s.merge_policy.client_trust},
    };
    doc["providers"] = ordered_json::array();
    for (const auto& p : truth.providers) {
        ordered_json releases = ordered_json::array();
        for (const auto& r : p.releases) {
            releases.push_back({{"version", r.version},
                                {"released_at", format_timestamp(r.released_at)},
                                {"breaking", r.breaking}});
        }
        doc["providers"].push_back({{"name", p.name}, {"releases", std::move(releases)}});
    }
    doc["clients"] = ordered_json::array();
    for (const auto& c : truth.clients) {
        doc["clients"].push_back({{"name", c.name},
                                  {"trust", c.trust},
                                  {"has_ci", c.has_ci},
                                  {"pipeline", c.pipeline},
                                  {"dependencies", c.dependencies}});
    }
    out << doc.dump(2) << '\n';
}

EcosystemFiles write_ecosystem(const std::filesystem::path& dir, const Ecosystem& eco) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    EcosystemFiles files{dir / "events.ndjson", dir / "snapshots.ndjson", dir / "ground_truth.json"};
    auto open = [](const std::filesystem::path& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        return out;
    };
    {
        auto out = open(files.events);
        write_events(out, eco.events);
        if (!out) throw IoError("failed writing " + files.events.string());
    }
    {
        auto out = open(files.snapshots);
        write_snapshots(out, eco.snapshots);
        if (!out) throw IoError("failed writing " + files.snapshots.string());
    }
    {
        auto out = open(files.ground_truth);
        write_ground_truth(out, eco.truth);
        if (!out) throw IoError("failed writing " + files.ground_truth.string());
    }
    return files;
}

}  // namespace depscore
