// Acceptance run: one PASS/FAIL line per criterion, with timings and the
// measured quantities. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "commands.hpp"
#include "depscore/analytics.hpp"
#include "depscore/checks.hpp"
#include "depscore/confidence.hpp"
#include "depscore/datasets.hpp"
#include "depscore/errors.hpp"
#include "depscore/experiment.hpp"
#include "depscore/features.hpp"
#include "depscore/learn.hpp"
#include "depscore/random.hpp"
#include "depscore/scoring.hpp"
#include "depscore/synth.hpp"
#include "support/check_corpus.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace depscore;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Direct evaluation of the posterior interval from its closed form.
std::pair<double, double> direct_interval(double n, double s) {
    const double a = 1 + s, b = 1 + n - s;
    const double sigma = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1)));
    const double p = 1.65 * sigma;
    return {std::max(0.0, s / n - p), std::min(1.0, s / n + p)};
}

// -- 1 ---------------------------------------------------------------------

void confidence_math(Outcome& o) {
    for (auto [n, s, lo] : {std::tuple{5, 5, 0.79587}, std::tuple{100, 99, 0.96746}}) {
        const auto iv = confidence_interval(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
        const auto [dlo, dhi] = direct_interval(n, s);
        o.require(std::abs(iv.lo - dlo) <= 1e-4 && std::abs(iv.hi - dhi) <= 1e-4, "interval vs direct evaluation");
        o.require(std::abs(iv.lo - lo) <= 1e-4 && iv.hi == 1.0, "published interval");
        o.detail << "(" << n << "," << s << ") -> [" << std::setprecision(6) << iv.lo << ", " << iv.hi << "]; ";
    }
    Rng rng(derive_seed(1, 1));
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto n = 1 + uniform_index(rng, 500);
        const auto s = uniform_index(rng, n + 1);
        const auto p = posterior_params(n, s);
        const double sd = oracle::monte_carlo_beta_sd(p.a, p.b, 100000, derive_seed(2, static_cast<std::uint64_t>(i)));
        worst = std::max(worst, std::abs(score_sigma(p) - sd) / sd);
    }
    o.require(worst <= 0.02, "Monte-Carlo sigma within 2%");
    o.detail << "max relative sigma error " << worst;
}

// -- 2 ---------------------------------------------------------------------

void score_badge_law(Outcome& o) {
    Rng rng(derive_seed(1, 2));
    for (int i = 0; i < 10000; ++i) {
        const auto n = 1 + uniform_index(rng, i % 2 ? 12 : 100000);
        const auto s = uniform_index(rng, n + 1);
        const auto r = make_score_report({"p", "npm", "1.0.0", "2.0.0"}, RangeLevel::Exact, n, s);
        o.require(r.score && *r.score == Ratio{s, n} && r.score->num * n == s * r.score->den, "score is S/N");
        o.require((r.badge == Badge::Shown) == (n >= kBadgeThreshold), "badge iff N >= 5");
        o.require(r.interval && r.interval->lo >= 0.0 && r.interval->hi <= 1.0, "interval clamped");
        const double score = static_cast<double>(s) / static_cast<double>(n);
        o.require(r.interval && r.interval->lo <= score && score <= r.interval->hi, "interval contains score");
    }
    o.detail << "10000 random (S,N)";
}

// -- 3 ---------------------------------------------------------------------

void range_oracle(Outcome& o) {
    std::size_t compared = 0;
    for (std::uint64_t d = 0; d < 100; ++d) {
        std::vector<UpdateEvent> events;
        if (d % 2 == 0) {
            Rng rng(derive_seed(3, d));
            events = fixture::random_events(rng, 300);
        } else {
            EcosystemSpec spec;
            spec.seed = d;
            spec.provider_count = 4;
            spec.client_count = 20;
            spec.breaking_release_prob = 0.3;
            events = generate_ecosystem(spec).events;
        }
        const auto ds = build_three_tuple_dataset(events);
        std::vector<ScoreRecord> records;
        for (const auto& [k, r] : ds) records.push_back(r);

        std::set<std::tuple<std::string, std::string, std::string>> targets;
        for (const auto& [k, r] : ds) targets.insert({k.provider, k.ecosystem, k.target});
        for (const auto& [p, e, t] : targets) {
            std::uint64_t prev = 0;
            bool parses = true;
            for (auto level : {RangeLevel::Patch, RangeLevel::Minor, RangeLevel::Major}) {
                const auto expected = oracle::range_sum(records, p, e, t, level);
                ScoreReport got;
                try {
                    got = range_compatibility_score(ds, p, e, t, level);
                } catch (const DomainError&) {
                    parses = false;
                    o.require(!oracle::hand_parse(t), "range score rejects only unparseable targets");
                    break;
                }
                o.require(got.candidate_updates == expected.n && got.successful_updates == expected.s,
                          "range N/S matches oracle for " + p + " " + t);
                o.require(got.candidate_updates >= prev, "range N monotone");
                prev = got.candidate_updates;
                ++compared;
            }
            if (parses) {
                // Exact tuples whose origin parses and shares the target's
                // major.minor lie in the patch bucket.
                const auto patch = oracle::range_sum(records, p, e, t, RangeLevel::Patch);
                std::uint64_t exact_in_patch = 0;
                const auto tv = oracle::hand_parse(t);
                for (const auto& [k, r] : ds) {
                    if (k.provider != p || k.ecosystem != e || k.target != t || k.origin == t) continue;
                    const auto ov = oracle::hand_parse(k.origin);
                    if (ov && ov->major == tv->major && ov->minor == tv->minor) {
                        exact_in_patch = std::max(exact_in_patch, r.candidate_updates);
                    }
                }
                o.require(exact_in_patch <= patch.n, "N(Exact) <= N(Patch)");
            }
        }
    }
    o.detail << compared << " range scores over 100 datasets";
}

// -- 4 ---------------------------------------------------------------------

void golden_corpus(Outcome& o) {
    std::size_t n = 0;
    for (const auto& [name, category] : corpus::golden()) {
        const auto got = classify_check_name(name);
        o.require(got == category, std::string(name) + " -> " + std::string(to_string(got)));
        ++n;
    }
    o.require(n >= 40, "at least 40 names");
    o.require(classify_check_name("GitGuardian Security Checks") == CheckCategory::SecurityAnalysis, "GitGuardian");
    o.require(classify_check_name("ESLint Report Analysis") == CheckCategory::Lint, "ESLint Report Analysis");
    for (const char* name : corpus::unknown()) {
        o.require(classify_check_name(name) == CheckCategory::Unclassified, std::string(name) + " unclassified");
    }
    o.detail << n << " golden names, " << corpus::unknown().size() << " unknown";
}

// -- 5 ---------------------------------------------------------------------

void auc_oracle(Outcome& o) {
    Rng rng(derive_seed(1, 5));
    std::size_t cases = 0;
    while (cases < 10000) {
        const auto n = 2 + uniform_index(rng, 11);
        const auto levels = 1 + uniform_index(rng, 6);
        std::vector<double> scores(n);
        std::vector<Label> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(uniform_index(rng, levels)) / static_cast<double>(levels);
            labels[i] = bernoulli(rng, 0.5) ? 1 : 0;
        }
        const auto pos = std::count(labels.begin(), labels.end(), Label{1});
        if (pos == 0 || pos == static_cast<long>(n)) continue;
        o.require(auc(scores, labels) == oracle::pairwise_auc(scores, labels), "AUC exact match");
        ++cases;
    }
    o.detail << cases << " configurations";
}

// -- 6 and 7 -----------------------------------------------------------------

EcosystemSpec signal_spec() {
    EcosystemSpec spec;
    spec.seed = 7;
    spec.trust_polarization = 0.5;
    spec.merge_policy.client_trust = 5.0;
    spec.merge_policy.ci_passed = 0.5;
    spec.merge_policy.score_signal = 0.5;
    return spec;
}

const std::vector<FeatureVector>& signal_rows(std::size_t* events_out = nullptr) {
    static std::size_t events = 0;
    static const std::vector<FeatureVector> rows = [] {
        const auto eco = generate_ecosystem(signal_spec());
        events = eco.events.size();
        return feature_matrix(eco.events);
    }();
    if (events_out) *events_out = events;
    return rows;
}

void harness_signal(Outcome& o) {
    std::size_t events = 0;
    const auto rows = std::span<const FeatureVector>(signal_rows(&events));
    std::map<Design, double> real, shuffled;
    for (Design d : {Design::Baseline, Design::Range, Design::History, Design::Combined}) {
        auto spec = builtin_spec(d, 42);
        spec.iterations = 100;
        spec.importance_repeats = 0;
        real[d] = run_experiment(rows, spec).result.median_auc;
        spec.shuffle_labels = true;
        shuffled[d] = run_experiment(rows, spec).result.median_auc;
    }
    o.require(real[Design::Combined] >= 0.90, "combined median AUC >= 0.90");
    o.require(real[Design::Combined] >= real[Design::Baseline] + 0.05, "combined beats baseline by 0.05");
    for (const auto& [d, v] : shuffled) {
        o.require(std::abs(v - 0.5) <= 0.05, std::string(to_string(d)) + " shuffled within 0.5 +- 0.05");
    }
    o.detail << events << " events; median AUC";
    for (const auto& [d, v] : real) o.detail << ' ' << to_string(d) << '=' << std::setprecision(4) << v;
    o.detail << "; shuffled";
    for (const auto& [d, v] : shuffled) o.detail << ' ' << to_string(d) << '=' << std::setprecision(4) << v;
}

void importance_sanity(Outcome& o) {
    const auto rows = std::span<const FeatureVector>(signal_rows());
    const auto spec = builtin_spec(Design::Combined, 42);
    const auto [base, labels] = design_matrix(rows, spec);
    constexpr std::size_t kNoise = 3;
    Matrix x(base.rows(), base.cols() + kNoise);
    Rng rng(derive_seed(7, 7));
    for (std::size_t r = 0; r < base.rows(); ++r) {
        for (std::size_t c = 0; c < base.cols(); ++c) x(r, c) = base(r, c);
        for (std::size_t c = 0; c < kNoise; ++c) x(r, base.cols() + c) = uniform01(rng);
    }
    BootstrapOptions opt;
    opt.iterations = 30;
    opt.importance_repeats = 1;
    for (Feature f : spec.features) opt.feature_names.emplace_back(feature_name(f));
    for (std::size_t c = 0; c < kNoise; ++c) opt.feature_names.push_back("noise_" + std::to_string(c));
    ForestConfig cfg = spec.forest;
    const auto result = out_of_sample_bootstrap(x, labels, cfg, opt);

    std::map<std::string, double> medians;
    for (const auto& [name, values] : result.importances) medians[name] = median_of(values);
    const double history = medians.at(std::string(feature_name(Feature::MergedDbPrs)));
    for (std::size_t c = 0; c < kNoise; ++c) {
        const double noise = medians.at("noise_" + std::to_string(c));
        o.require(history > noise, "history importance exceeds noise_" + std::to_string(c));
    }

    const auto forest = train_forest(x, labels, cfg);
    std::vector<std::size_t> identity(x.rows());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        o.require(permutation_importance(forest, x, labels, c, identity) == 0.0, "identity permutation gives 0");
    }
    o.detail << "median importance " << feature_name(Feature::MergedDbPrs) << '=' << std::setprecision(4) << history;
    for (std::size_t c = 0; c < kNoise; ++c) o.detail << " noise_" << c << '=' << medians.at("noise_" + std::to_string(c));
}

// -- 8 ---------------------------------------------------------------------

void leakage_guard(Outcome& o) {
    std::size_t checked = 0;
    for (std::uint64_t f = 0; f < 50; ++f) {
        Rng rng(derive_seed(8, f));
        auto events = fixture::random_events(rng, 120, 200);
        const auto before = feature_matrix(events);

        auto extended = events;
        auto future = fixture::random_events(rng, 60, 100);
        for (auto& e : future) e.opened_at += std::chrono::hours(200);
        extended.insert(extended.end(), future.begin(), future.end());
        const auto after = feature_matrix(extended);
        std::size_t matched = 0;
        for (const auto& row : after) {
            if (row.opened_at >= fixture::at_hour(200)) continue;
            o.require(matched < before.size() && row == before[matched], "future events change no feature vector");
            ++matched;
        }
        o.require(matched == before.size(), "all original rows present after appending");

        for (std::size_t i = 0; i < events.size(); ++i) {
            if (!is_candidate_update(events[i])) continue;
            const auto full = feature_vector(events, i);
            auto without = events;
            without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
            without.push_back(events[i]);
            const auto alone = feature_vector(without, without.size() - 1);
            o.require(full == alone, "deleting the focal event leaves its features unchanged");

            const auto sheet = oracle::spreadsheet_features(events, i);
            o.require(full.merged_db_prs == sheet.merged && full.passing_db_prs == sheet.passing &&
                          full.exact_candidates == sheet.exact.n,
                      "features agree with the strictly-earlier oracle");
            ++checked;
        }
    }
    o.detail << checked << " focal events over 50 fixtures";
}

// -- 9 ---------------------------------------------------------------------

void stability_rule(Outcome& o) {
    const TupleKey key{"p", "npm", "1.0.0", "1.1.0"};
    auto series = [](std::initializer_list<double> v) {
        ScoreSeries s;
        long h = 0;
        for (double x : v) s.emplace_back(fixture::at_hour(24 * h++), x);
        return s;
    };
    const auto a = stability_verdict(key, series({0.80, 0.82, 0.81}));
    o.require(a.instantly_stable, "[0.80, 0.82, 0.81] instantly stable");
    const auto b = stability_verdict(key, series({0.50, 0.90, 0.88}));
    o.require(!b.instantly_stable && b.stable_index == 1, "[0.50, 0.90, 0.88] stable from the second snapshot");
    o.require(stability_verdict(key, series({1.0, 1.0})).instantly_stable, "[1.0, 1.0] instantly stable");

    Rng rng(derive_seed(1, 9));
    std::size_t preserved = 0;
    for (int i = 0; i < 5000; ++i) {
        ScoreSeries s;
        const auto n = 2 + uniform_index(rng, 6);
        for (std::uint64_t k = 0; k < n; ++k) {
            s.emplace_back(fixture::at_hour(static_cast<long>(k)), static_cast<double>(uniform_index(rng, 21)) / 20);
        }
        if (!stability_verdict(key, s).instantly_stable) continue;
        s.emplace_back(fixture::at_hour(100), s.back().second);
        o.require(stability_verdict(key, s).instantly_stable, "final-equal append preserves stability");
        ++preserved;
    }
    o.detail << "3 examples, " << preserved << " stable series extended";
}

// -- 10 --------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the whole pipeline into `dir`, capturing stdout of each command into
// a file so that it is compared too.
bool pipeline(const fs::path& dir, std::vector<fs::path>& files, std::string& failure) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto step = [&](const std::string& name, std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        const auto path = dir / (name + ".stdout");
        // Commands echo output paths; the run directory is the one expected difference.
        std::string text = out.str();
        for (auto pos = text.find(dir.string()); pos != std::string::npos; pos = text.find(dir.string(), pos)) {
            text.replace(pos, dir.string().size(), "RUN");
        }
        std::ofstream(path, std::ios::binary) << text;
        files.push_back(path);
        if (code != 0 && failure.empty()) failure = name + " exited " + std::to_string(code) + ": " + err.str();
        return code == 0;
    };
    const auto data = dir / "data";
    const auto events = (data / "events.ndjson").string();
    const auto snapshots = (data / "snapshots.ndjson").string();
    if (!step("generate", {"generate", "--output-dir", data.string(), "--seed", "11"})) return false;
    files.push_back(data / "events.ndjson");
    files.push_back(data / "snapshots.ndjson");
    files.push_back(data / "ground_truth.json");
    step("ingest", {"ingest-check", "--events", events, "--snapshots", snapshots});

    // Score the tuple with the most candidate updates.
    const auto ingested = ingest_events_file(events);
    const auto ds = build_three_tuple_dataset(ingested.records);
    const ScoreRecord* best = nullptr;
    for (const auto& [k, r] : ds) {
        if (!best || r.candidate_updates > best->candidate_updates) best = &r;
    }
    if (!best) {
        failure = "no tuples generated";
        return false;
    }
    step("score", {"score", "--events", events, "--provider", best->key.provider, "--origin", best->key.origin,
                   "--target", best->key.target});
    step("score_minor", {"score", "--snapshots", snapshots, "--provider", best->key.provider, "--target",
                         best->key.target, "--level", "minor"});

    for (const std::string kind : {"candidates", "scores", "precision", "pipeline"}) {
        const auto out = dir / ("report_" + kind + ".csv");
        step("report_" + kind, {"report", "--report", kind, "--events", events, "--output", out.string()});
        files.push_back(out);
    }
    const auto stab = dir / "report_stability.csv";
    step("report_stability", {"report", "--report", "stability", "--snapshots", snapshots, "--output", stab.string()});
    files.push_back(stab);

    const auto features = dir / "features.csv";
    step("features", {"features", "--events", events, "--output", features.string()});
    files.push_back(features);

    const auto result = dir / "experiment.json";
    step("experiment", {"experiment", "--events", events, "--spec", "combined", "--iterations", "20", "--seed", "5",
                        "--compare-baseline", "--output", result.string()});
    files.push_back(result);
    return failure.empty();
}

void end_to_end(Outcome& o) {
    const auto root = fs::temp_directory_path() / "depscore-acceptance";
    std::vector<fs::path> first, second;
    std::string failure;
    o.require(pipeline(root / "run1", first, failure), "first run: " + failure);
    o.require(pipeline(root / "run2", second, failure), "second run: " + failure);
    o.require(first.size() == second.size(), "same file list");
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i) {
        const auto a = slurp(first[i]);
        o.require(a == slurp(second[i]), first[i].filename().string() + " byte-identical");
        o.require(!a.empty() || first[i].extension() == ".stdout", first[i].filename().string() + " non-empty");
        bytes += a.size();
    }
    o.detail << first.size() << " files, " << bytes << " bytes per run";
}

}  // namespace

int main() {
    const std::vector<std::tuple<int, std::string, double, std::function<void(Outcome&)>>> criteria{
        {1, "confidence math", 10, confidence_math},
        {2, "score and badge law", 5, score_badge_law},
        {3, "range monotonicity and oracle", 30, range_oracle},
        {4, "check classifier golden corpus", 1, golden_corpus},
        {5, "AUC oracle", 10, auc_oracle},
        {6, "harness signal and noise", 300, harness_signal},
        {7, "permutation importance sanity", 120, importance_sanity},
        {8, "temporal leakage guard", 30, leakage_guard},
        {9, "stability rule", 1, stability_rule},
        {10, "end-to-end determinism", 300, end_to_end},
    };
    int failures = 0;
    for (const auto& [id, name, budget, fn] : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < budget, "runtime budget");
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " (" << std::fixed
                  << std::setprecision(2) << secs << " s, budget " << std::setprecision(0) << budget << " s) "
                  << std::defaultfloat << o.detail.str() << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
