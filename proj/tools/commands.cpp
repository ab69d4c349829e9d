#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "depscore/analytics.hpp"
#include "depscore/checks.hpp"
#include "depscore/confidence.hpp"
#include "depscore/datasets.hpp"
#include "depscore/errors.hpp"
#include "depscore/experiment.hpp"
#include "depscore/features.hpp"
#include "depscore/scoring.hpp"
#include "depscore/synth.hpp"
#include "depscore/versions.hpp"

namespace depscore::cli {

namespace fs = std::filesystem;

namespace {

/// Thrown for command-line misuse that CLI11 cannot express (mutually
/// required inputs and the like).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string env_name(const std::string& flag) {
    std::string name = "DEPSCORE_";
    for (char c : flag.substr(2)) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

template <typename T>
CLI::Option* option(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
    return app->add_option(flag, target, help)->envname(env_name(flag));
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& target, const std::string& help) {
    return app->add_flag(name, target, help)->envname(env_name(name));
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void report_rejections(std::ostream& err, const std::string& what, const IngestReport& report) {
    for (const auto& r : report.rejected) err << what << " line " << r.line << ": " << r.reason << '\n';
}

std::vector<UpdateEvent> load_events(const fs::path& path, std::ostream& err) {
    auto ingested = ingest_events_file(path);
    if (!ingested.report.rejected.empty()) {
        report_rejections(err, path.string(), ingested.report);
        err << "warning: skipped " << ingested.report.rejected.size() << " malformed event(s)\n";
    }
    return std::move(ingested.records);
}

std::vector<ScoreRecord> load_snapshots(const fs::path& path, std::ostream& err) {
    auto ingested = ingest_snapshots_file(path);
    if (!ingested.report.rejected.empty()) {
        report_rejections(err, path.string(), ingested.report);
        err << "warning: skipped " << ingested.report.rejected.size() << " malformed record(s)\n";
    }
    return std::move(ingested.records);
}

ThreeTupleDataset load_dataset(const std::string& events, const std::string& snapshots, std::ostream& err) {
    if (!events.empty() && !snapshots.empty()) throw UsageError("pass only one of --events and --snapshots");
    if (!events.empty()) {
        const auto loaded = load_events(events, err);
        return build_three_tuple_dataset(std::span<const UpdateEvent>(loaded));
    }
    if (!snapshots.empty()) {
        const auto loaded = load_snapshots(snapshots, err);
        return build_three_tuple_dataset(std::span<const ScoreRecord>(loaded)).dataset;
    }
    throw UsageError("one of --events or --snapshots is required");
}

std::string two_decimals(double v) {
    const auto hundredths = static_cast<long long>(std::floor(v * 100.0 + 0.5));
    std::ostringstream s;
    s << hundredths / 100 << '.' << std::setw(2) << std::setfill('0') << hundredths % 100;
    return s.str();
}

/// count / total as a percentage rounded half-up to two decimals.
std::string percent(std::uint64_t count, std::uint64_t total) {
    if (total == 0) return "0.00%";
    const std::uint64_t basis = (count * 20000 + total) / (2 * total);
    std::ostringstream s;
    s << basis / 100 << '.' << std::setw(2) << std::setfill('0') << basis % 100 << '%';
    return s.str();
}

// ---- ingest-check --------------------------------------------------------

struct IngestArgs {
    std::string events;
    std::string snapshots;
};

int cmd_ingest_check(const IngestArgs& a, std::ostream& out, std::ostream& err) {
    if (a.events.empty() && a.snapshots.empty()) throw UsageError("one of --events or --snapshots is required");
    bool clean = true;
    auto summarize = [&](const std::string& what, const fs::path& path, const IngestReport& report) {
        out << what << ": " << path.string() << " total=" << report.total << " loaded=" << report.loaded
            << " rejected=" << report.rejected.size() << '\n';
        report_rejections(err, path.string(), report);
        clean = clean && report.rejected.empty();
    };
    if (!a.events.empty()) summarize("events", a.events, ingest_events_file(a.events).report);
    if (!a.snapshots.empty()) summarize("snapshots", a.snapshots, ingest_snapshots_file(a.snapshots).report);
    return clean ? kOk : kIoOrParse;
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
    std::string events;
    std::string snapshots;
    std::string provider;
    std::string ecosystem;
    std::string origin;
    std::string target;
    std::string level = "exact";
};

std::string resolve_ecosystem(const ThreeTupleDataset& dataset, const ScoreArgs& a) {
    if (!a.ecosystem.empty()) return a.ecosystem;
    std::set<std::string> seen;
    for (const auto& [key, record] : dataset) {
        if (key.provider == a.provider && key.target == a.target) seen.insert(key.ecosystem);
    }
    if (seen.empty()) throw DomainError("unknown tuple: no updates of " + a.provider + " to " + a.target);
    if (seen.size() > 1) {
        std::string list;
        for (const auto& e : seen) list += (list.empty() ? "" : ", ") + e;
        throw DomainError("provider " + a.provider + " exists in several ecosystems (" + list +
                          "); pass --ecosystem");
    }
    return *seen.begin();
}

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
    const auto level = parse_range_level(a.level);
    if (!level) throw UsageError("unknown --level '" + a.level + "' (exact, patch, minor, major)");
    if (*level == RangeLevel::Exact && a.origin.empty()) throw UsageError("--origin is required at --level exact");

    const ThreeTupleDataset dataset = load_dataset(a.events, a.snapshots, err);
    const std::string ecosystem = resolve_ecosystem(dataset, a);

    ScoreReport report;
    if (*level == RangeLevel::Exact) {
        const TupleKey key{a.provider, ecosystem, a.origin, a.target};
        const auto it = dataset.find(key);
        if (it == dataset.end()) throw DomainError("unknown tuple: " + to_string(key));
        report = compatibility_score(it->second);
    } else {
        report = range_compatibility_score(dataset, a.provider, ecosystem, a.target, *level);
        if (report.matched_keys == 0) {
            throw DomainError("unknown tuple: no origins of " + a.provider + " within the " +
                              std::string(to_string(*level)) + " range of " + a.target);
        }
    }

    std::ostringstream line;
    if (report.badge == Badge::Shown) {
        line << render_badge(report);
    } else {
        line << "compatibility: unknown (candidates=" << report.candidate_updates
             << ", successful=" << report.successful_updates << ")";
    }
    if (report.interval) line << " 90% CI " << format_interval(report.interval->lo, report.interval->hi);
    line << " badge=" << to_string(report.badge);
    out << line.str() << '\n';

    out << "tuple: " << to_string(report.key) << " level=" << to_string(report.level)
        << " candidates=" << report.candidate_updates << " successful=" << report.successful_updates;
    if (report.score) out << " score=" << report.score->num << '/' << report.score->den;
    out << " precision=" << std::fixed << std::setprecision(4) << report.precision << std::defaultfloat;
    if (*level != RangeLevel::Exact) {
        out << " matched_keys=" << report.matched_keys << " excluded_unparseable=" << report.excluded_unparseable;
    }
    out << '\n';
    return kOk;
}

// ---- classify-checks -----------------------------------------------------

struct ClassifyArgs {
    std::string events;
    std::vector<std::string> names;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
    if (a.events.empty() && a.names.empty()) throw UsageError("pass --events or at least one --name");
    for (const auto& name : a.names) out << name << '\t' << to_string(classify_check_name(name)) << '\n';
    if (a.events.empty()) return kOk;

    const auto events = load_events(a.events, err);
    std::map<CheckCategory, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& e : events) {
        for (const auto& check : e.checks) {
            ++counts[classify_check_name(check.name)];
            ++total;
        }
    }
    out << std::left << std::setw(20) << "Category" << std::right << std::setw(10) << "Count" << std::setw(10)
        << "Percent" << '\n';
    auto row = [&](std::string_view label, std::uint64_t n) {
        out << std::left << std::setw(20) << label << std::right << std::setw(10) << n << std::setw(10)
            << percent(n, total) << '\n';
    };
    for (CheckCategory c : kClassifiedCategories) row(to_string(c), counts[c]);
    row(to_string(CheckCategory::Unclassified), counts[CheckCategory::Unclassified]);
    row("Total", total);
    return kOk;
}

// ---- features ------------------------------------------------------------

struct FeaturesArgs {
    std::string events;
    std::string output;
    bool require_human_merge = false;
    bool include_non_candidates = false;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
    const auto events = load_events(a.events, err);
    const auto rows = feature_matrix(events, {a.require_human_merge, a.include_non_candidates});
    if (a.output.empty()) {
        write_feature_csv(out, rows);
    } else {
        auto file = open_output(a.output);
        write_feature_csv(file, rows);
        out << a.output << '\n';
    }
    err << rows.size() << " feature rows\n";
    return kOk;
}

// ---- experiment ----------------------------------------------------------

struct ExperimentArgs {
    std::string events;
    std::string spec;
    std::string output;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    std::size_t trees = 0;
    bool compare_baseline = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* iterations_opt = nullptr;
    CLI::Option* trees_opt = nullptr;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    ExperimentSpec spec;
    if (const auto design = parse_design(a.spec)) {
        spec = builtin_spec(*design);
    } else {
        spec = parse_experiment_spec(read_file(a.spec));
    }
    if (a.seed_opt->count() > 0) spec.forest.seed = a.seed;
    if (a.iterations_opt->count() > 0) spec.iterations = a.iterations;
    if (a.trees_opt->count() > 0) spec.forest.tree_count = a.trees;
    if (a.compare_baseline) spec.compare_to_baseline = true;

    const auto events = load_events(a.events, err);
    const auto outcome = run_experiment(std::span<const UpdateEvent>(events), spec);

    std::ostringstream summary;
    summary << "experiment " << outcome.spec.name << ": median AUC " << std::fixed << std::setprecision(4)
            << outcome.result.median_auc << " over " << outcome.result.auc_values.size()
            << " iterations (rows=" << outcome.result.rows << ", merged=" << outcome.result.positives << ")";
    if (outcome.baseline_median_auc) summary << " baseline median AUC " << *outcome.baseline_median_auc;
    summary << '\n';

    if (a.output.empty()) {
        write_experiment_result(out, outcome);
        err << summary.str();
    } else {
        auto file = open_output(a.output);
        write_experiment_result(file, outcome);
        if (!file) throw IoError("failed writing " + a.output);
        out << summary.str() << a.output << '\n';
    }
    return kOk;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
    std::string kind;
    std::string events;
    std::string snapshots;
    std::string output;
    std::size_t bins = kDefaultBins;
    std::uint64_t min_candidates = 5;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
    std::ostringstream body;
    if (a.kind == "candidates") {
        write_report(body, candidate_count_report(load_dataset(a.events, a.snapshots, err), a.bins));
    } else if (a.kind == "scores") {
        write_report(body, score_distribution_report(load_dataset(a.events, a.snapshots, err), a.min_candidates,
                                                     a.bins));
    } else if (a.kind == "precision") {
        write_report(body, precision_distribution_report(load_dataset(a.events, a.snapshots, err),
                                                         a.min_candidates, a.bins));
    } else if (a.kind == "pipeline") {
        if (a.events.empty()) throw UsageError("--report pipeline needs --events");
        write_report(body, pipeline_quality_report(load_events(a.events, err)));
    } else {
        if (a.snapshots.empty()) throw UsageError("--report stability needs --snapshots");
        const auto extraction = score_series(load_snapshots(a.snapshots, err));
        if (extraction.skipped_without_time > 0) {
            err << "warning: ignored " << extraction.skipped_without_time << " record(s) without fetched_at\n";
        }
        write_report(body, stability_analysis(extraction.series));
    }

    if (a.output.empty()) {
        out << body.str();
    } else {
        auto file = open_output(a.output);
        file << body.str();
        if (!file) throw IoError("failed writing " + a.output);
        out << a.output << '\n';
    }
    return kOk;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
    std::string output_dir;
    std::string config;
    std::uint64_t seed = 0;
    std::size_t providers = 0;
    std::size_t releases = 0;
    std::size_t clients = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* providers_opt = nullptr;
    CLI::Option* releases_opt = nullptr;
    CLI::Option* clients_opt = nullptr;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream&) {
    EcosystemSpec spec = a.config.empty() ? EcosystemSpec{} : parse_ecosystem_spec(read_file(a.config));
    if (a.seed_opt->count() > 0) spec.seed = a.seed;
    if (a.providers_opt->count() > 0) spec.provider_count = a.providers;
    if (a.releases_opt->count() > 0) spec.releases_per_provider = a.releases;
    if (a.clients_opt->count() > 0) spec.client_count = a.clients;

    const Ecosystem eco = generate_ecosystem(spec);
    const EcosystemFiles files = write_ecosystem(a.output_dir, eco);
    out << files.events.string() << " (" << eco.events.size() << " events)\n"
        << files.snapshots.string() << " (" << eco.snapshots.size() << " records)\n"
        << files.ground_truth.string() << '\n';
    return kOk;
}

}  // namespace

std::string format_interval(double lo, double hi) { return "[" + two_decimals(lo) + ", " + two_decimals(hi) + "]"; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Crowd-sourced compatibility scores for dependency updates", "depscore"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 I/O or parse failure, 2 domain error (unknown tuple, empty filter).\n"
               "Every flag can also be set through DEPSCORE_<FLAG> (e.g. DEPSCORE_SEED); flags win.");

    std::function<int()> action;

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest-check", "Validate event and snapshot files; exit 1 on any rejection");
    option(ingest_cmd, "--events", ingest.events, "Event log (NDJSON)");
    option(ingest_cmd, "--snapshots", ingest.snapshots, "Score snapshots (JSON array or NDJSON)");
    ingest_cmd->callback([&] { action = [&] { return cmd_ingest_check(ingest, out, err); }; });

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Compatibility score, badge and 90% interval for one update");
    option(score_cmd, "--events", score.events, "Event log (NDJSON)");
    option(score_cmd, "--snapshots", score.snapshots, "Score snapshots");
    option(score_cmd, "--provider", score.provider, "Provider package")->required();
    option(score_cmd, "--ecosystem", score.ecosystem, "Package ecosystem; needed when the provider is ambiguous");
    option(score_cmd, "--origin", score.origin, "Origin version (exact level only)");
    option(score_cmd, "--target", score.target, "Target version")->required();
    option(score_cmd, "--level", score.level, "exact, patch, minor or major");
    score_cmd->callback([&] { action = [&] { return cmd_score(score, out, err); }; });

    ClassifyArgs classify;
    auto* classify_cmd = app.add_subcommand("classify-checks", "Classify CI check names");
    option(classify_cmd, "--events", classify.events, "Tabulate every check run in this event log");
    option(classify_cmd, "--name", classify.names, "Check name to classify (repeatable)");
    classify_cmd->callback([&] { action = [&] { return cmd_classify(classify, out, err); }; });

    FeaturesArgs features;
    auto* features_cmd = app.add_subcommand("features", "Write the per-event feature matrix as CSV");
    option(features_cmd, "--events", features.events, "Event log (NDJSON)")->required();
    option(features_cmd, "--output", features.output, "CSV path (default: stdout)");
    flag(features_cmd, "--require-human-merge", features.require_human_merge, "Only human merges count as merged");
    flag(features_cmd, "--include-non-candidates", features.include_non_candidates,
         "Also emit rows for events that are not candidate updates");
    features_cmd->callback([&] { action = [&] { return cmd_features(features, out, err); }; });

    ExperimentArgs experiment;
    auto* experiment_cmd = app.add_subcommand("experiment", "Bootstrap a random-forest merge model");
    option(experiment_cmd, "--events", experiment.events, "Event log (NDJSON)")->required();
    option(experiment_cmd, "--spec", experiment.spec, "baseline, range, history, combined, or a JSON spec file")
        ->required();
    option(experiment_cmd, "--output", experiment.output, "Result JSON path (default: stdout)");
    experiment.seed_opt = option(experiment_cmd, "--seed", experiment.seed, "Master seed");
    experiment.iterations_opt = option(experiment_cmd, "--iterations", experiment.iterations, "Bootstrap iterations");
    experiment.trees_opt = option(experiment_cmd, "--trees", experiment.trees, "Trees per forest");
    flag(experiment_cmd, "--compare-baseline", experiment.compare_baseline, "Also run the baseline design");
    experiment_cmd->callback([&] { action = [&] { return cmd_experiment(experiment, out, err); }; });

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Descriptive dataset reports");
    option(report_cmd, "--report", report.kind, "candidates, scores, precision, pipeline or stability")
        ->required()
        ->check(CLI::IsMember({"candidates", "scores", "precision", "pipeline", "stability"}));
    option(report_cmd, "--events", report.events, "Event log (NDJSON)");
    option(report_cmd, "--snapshots", report.snapshots, "Score snapshots");
    option(report_cmd, "--output", report.output, "Report path (default: stdout)");
    option(report_cmd, "--bins", report.bins, "Histogram bins")->check(CLI::PositiveNumber);
    option(report_cmd, "--min-candidates", report.min_candidates, "Qualifying N for scores and precision");
    report_cmd->callback([&] { action = [&] { return cmd_report(report, out, err); }; });

    GenerateArgs generate;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic ecosystem");
    option(generate_cmd, "--output-dir", generate.output_dir, "Directory for the generated files")->required();
    option(generate_cmd, "--config", generate.config, "Ecosystem spec (JSON)");
    generate.seed_opt = option(generate_cmd, "--seed", generate.seed, "Generator seed");
    generate.providers_opt = option(generate_cmd, "--providers", generate.providers, "Provider count");
    generate.releases_opt = option(generate_cmd, "--releases", generate.releases, "Releases per provider");
    generate.clients_opt = option(generate_cmd, "--clients", generate.clients, "Client count");
    generate_cmd->callback([&] { action = [&] { return cmd_generate(generate, out, err); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kIoOrParse;
    }

    try {
        return action();
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kDomain;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrParse;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrParse;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrParse;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoOrParse;
    }
}

}  // namespace depscore::cli
