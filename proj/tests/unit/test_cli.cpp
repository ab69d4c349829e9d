#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "depscore/datasets.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using depscore::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("depscore-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 12 candidate updates of left-pad 1.0.0 -> 1.1.0 with 11 passing, 3 of
// 2.0.0 -> 2.1.0 all passing, and one 1.0.5 -> 1.1.0 failure.
fs::path score_fixture() {
    std::vector<depscore::UpdateEvent> events;
    for (int i = 0; i < 12; ++i) {
        auto b = fixture::event("c" + std::to_string(i), "left-pad", "1.0.0", "1.1.0", i);
        if (i == 4) b.failing();
        events.push_back(b);
    }
    for (int i = 0; i < 3; ++i) events.push_back(fixture::event("d" + std::to_string(i), "left-pad", "2.0.0", "2.1.0", 20 + i));
    events.push_back(fixture::event("e", "left-pad", "1.0.5", "1.1.0", 30).failing());
    events.push_back(fixture::event("f", "left-pad", "1.0.0", "1.1.0", 31).no_ci());
    const auto path = scratch("score") / "events.ndjson";
    std::ofstream out(path);
    depscore::write_events(out, events);
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("interval formatting") {
    CHECK(depscore::cli::format_interval(0.767588, 1.0) == "[0.77, 1.00]");
    CHECK(depscore::cli::format_interval(0.0, 0.125) == "[0.00, 0.13]");
    CHECK(depscore::cli::format_interval(0.5, 0.994999) == "[0.50, 0.99]");
}

TEST_CASE("score with a shown badge") {
    const auto events = score_fixture().string();
    const auto r = call({"score", "--events", events, "--provider", "left-pad", "--origin", "1.0.0", "--target", "1.1.0"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("compatibility: 92% (n=12) 90% CI [0.77, 1.00] badge=shown\n", 0) == 0);
    CHECK(r.out.find("score=11/12") != std::string::npos);
}

TEST_CASE("score with too few candidates") {
    const auto events = score_fixture().string();
    const auto r = call({"score", "--events", events, "--provider", "left-pad", "--origin", "2.0.0", "--target", "2.1.0"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("compatibility: unknown (candidates=3, successful=3)", 0) == 0);
    CHECK(r.out.find("badge=unknown\n") != std::string::npos);
}

TEST_CASE("range score") {
    const auto events = score_fixture().string();
    const auto r = call({"score", "--events", events, "--provider", "left-pad", "--target", "1.1.0", "--level", "minor"});
    CHECK(r.code == 0);
    CHECK(r.out.find("candidates=13 successful=11") != std::string::npos);
    CHECK(r.out.find("matched_keys=2") != std::string::npos);
}

TEST_CASE("score failures") {
    const auto events = score_fixture().string();
    CHECK(call({"score", "--events", events, "--provider", "left-pad", "--origin", "9.9.9", "--target", "1.1.0"}).code == 2);
    CHECK(call({"score", "--events", events, "--provider", "nope", "--origin", "1.0.0", "--target", "1.1.0"}).code == 2);
    CHECK(call({"score", "--events", events, "--provider", "left-pad", "--target", "1.1.0"}).code == 1);
    CHECK(call({"score", "--events", events, "--provider", "left-pad", "--target", "1.1.0", "--level", "huge"}).code == 1);
    CHECK(call({"score", "--events", "/nonexistent/file.ndjson", "--provider", "x", "--origin", "1", "--target", "2"}).code ==
          1);
}

TEST_CASE("parse errors and help") {
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"score", "--bogus"}).code == 1);
    const auto help = call({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("generate") != std::string::npos);
}

TEST_CASE("classify-checks") {
    const auto r = call({"classify-checks", "--name", "CodeQL", "--name", "jest tests", "--name", "zzz"});
    CHECK(r.code == 0);
    CHECK(r.out == "CodeQL\tSecurity Analysis\njest tests\tTest\nzzz\tUnclassified\n");

    const auto t = call({"classify-checks", "--events", score_fixture().string()});
    CHECK(t.code == 0);
    CHECK(t.out.find("Build") != std::string::npos);
    CHECK(t.out.find("100.00") != std::string::npos);
}

TEST_CASE("ingest-check") {
    const auto good = score_fixture();
    CHECK(call({"ingest-check", "--events", good.string()}).code == 0);
    const auto bad = scratch("bad") / "events.ndjson";
    std::ofstream(bad) << slurp(good) << "{\"client\": 3}\n";
    const auto r = call({"ingest-check", "--events", bad.string()});
    CHECK(r.code == 1);
    CHECK(r.out.find("rejected=1") != std::string::npos);
}

TEST_CASE("reports") {
    const auto events = score_fixture().string();
    const auto c = call({"report", "--report", "candidates", "--events", events});
    CHECK(c.code == 0);
    CHECK(c.out.rfind("# report: candidates\n", 0) == 0);
    CHECK(call({"report", "--report", "scores", "--events", events}).code == 0);
    CHECK(call({"report", "--report", "precision", "--events", events, "--min-candidates", "50"}).code == 2);
    CHECK(call({"report", "--report", "pipeline", "--events", events}).code == 0);
    CHECK(call({"report", "--report", "stability", "--events", events}).code == 1);
    CHECK(call({"report", "--report", "nonsense", "--events", events}).code == 1);

    const auto path = scratch("report") / "scores.csv";
    const auto w = call({"report", "--report", "scores", "--events", events, "--output", path.string()});
    CHECK(w.code == 0);
    CHECK(slurp(path).rfind("# report: scores\n", 0) == 0);
}

TEST_CASE("generate, experiment and determinism") {
    const auto dir = scratch("gen");
    const auto g = call({"generate", "--output-dir", (dir / "a").string(), "--seed", "4", "--clients", "20"});
    REQUIRE(g.code == 0);
    REQUIRE(call({"generate", "--output-dir", (dir / "b").string(), "--seed", "4", "--clients", "20"}).code == 0);
    CHECK(slurp(dir / "a" / "events.ndjson") == slurp(dir / "b" / "events.ndjson"));
    CHECK(slurp(dir / "a" / "snapshots.ndjson") == slurp(dir / "b" / "snapshots.ndjson"));

    const auto events = (dir / "a" / "events.ndjson").string();
    CHECK(call({"report", "--report", "stability", "--snapshots", (dir / "a" / "snapshots.ndjson").string()}).code == 0);

    const std::vector<std::string> exp{"experiment", "--events", events, "--spec", "combined", "--iterations", "3",
                                       "--trees", "10"};
    auto with_out = [&](const std::string& name) {
        auto args = exp;
        args.push_back("--output");
        args.push_back((dir / name).string());
        return call(args);
    };
    const auto e1 = with_out("r1.json");
    REQUIRE(e1.code == 0);
    CHECK(e1.out.rfind("experiment combined: median AUC ", 0) == 0);
    REQUIRE(with_out("r2.json").code == 0);
    CHECK(slurp(dir / "r1.json") == slurp(dir / "r2.json"));

    const auto spec = dir / "empty.json";
    std::ofstream(spec) << R"({"name": "nothing", "features": []})";
    CHECK(call({"experiment", "--events", events, "--spec", spec.string(), "--iterations", "2"}).code == 2);
    const auto narrow = dir / "narrow.json";
    std::ofstream(narrow) << R"({"name": "narrow", "design": "combined", "filter": {"min_exact_candidates": 100000}})";
    CHECK(call({"experiment", "--events", events, "--spec", narrow.string(), "--iterations", "2"}).code == 2);
    const auto broken = dir / "broken.json";
    std::ofstream(broken) << R"({"name": "x", "colour": 1})";
    CHECK(call({"experiment", "--events", events, "--spec", broken.string()}).code == 1);
}

TEST_CASE("environment variables fill unset flags") {
    const auto dir = scratch("env");
    ::setenv("DEPSCORE_SEED", "4", 1);
    ::setenv("DEPSCORE_CLIENTS", "20", 1);
    const auto a = call({"generate", "--output-dir", (dir / "env").string()});
    const auto b = call({"generate", "--output-dir", (dir / "flag").string(), "--seed", "5"});
    ::unsetenv("DEPSCORE_SEED");
    ::unsetenv("DEPSCORE_CLIENTS");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    REQUIRE(call({"generate", "--output-dir", (dir / "plain").string(), "--seed", "4", "--clients", "20"}).code == 0);
    CHECK(slurp(dir / "env" / "events.ndjson") == slurp(dir / "plain" / "events.ndjson"));
    CHECK(slurp(dir / "flag" / "events.ndjson") != slurp(dir / "plain" / "events.ndjson"));
}

}
