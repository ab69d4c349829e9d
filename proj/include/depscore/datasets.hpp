#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depscore/timestamp.hpp"

namespace depscore {

enum class CheckConclusion { Success, Failure, Neutral, Skipped, Cancelled };

std::string_view to_string(CheckConclusion c);
std::optional<CheckConclusion> parse_check_conclusion(std::string_view text);

struct CheckRun {
    std::string name;
    CheckConclusion conclusion = CheckConclusion::Success;

    friend bool operator==(const CheckRun&, const CheckRun&) = default;
};

/// (provider, ecosystem, origin, target): one dependency update across the crowd.
struct TupleKey {
    std::string provider;
    std::string ecosystem;
    std::string origin;
    std::string target;

    friend auto operator<=>(const TupleKey&, const TupleKey&) = default;
    friend bool operator==(const TupleKey&, const TupleKey&) = default;
};

std::string to_string(const TupleKey& key);

/// One bot-opened update PR in a client package.
struct UpdateEvent {
    std::string client;
    std::string ecosystem;
    std::string provider;
    std::string origin;
    std::string target;
    Timestamp opened_at{};
    std::optional<Timestamp> closed_at;
    bool merged = false;
    std::optional<bool> merged_by_human;
    bool base_ci_passing = true;
    std::vector<CheckRun> checks;

    TupleKey key() const { return {provider, ecosystem, origin, target}; }

    friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

/// Candidate (N) and successful (S) update counts for one tuple.
struct ScoreRecord {
    TupleKey key;
    std::uint64_t candidate_updates = 0;
    std::uint64_t successful_updates = 0;
    std::optional<Timestamp> fetched_at;

    friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

struct Rejection {
    std::size_t line = 0;  // 1-based; array element index for JSON-array inputs
    std::string reason;
};

struct IngestReport {
    std::size_t total = 0;
    std::size_t loaded = 0;
    std::vector<Rejection> rejected;
};

template <typename T>
struct Ingested {
    std::vector<T> records;
    IngestReport report;
};

/// Newline-delimited event log. Blank lines are ignored and not counted.
Ingested<UpdateEvent> ingest_events(std::istream& in);
/// Throws IoError when the file cannot be opened.
Ingested<UpdateEvent> ingest_events_file(const std::filesystem::path& path);

/// Snapshot records, either one JSON array or newline-delimited objects.
Ingested<ScoreRecord> ingest_snapshots(std::istream& in);
Ingested<ScoreRecord> ingest_snapshots_file(const std::filesystem::path& path);

void write_events(std::ostream& out, std::span<const UpdateEvent> events);
void write_snapshots(std::ostream& out, std::span<const ScoreRecord> records);

enum class CiConclusion { Success, Failure, NoCi };

std::string_view to_string(CiConclusion c);

/// Failure if any check failed or was cancelled; neutral and skipped do not fail.
CiConclusion ci_conclusion(const UpdateEvent& event);

/// CI ran on the PR and the base branch was passing when it was opened.
bool is_candidate_update(const UpdateEvent& event);

using ThreeTupleDataset = std::map<TupleKey, ScoreRecord>;

/// N = candidate updates per key, S = those whose CI passed. Keys with no
/// candidates are omitted.
ThreeTupleDataset build_three_tuple_dataset(std::span<const UpdateEvent> events);

struct SnapshotDataset {
    ThreeTupleDataset dataset;
    /// Keys seen more than once; the record with the latest fetched_at wins.
    std::vector<TupleKey> collisions;
};

SnapshotDataset build_three_tuple_dataset(std::span<const ScoreRecord> snapshots);

struct LinkedEvent {
    UpdateEvent event;
    std::optional<ScoreRecord> record;
};

/// Pairs each event with the crowd record of its tuple, if there is one.
std::vector<LinkedEvent> link_four_tuple(std::span<const UpdateEvent> events,
                                         const ThreeTupleDataset& dataset);

}  // namespace depscore
