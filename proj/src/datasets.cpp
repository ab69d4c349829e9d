#include "depscore/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "depscore/errors.hpp"

namespace depscore {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(CheckConclusion c) {
    switch (c) {
        case CheckConclusion::Success: return "success";
        case CheckConclusion::Failure: return "failure";
        case CheckConclusion::Neutral: return "neutral";
        case CheckConclusion::Skipped: return "skipped";
        case CheckConclusion::Cancelled: return "cancelled";
    }
    return "success";
}

std::optional<CheckConclusion> parse_check_conclusion(std::string_view text) {
    if (text == "success") return CheckConclusion::Success;
    if (text == "failure") return CheckConclusion::Failure;
    if (text == "neutral") return CheckConclusion::Neutral;
    if (text == "skipped") return CheckConclusion::Skipped;
    if (text == "cancelled") return CheckConclusion::Cancelled;
    return std::nullopt;
}

std::string_view to_string(CiConclusion c) {
    switch (c) {
        case CiConclusion::Success: return "success";
        case CiConclusion::Failure: return "failure";
        case CiConclusion::NoCi: return "no_ci";
    }
    return "no_ci";
}

std::string to_string(const TupleKey& key) {
    return key.provider + " (" + key.ecosystem + ") " + key.origin + " -> " + key.target;
}

namespace {

// Field readers throw std::invalid_argument with a message that becomes the
// rejection reason.

const json& require(const json& obj, const char* field) {
    const auto it = obj.find(field);
    if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + field + "'");
    return *it;
}

std::string read_text(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + field + "' must be a string");
    auto s = v.get<std::string>();
    if (s.empty()) throw std::invalid_argument(std::string("field '") + field + "' must be non-empty");
    return s;
}

bool read_bool(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_boolean()) throw std::invalid_argument(std::string("field '") + field + "' must be a boolean");
    return v.get<bool>();
}

std::optional<bool> read_optional_bool(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (v.is_null()) return std::nullopt;
    if (!v.is_boolean()) throw std::invalid_argument(std::string("field '") + field + "' must be a boolean or null");
    return v.get<bool>();
}

Timestamp to_timestamp(const json& v, const char* field) {
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + field + "' must be an ISO-8601 string");
    const auto t = parse_timestamp(v.get<std::string>());
    if (!t) throw std::invalid_argument(std::string("field '") + field + "' is not a valid ISO-8601 timestamp");
    return *t;
}

std::uint64_t read_count(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw std::invalid_argument(std::string("field '") + field + "' must be a non-negative integer");
}

UpdateEvent event_from_json(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("record is not a JSON object");

    UpdateEvent e;
    e.client = read_text(obj, "client");
    e.ecosystem = read_text(obj, "ecosystem");
    e.provider = read_text(obj, "provider");
    e.origin = read_text(obj, "origin_version");
    e.target = read_text(obj, "target_version");
    e.opened_at = to_timestamp(require(obj, "opened_at"), "opened_at");
    if (const auto& closed = require(obj, "closed_at"); !closed.is_null()) {
        e.closed_at = to_timestamp(closed, "closed_at");
    }
    e.merged = read_bool(obj, "merged");
    e.merged_by_human = read_optional_bool(obj, "merged_by_human");
    e.base_ci_passing = read_bool(obj, "base_ci_passing");

    const auto& checks = require(obj, "checks");
    if (!checks.is_array()) throw std::invalid_argument("field 'checks' must be an array");
    for (const auto& c : checks) {
        if (!c.is_object()) throw std::invalid_argument("check entry is not an object");
        CheckRun run;
        run.name = read_text(c, "name");
        const auto& concl = require(c, "conclusion");
        if (!concl.is_string()) throw std::invalid_argument("check conclusion must be a string");
        const auto parsed = parse_check_conclusion(concl.get<std::string>());
        if (!parsed) throw std::invalid_argument("unknown check conclusion '" + concl.get<std::string>() + "'");
        run.conclusion = *parsed;
        e.checks.push_back(std::move(run));
    }

    if (e.closed_at && *e.closed_at < e.opened_at) throw std::invalid_argument("closed_at precedes opened_at");
    if (e.merged && !e.closed_at) throw std::invalid_argument("merged event has no closed_at");
    return e;
}

ScoreRecord snapshot_from_json(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("record is not a JSON object");

    ScoreRecord r;
    r.key.provider = read_text(obj, "dependency_name");
    r.key.ecosystem = read_text(obj, "package_manager");
    r.key.origin = read_text(obj, "previous_version");
    r.key.target = read_text(obj, "updated_version");
    r.candidate_updates = read_count(obj, "candidate_updates");
    r.successful_updates = read_count(obj, "successful_updates");
    if (const auto it = obj.find("fetched_at"); it != obj.end() && !it->is_null()) {
        r.fetched_at = to_timestamp(*it, "fetched_at");
    }

    if (r.candidate_updates == 0) throw std::invalid_argument("candidate_updates must be at least 1");
    if (r.successful_updates > r.candidate_updates) {
        throw std::invalid_argument("successful_updates exceeds candidate_updates");
    }
    return r;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

template <typename T, typename Parse>
Ingested<T> ingest_lines(std::istream& in, Parse parse) {
    Ingested<T> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (is_blank(line)) continue;
        ++out.report.total;
        try {
            out.records.push_back(parse(json::parse(line)));
            ++out.report.loaded;
        } catch (const json::exception& ex) {
            out.report.rejected.push_back({number, std::string("malformed JSON: ") + ex.what()});
        } catch (const std::invalid_argument& ex) {
            out.report.rejected.push_back({number, ex.what()});
        }
    }
    if (in.bad()) throw IoError("read error while ingesting");
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return in;
}

ordered_json timestamp_or_null(const std::optional<Timestamp>& t) {
    return t ? ordered_json(format_timestamp(*t)) : ordered_json(nullptr);
}

}  // namespace

Ingested<UpdateEvent> ingest_events(std::istream& in) {
    return ingest_lines<UpdateEvent>(in, event_from_json);
}

Ingested<UpdateEvent> ingest_events_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    return ingest_events(in);
}

Ingested<ScoreRecord> ingest_snapshots(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("read error while ingesting snapshots");
    const std::string text = buffer.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '[') {
        std::istringstream lines(text);
        return ingest_lines<ScoreRecord>(lines, snapshot_from_json);
    }

    json array;
    try {
        array = json::parse(text);
    } catch (const json::exception& ex) {
        throw IoError(std::string("malformed snapshot array: ") + ex.what());
    }

    Ingested<ScoreRecord> out;
    std::size_t index = 0;
    for (const auto& element : array) {
        ++index;
        ++out.report.total;
        try {
            out.records.push_back(snapshot_from_json(element));
            ++out.report.loaded;
        } catch (const std::invalid_argument& ex) {
            out.report.rejected.push_back({index, ex.what()});
        } catch (const json::exception& ex) {
            out.report.rejected.push_back({index, ex.what()});
        }
    }
    return out;
}

Ingested<ScoreRecord> ingest_snapshots_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    return ingest_snapshots(in);
}

void write_events(std::ostream& out, std::span<const UpdateEvent> events) {
    for (const auto& e : events) {
        ordered_json checks = ordered_json::array();
        for (const auto& c : e.checks) {
            checks.push_back({{"name", c.name}, {"conclusion", to_string(c.conclusion)}});
        }
        ordered_json obj;
        obj["client"] = e.client;
        obj["ecosystem"] = e.ecosystem;
        obj["provider"] = e.provider;
        obj["origin_version"] = e.origin;
        obj["target_version"] = e.target;
        obj["opened_at"] = format_timestamp(e.opened_at);
        obj["closed_at"] = timestamp_or_null(e.closed_at);
        obj["merged"] = e.merged;
        obj["merged_by_human"] = e.merged_by_human ? ordered_json(*e.merged_by_human) : ordered_json(nullptr);
        obj["base_ci_passing"] = e.base_ci_passing;
        obj["checks"] = std::move(checks);
        out << obj.dump() << '\n';
    }
}

void write_snapshots(std::ostream& out, std::span<const ScoreRecord> records) {
    for (const auto& r : records) {
        ordered_json obj;
        obj["dependency_name"] = r.key.provider;
        obj["package_manager"] = r.key.ecosystem;
        obj["previous_version"] = r.key.origin;
        obj["updated_version"] = r.key.target;
        obj["candidate_updates"] = r.candidate_updates;
        obj["successful_updates"] = r.successful_updates;
        obj["fetched_at"] = timestamp_or_null(r.fetched_at);
        out << obj.dump() << '\n';
    }
}

CiConclusion ci_conclusion(const UpdateEvent& event) {
    if (event.checks.empty()) return CiConclusion::NoCi;
    const bool failed = std::any_of(event.checks.begin(), event.checks.end(), [](const CheckRun& c) {
        return c.conclusion == CheckConclusion::Failure || c.conclusion == CheckConclusion::Cancelled;
    });
    return failed ? CiConclusion::Failure : CiConclusion::Success;
}

bool is_candidate_update(const UpdateEvent& event) {
    return event.base_ci_passing && ci_conclusion(event) != CiConclusion::NoCi;
}

ThreeTupleDataset build_three_tuple_dataset(std::span<const UpdateEvent> events) {
    ThreeTupleDataset out;
    for (const auto& e : events) {
        if (!is_candidate_update(e)) continue;
        auto key = e.key();
        auto [it, inserted] = out.try_emplace(key);
        if (inserted) it->second.key = std::move(key);
        ++it->second.candidate_updates;
        if (ci_conclusion(e) == CiConclusion::Success) ++it->second.successful_updates;
    }
    return out;
}

SnapshotDataset build_three_tuple_dataset(std::span<const ScoreRecord> snapshots) {
    SnapshotDataset out;
    std::set<TupleKey> collided;
    for (const auto& r : snapshots) {
        auto [it, inserted] = out.dataset.try_emplace(r.key, r);
        if (inserted) continue;
        if (collided.insert(r.key).second) out.collisions.push_back(r.key);
        // nullopt orders before any timestamp; ties go to the later record.
        if (!(r.fetched_at < it->second.fetched_at)) it->second = r;
    }
    return out;
}

std::vector<LinkedEvent> link_four_tuple(std::span<const UpdateEvent> events, const ThreeTupleDataset& dataset) {
    std::vector<LinkedEvent> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        LinkedEvent linked{e, std::nullopt};
        if (const auto it = dataset.find(e.key()); it != dataset.end()) linked.record = it->second;
        out.push_back(std::move(linked));
    }
    return out;
}

}  // namespace depscore
