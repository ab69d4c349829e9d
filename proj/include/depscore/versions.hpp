#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace depscore {

/// A leniently parsed `major.minor.patch[-prerelease]` version.
struct Version {
    std::uint64_t major = 0;
    std::uint64_t minor = 0;
    std::uint64_t patch = 0;
    std::optional<std::string> prerelease;
    std::string raw;

    friend bool operator==(const Version&, const Version&) = default;
};

/// Width of the origin-version bucket used when aggregating candidate updates
/// toward one target. Ordered from narrowest to widest.
enum class RangeLevel { Exact, Patch, Minor, Major };

/// Accepts an optional leading `v`/`V`, one to three numeric components
/// (missing ones padded with zero) and an optional `-prerelease` suffix.
/// Anything else (four components, dates with text, build metadata) yields
/// nullopt.
std::optional<Version> parse_version(std::string_view text);

/// Whether `origin` falls into the bucket of `target` at `level`.
/// Prerelease labels only matter for Exact.
bool in_origin_range(const Version& origin, const Version& target, RangeLevel level);

std::string_view to_string(RangeLevel level);
std::optional<RangeLevel> parse_range_level(std::string_view text);

}  // namespace depscore
