#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace depscore {

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff](Z|±HH:MM)`; a space may stand in for `T`.
/// Fractional seconds are truncated. Returns nullopt on anything malformed.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Canonical UTC rendering, `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp t);

}  // namespace depscore
