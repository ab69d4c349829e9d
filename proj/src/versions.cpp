#include "depscore/versions.hpp"

#include <array>
#include <cctype>
#include <charconv>

namespace depscore {

namespace {

std::optional<std::uint64_t> parse_component(std::string_view digits) {
    if (digits.empty()) return std::nullopt;
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    return value;
}

}  // namespace

std::optional<Version> parse_version(std::string_view text) {
    if (text.empty()) return std::nullopt;

    Version v;
    v.raw = std::string(text);

    std::string_view rest = text;
    if (rest.front() == 'v' || rest.front() == 'V') rest.remove_prefix(1);

    if (const auto dash = rest.find('-'); dash != std::string_view::npos) {
        const auto label = rest.substr(dash + 1);
        if (label.empty()) return std::nullopt;
        v.prerelease = std::string(label);
        rest = rest.substr(0, dash);
    }
    if (rest.find('+') != std::string_view::npos) return std::nullopt;

    std::array<std::uint64_t, 3> parts{0, 0, 0};
    std::size_t count = 0;
    while (true) {
        if (count == parts.size()) return std::nullopt;
        const auto dot = rest.find('.');
        const auto piece = rest.substr(0, dot);
        const auto value = parse_component(piece);
        if (!value) return std::nullopt;
        parts[count++] = *value;
        if (dot == std::string_view::npos) break;
        rest.remove_prefix(dot + 1);
    }

    v.major = parts[0];
    v.minor = parts[1];
    v.patch = parts[2];
    return v;
}

bool in_origin_range(const Version& origin, const Version& target, RangeLevel level) {
    switch (level) {
        case RangeLevel::Exact:
            return origin.major == target.major && origin.minor == target.minor &&
                   origin.patch == target.patch && origin.prerelease == target.prerelease;
        case RangeLevel::Patch:
            return origin.major == target.major && origin.minor == target.minor;
        case RangeLevel::Minor:
            return origin.major == target.major;
        case RangeLevel::Major:
            return true;
    }
    return false;
}

std::string_view to_string(RangeLevel level) {
    switch (level) {
        case RangeLevel::Exact: return "exact";
        case RangeLevel::Patch: return "patch";
        case RangeLevel::Minor: return "minor";
        case RangeLevel::Major: return "major";
    }
    return "exact";
}

std::optional<RangeLevel> parse_range_level(std::string_view text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "exact") return RangeLevel::Exact;
    if (lower == "patch") return RangeLevel::Patch;
    if (lower == "minor") return RangeLevel::Minor;
    if (lower == "major") return RangeLevel::Major;
    return std::nullopt;
}

}  // namespace depscore
