#pragma once

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "depscore/datasets.hpp"

namespace depscore {

enum class CheckCategory { Build, Test, Useless, Lint, Deploy, SecurityAnalysis, Unclassified };

std::string_view to_string(CheckCategory c);
std::optional<CheckCategory> parse_check_category(std::string_view text);

/// The six classified categories, in table order (Build first).
inline constexpr CheckCategory kClassifiedCategories[] = {
    CheckCategory::Build, CheckCategory::Test,   CheckCategory::Useless,
    CheckCategory::Lint,  CheckCategory::Deploy, CheckCategory::SecurityAnalysis,
};

struct PatternRow {
    CheckCategory category;
    std::string pattern;  // ECMAScript syntax, matched case-insensitively anywhere in the name
};

/// First-match-wins classifier over an ordered list of pattern rows.
class CheckClassifier {
public:
    explicit CheckClassifier(std::vector<PatternRow> rows);

    /// Rows in the default precedence:
    /// Useless, SecurityAnalysis, Deploy, Lint, Test, Build.
    static std::vector<PatternRow> default_rows();
    static const CheckClassifier& standard();

    CheckCategory classify(std::string_view name) const;

    /// Categories whose row matches `name`, in row order. Used to inspect
    /// precedence collisions.
    std::vector<CheckCategory> matching_rows(std::string_view name) const;

    const std::vector<PatternRow>& rows() const { return rows_; }

private:
    std::vector<PatternRow> rows_;
    std::vector<std::regex> compiled_;
};

CheckCategory classify_check_name(std::string_view name);

struct PipelineQuality {
    std::size_t check_count = 0;
    bool has_build_or_test = false;
    bool has_useless = false;
    /// At least one useless check and every classified check is useless.
    bool useless_only = false;
    std::vector<CheckCategory> categories;  // one per check, in check order
};

/// Unclassified checks count toward check_count but never set a flag.
PipelineQuality classify_pipeline(const UpdateEvent& event);

}  // namespace depscore
