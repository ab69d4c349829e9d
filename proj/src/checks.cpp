#include "depscore/checks.hpp"

#include <algorithm>

namespace depscore {

std::string_view to_string(CheckCategory c) {
    switch (c) {
        case CheckCategory::Build: return "Build";
        case CheckCategory::Test: return "Test";
        case CheckCategory::Useless: return "Useless";
        case CheckCategory::Lint: return "Lint";
        case CheckCategory::Deploy: return "Deploy";
        case CheckCategory::SecurityAnalysis: return "Security Analysis";
        case CheckCategory::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

std::optional<CheckCategory> parse_check_category(std::string_view text) {
    for (auto c : {CheckCategory::Build, CheckCategory::Test, CheckCategory::Useless, CheckCategory::Lint,
                   CheckCategory::Deploy, CheckCategory::SecurityAnalysis, CheckCategory::Unclassified}) {
        if (text == to_string(c)) return c;
    }
    if (text == "SecurityAnalysis") return CheckCategory::SecurityAnalysis;
    return std::nullopt;
}

std::vector<PatternRow> CheckClassifier::default_rows() {
    // Alternations are kept exactly as published, including the leading
    // spaces some alternatives carry and the unescaped dots.
    return {
        {CheckCategory::Useless,
         R"(WIP|^Rule: automatic merge for Dependabot pull requests \(merge\)$|(Auto ?)?merge|^stale$|)"
         R"(^Update \.NET SDK$|^Summary$|fixupbot|Mixed content|Rebase|Autosquash|Backport|docs|hyperjump|)"
         R"(kodiakhq: status|DCO|lock|Discord Listener|Label|css|Clean GitHub pages|pre-commit|remove-pr|)"
         R"(markdown-link-check|Run CircleCI artifacts redirector|pedrolamas.com|)"
         R"(Auto Approve a PR by dependabot|dependabolt|github/dependabot.yml|greeting|chrome|firefox|finish|)"
         R"(mui-org.material-ui| jbhannah.net|Always run job|jhipster.generator-jhipster|dispatch|)"
         R"(Timeline protection|Inclusive Language|mark-duplicate|migration|Generate HTML log|feature flags)"},
        {CheckCategory::SecurityAnalysis,
         R"(code(| |-)ql|GitGuardian Security Checks|SonarCloud Code Analysis|LGTM analysis|depcheck|audit| rubocop)"},
        {CheckCategory::Deploy, R"(Redirect rules|Header rules|deploy|release|Pages changed|publish|artifact)"},
        {CheckCategory::Lint,
         R"((es)?lint|ESLint Report Analysis|codecov|Floating Dependencies|prettier| Coverage|Standard|)"
         R"( bundle-size|pronto|flake8| mypy|CodeFactor|Code style)"},
        {CheckCategory::Test,
         R"((^| )test|Analy(s|z)e|Analysis|karma|e2e| stoplightio|check| unit-js| run|Validation|rspec)"},
        {CheckCategory::Build,
         R"((^| |-)(build|install)|Travis CI|developing-with-angular|(main|workflow|setup)|Node(.js)? \d?\d?|)"
         R"((Continuous integration|^ci($| ))|(tsc|typescript)|monica CI|(web|webpack)|PHP|)"
         R"((Try: )?ember((-| )try)?|(macOS|windows|ubuntu|linux)(-latest)?|Python|^3.\d$|^2.\d$)"},
    };
}

CheckClassifier::CheckClassifier(std::vector<PatternRow> rows) : rows_(std::move(rows)) {
    compiled_.reserve(rows_.size());
    for (const auto& row : rows_) {
        compiled_.emplace_back(row.pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    }
}

const CheckClassifier& CheckClassifier::standard() {
    static const CheckClassifier classifier(default_rows());
    return classifier;
}

CheckCategory CheckClassifier::classify(std::string_view name) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (std::regex_search(name.begin(), name.end(), compiled_[i])) return rows_[i].category;
    }
    return CheckCategory::Unclassified;
}

std::vector<CheckCategory> CheckClassifier::matching_rows(std::string_view name) const {
    std::vector<CheckCategory> out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (std::regex_search(name.begin(), name.end(), compiled_[i])) out.push_back(rows_[i].category);
    }
    return out;
}

CheckCategory classify_check_name(std::string_view name) { return CheckClassifier::standard().classify(name); }

PipelineQuality classify_pipeline(const UpdateEvent& event) {
    PipelineQuality q;
    bool has_other_classified = false;
    for (const auto& check : event.checks) {
        const auto category = classify_check_name(check.name);
        q.categories.push_back(category);
        switch (category) {
            case CheckCategory::Build:
            case CheckCategory::Test:
                q.has_build_or_test = true;
                has_other_classified = true;
                break;
            case CheckCategory::Useless:
                q.has_useless = true;
                break;
            case CheckCategory::Unclassified:
                break;
            default:
                has_other_classified = true;
                break;
        }
    }
    q.check_count = q.categories.size();
    q.useless_only = q.has_useless && !has_other_classified;
    return q;
}

}  // namespace depscore
