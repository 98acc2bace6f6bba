#include "diabench/extraction.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "json.hpp"

namespace diabench::extraction {
namespace {

using json = nlohmann::json;

std::string fold_case(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

std::optional<Label> label_by_fold(const std::string& folded) {
    for (Label l : label_registry()) {
        if (fold_case(to_string(l)) == folded) return l;
    }
    return std::nullopt;
}

std::optional<CriterionTag> tag_by_fold(const std::string& folded) {
    for (CriterionTag t : criterion_registry()) {
        if (fold_case(render_tag(t)) == folded) return t;
    }
    return std::nullopt;
}

std::optional<AlertLevel> alert_by_fold(const std::string& folded) {
    for (int i = 0; i < 3; ++i) {
        auto level = static_cast<AlertLevel>(i);
        if (fold_case(to_string(level)) == folded) return level;
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(IssueCode code) {
    switch (code) {
        case IssueCode::no_json: return "NO_JSON";
        case IssueCode::malformed: return "MALFORMED";
        case IssueCode::missing_field: return "MISSING_FIELD";
        case IssueCode::unexpected_field: return "UNEXPECTED_FIELD";
        case IssueCode::unknown_label: return "UNKNOWN_LABEL";
        case IssueCode::unknown_tag: return "UNKNOWN_TAG";
        case IssueCode::foreign_tag: return "FOREIGN_TAG";
    }
    return "UNKNOWN";
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::ok: return "ok";
        case Verdict::recovered: return "recovered";
        case Verdict::failed: return "failed";
    }
    return "failed";
}

std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(
    std::string_view text, std::size_t from) {
    std::size_t open = text.find('{', from);
    while (open != std::string_view::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = open; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) return std::make_pair(open, i + 1);
            }
        }
        // This opening brace never closes; a later one still might.
        open = text.find('{', open + 1);
    }
    return std::nullopt;
}

const std::set<CriterionTag>& tag_family(Scenario scenario) {
    static const std::array<std::set<CriterionTag>, 5> families = [] {
        std::array<std::set<CriterionTag>, 5> f;
        // symptoms and monitoring outputs carry no registry tags
        f[static_cast<std::size_t>(Scenario::labs)] = {
            CriterionTag::fpg_ge_126, CriterionTag::a1c_ge_6_5,
            CriterionTag::fpg_100_125, CriterionTag::a1c_5_7_6_4};
        f[static_cast<std::size_t>(Scenario::gdm)] = {
            CriterionTag::fpg_ge_92, CriterionTag::ogtt_1h_ge_180,
            CriterionTag::ogtt_2h_ge_153};
        f[static_cast<std::size_t>(Scenario::multimodal)] = {
            CriterionTag::a1c_ge_7, CriterionTag::a1c_ge_9,
            CriterionTag::microaneurysms, CriterionTag::retinal_lesions};
        return f;
    }();
    return families[static_cast<std::size_t>(scenario)];
}

std::vector<Issue> validate_schema(const Adjudication& adjudication, Scenario scenario) {
    std::vector<Issue> issues;
    const bool monitoring = scenario == Scenario::monitoring;
    if (monitoring) {
        if (!adjudication.week) {
            issues.push_back({IssueCode::missing_field, "week", {}});
        }
        if (!adjudication.alert_level) {
            issues.push_back({IssueCode::missing_field, "alert_level", {}});
        }
    } else {
        if (adjudication.week) {
            issues.push_back({IssueCode::unexpected_field, "week", {}});
        }
        if (adjudication.alert_level) {
            issues.push_back({IssueCode::unexpected_field, "alert_level", {}});
        }
    }
    const auto& family = tag_family(scenario);
    for (CriterionTag tag : adjudication.criteria_triggered) {
        if (family.count(tag) == 0) {
            issues.push_back({IssueCode::foreign_tag,
                              std::string(render_tag(tag)) +
                                  " is a registry tag outside the " +
                                  std::string(to_string(scenario)) + " family",
                              {}});
        }
    }
    return issues;
}

ExtractionResult extract(std::string_view raw_text, Scenario scenario) {
    ExtractionResult result;

    std::optional<std::pair<std::size_t, std::size_t>> first_balanced;
    std::optional<std::pair<std::size_t, std::size_t>> parsed_span;
    json payload;

    std::size_t from = 0;
    while (auto span = find_balanced_object(raw_text, from)) {
        if (!first_balanced) first_balanced = span;
        auto candidate = raw_text.substr(span->first, span->second - span->first);
        json parsed = json::parse(candidate, nullptr, /*allow_exceptions=*/false);
        if (!parsed.is_discarded() && parsed.is_object()) {
            payload = std::move(parsed);
            parsed_span = span;
            break;
        }
        from = span->first + 1;
    }

    if (!parsed_span) {
        if (first_balanced) {
            result.issues.push_back({IssueCode::malformed,
                                     "balanced braces found but not valid JSON",
                                     *first_balanced});
        } else {
            result.issues.push_back(
                {IssueCode::no_json, "no complete JSON object in response", {0, 0}});
        }
        result.verdict = Verdict::failed;
        return result;
    }

    const auto span = *parsed_span;
    Adjudication adj;

    // classification is load-bearing: without it the extraction fails.
    if (!payload.contains("classification") || !payload["classification"].is_string()) {
        result.issues.push_back(
            {IssueCode::missing_field, "classification", span});
        result.verdict = Verdict::failed;
        return result;
    }
    const std::string raw_label = trim(payload["classification"].get<std::string>());
    if (auto exact = parse_label(raw_label)) {
        adj.classification = *exact;
    } else if (auto folded = label_by_fold(fold_case(raw_label))) {
        adj.classification = *folded;
        result.issues.push_back(
            {IssueCode::unknown_label,
             "non-canonical label '" + raw_label + "' normalized to '" +
                 std::string(to_string(*folded)) + "'",
             span});
    } else {
        result.issues.push_back(
            {IssueCode::unknown_label, "label '" + raw_label + "' not in registry",
             span});
        result.verdict = Verdict::failed;
        return result;
    }

    // criteria_triggered: required outside monitoring, optional there.
    if (payload.contains("criteria_triggered") &&
        payload["criteria_triggered"].is_array()) {
        for (const auto& element : payload["criteria_triggered"]) {
            if (!element.is_string()) {
                result.issues.push_back(
                    {IssueCode::unknown_tag, "non-string criterion dropped", span});
                continue;
            }
            const std::string raw_tag = trim(element.get<std::string>());
            if (auto exact = parse_tag(raw_tag)) {
                adj.criteria_triggered.insert(*exact);
            } else if (auto folded = tag_by_fold(fold_case(raw_tag))) {
                adj.criteria_triggered.insert(*folded);
                result.issues.push_back(
                    {IssueCode::unknown_tag,
                     "non-canonical tag '" + raw_tag + "' normalized to '" +
                         std::string(render_tag(*folded)) + "'",
                     span});
            } else {
                result.issues.push_back(
                    {IssueCode::unknown_tag,
                     "tag '" + raw_tag + "' not in registry; dropped", span});
            }
        }
    } else if (scenario != Scenario::monitoring) {
        result.issues.push_back(
            {IssueCode::missing_field, "criteria_triggered", span});
    }

    if (payload.contains("next_steps") && payload["next_steps"].is_string()) {
        adj.next_steps = payload["next_steps"].get<std::string>();
    } else {
        result.issues.push_back({IssueCode::missing_field, "next_steps", span});
    }

    if (payload.contains("week")) {
        const auto& week = payload["week"];
        const double value = week.is_number() ? week.get<double>() : 0.0;
        if (week.is_number() && value >= 1.0 && value == std::floor(value)) {
            adj.week = static_cast<int>(value);
        } else {
            result.issues.push_back(
                {IssueCode::missing_field, "week present but not a positive integer",
                 span});
        }
    }
    if (payload.contains("alert_level")) {
        if (payload["alert_level"].is_string()) {
            const std::string raw_alert = trim(payload["alert_level"].get<std::string>());
            if (auto exact = parse_alert_level(raw_alert)) {
                adj.alert_level = *exact;
            } else if (auto folded = alert_by_fold(fold_case(raw_alert))) {
                adj.alert_level = *folded;
                result.issues.push_back(
                    {IssueCode::unknown_label,
                     "non-canonical alert_level '" + raw_alert + "' normalized to '" +
                         std::string(to_string(*folded)) + "'",
                     span});
            } else {
                result.issues.push_back(
                    {IssueCode::unknown_label,
                     "alert_level '" + raw_alert + "' not recognized", span});
            }
        } else {
            result.issues.push_back(
                {IssueCode::missing_field, "alert_level present but not a string", span});
        }
    }

    for (Issue& issue : validate_schema(adj, scenario)) {
        issue.span = span;
        result.issues.push_back(std::move(issue));
    }

    result.adjudication = std::move(adj);
    result.verdict = result.issues.empty() ? Verdict::ok : Verdict::recovered;
    return result;
}

}  // namespace diabench::extraction
