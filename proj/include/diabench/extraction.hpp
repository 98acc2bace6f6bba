#ifndef DIABENCH_EXTRACTION_HPP
#define DIABENCH_EXTRACTION_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diabench/domain.hpp"

namespace diabench::extraction {

/// Stable, documented issue enumeration (see docs/schema.md).
enum class IssueCode {
    no_json,
    malformed,
    missing_field,
    unexpected_field,
    unknown_label,
    unknown_tag,
    foreign_tag
};

/// Canonical code spellings: NO_JSON, MALFORMED, MISSING_FIELD,
/// UNEXPECTED_FIELD, UNKNOWN_LABEL, UNKNOWN_TAG, FOREIGN_TAG.
std::string_view to_string(IssueCode code);

struct Issue {
    IssueCode code = IssueCode::no_json;
    std::string message;
    /// Byte range of the relevant text in the raw response, when known.
    std::pair<std::size_t, std::size_t> span{0, 0};

    bool operator==(const Issue&) const = default;
};

enum class Verdict { ok, recovered, failed };
std::string_view to_string(Verdict verdict);

/// verdict == ok      -> issues empty, adjudication present
/// verdict == recovered -> adjudication present, issues explain the repairs
/// verdict == failed  -> adjudication absent
struct ExtractionResult {
    std::optional<Adjudication> adjudication;
    std::vector<Issue> issues;
    Verdict verdict = Verdict::failed;
};

/// Locates the first balanced top-level JSON object starting at or after
/// `from` (brace matching that respects string literals and escapes).
/// Returns the [begin, end) byte span, or nullopt when none remains.
std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(
    std::string_view text, std::size_t from = 0);

/// Pulls the structured summary out of a free-form model response. Tolerates
/// surrounding prose and code fences; the first parseable balanced object
/// wins. Classification labels and criterion tags are normalized
/// case-insensitively against the canonical registries. Never throws on
/// arbitrary input: every failure is a structured verdict.
ExtractionResult extract(std::string_view raw_text, Scenario scenario);

/// Field presence/absence versus the scenario contract, plus FOREIGN_TAG for
/// registry tags outside the scenario's family. Issues are data, not errors.
std::vector<Issue> validate_schema(const Adjudication& adjudication, Scenario scenario);

/// Registry tags that legitimately appear in a scenario's outputs.
const std::set<CriterionTag>& tag_family(Scenario scenario);

}  // namespace diabench::extraction

#endif  // DIABENCH_EXTRACTION_HPP
