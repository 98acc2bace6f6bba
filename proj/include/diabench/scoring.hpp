#ifndef DIABENCH_SCORING_HPP
#define DIABENCH_SCORING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diabench/backends.hpp"
#include "diabench/domain.hpp"
#include "diabench/extraction.hpp"

namespace diabench::scoring {

struct CaseScore {
    std::string case_id;
    bool classification_correct = false;
    bool criteria_exact = false;
    double criteria_jaccard = 0.0;
    std::optional<bool> alert_correct;  // present iff monitoring scenario
    extraction::Verdict extraction_verdict = extraction::Verdict::failed;
    /// Extracted label, absent when extraction failed (confusion matrix
    /// column "extraction_failed").
    std::optional<Label> predicted;

    bool operator==(const CaseScore&) const = default;
};

struct ScenarioReport {
    std::uint64_t n = 0;
    double classification_accuracy = 0.0;
    double criteria_exact_rate = 0.0;
    double mean_jaccard = 0.0;
    double extraction_failure_rate = 0.0;
    /// Monitoring scores classification and alert level separately.
    std::optional<double> alert_accuracy;
    /// Symptom triage's primary bit: agreement on whether labs are needed
    /// (triage_low vs anything above it).
    std::optional<double> labs_recommended_accuracy;
    /// truth label -> predicted label (or "extraction_failed") -> count.
    std::map<std::string, std::map<std::string, std::uint64_t>> confusion;

    bool operator==(const ScenarioReport&) const = default;
};

struct RunMetadata {
    std::uint64_t seed = 0;
    std::string backend_hash;
    std::string template_version;

    bool operator==(const RunMetadata&) const = default;
};

struct EvalReport {
    RunMetadata metadata;
    std::uint64_t n = 0;
    double overall_accuracy = 0.0;
    double overall_criteria_exact_rate = 0.0;
    double overall_extraction_failure_rate = 0.0;
    std::map<std::string, ScenarioReport> scenarios;

    bool operator==(const EvalReport&) const = default;
};

/// Compares one extraction against ground truth. Failed extractions score
/// every boolean false; criteria Jaccard uses the convention {} vs {} -> 1.
CaseScore score_case(const Adjudication& truth,
                     const extraction::ExtractionResult& extracted,
                     std::string case_id);

/// Extracts and scores every response against its corpus case. Throws
/// CardinalityError (naming the case ids) when the two sides disagree.
std::vector<CaseScore> score_responses(
    const std::vector<CaseRecord>& corpus,
    const std::vector<backends::ModelResponse>& responses);

/// Deterministic aggregation, invariant under corpus order. Empty corpus is
/// an error, not an empty report.
EvalReport aggregate(const std::vector<CaseScore>& scores,
                     const std::vector<CaseRecord>& corpus,
                     RunMetadata metadata = {});

enum class ReportFormat { json, csv, markdown };
std::optional<ReportFormat> parse_report_format(std::string_view s);

/// json is the canonical machine format and round-trips losslessly through
/// parse_report; csv flattens per-scenario rows; markdown mirrors the
/// scenario | ground truth | task | accuracy table layout.
std::string emit_report(const EvalReport& report, ReportFormat format);
EvalReport parse_report(const std::string& json_text);

}  // namespace diabench::scoring

#endif  // DIABENCH_SCORING_HPP
