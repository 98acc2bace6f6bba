#ifndef DIABENCH_ORACLE_HPP
#define DIABENCH_ORACLE_HPP

#include "diabench/domain.hpp"

namespace diabench::oracle {

/// Ground-truth adjudication plus a short clinician-style rationale.
/// The rationale names every triggered criterion tag.
struct OracleOutcome {
    Adjudication adjudication;
    std::string rationale;

    bool operator==(const OracleOutcome&) const = default;
};

/// ADA 2025 FPG/HbA1c classification. Diabetes if either marker meets its
/// diabetes threshold (stricter criterion wins on discordant inputs);
/// prediabetes if either marker sits in its prediabetes band; normal
/// otherwise. Requires confirmed fasting status.
OracleOutcome classify_glycemia(const GlycemicMarkers& markers,
                                const ThresholdConfig& cfg = {});

/// 75g OGTT screening: gestational diabetes iff any one threshold is met.
OracleOutcome classify_ogtt(const OgttResult& result, const ThresholdConfig& cfg = {});

/// Weekly remote-monitoring adjudication. Each daily reading is classified by
/// the FPG bands; the week takes the majority daily class with ties broken
/// toward the more severe class. Alert level maps normal->none,
/// prediabetes->warning, diabetes->alert. Requires at least 5 readings.
OracleOutcome classify_week(const MonitoringWeek& week, const ThresholdConfig& cfg = {});

/// Retinopathy staging from lesion descriptors:
///   empty findings                          -> no_retinopathy
///   subset of {microaneurysms,
///              few_hemorrhages}, non-empty  -> mild_retinopathy
///   contains neovascularization             -> severe_retinopathy
///   anything else                           -> moderate_retinopathy
/// HbA1c tags are exclusive: A1c_>=9 supersedes A1c_>=7.
OracleOutcome stage_retinopathy(const RetinalCase& retinal,
                                const ThresholdConfig& cfg = {});

/// Symptom triage ladder. Labs are recommended iff any symptom is present;
/// high suspicion needs >= 3 symptoms, or weight loss with >= 2.
TriageResult triage(const SymptomCase& symptom_case);
OracleOutcome triage_symptoms(const SymptomCase& symptom_case);

/// Dispatches to the scenario-specific classifier. Pure and deterministic.
OracleOutcome adjudicate(const CaseRecord& record, const ThresholdConfig& cfg = {});

/// Per-day glycemic banding used by classify_week, exposed for tests.
GlycemiaClass classify_daily_reading(double reading, const ThresholdConfig& cfg = {});

}  // namespace diabench::oracle

#endif  // DIABENCH_ORACLE_HPP
