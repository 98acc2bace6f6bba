#include "diabench/oracle.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace diabench::oracle {
namespace {

// next_steps wording is a fixed template per classification; tests compare
// adjudications by template identity, never by prose diff.
constexpr std::string_view kNextStepsNormalLabs =
    "Maintain healthy lifestyle; routine screening per age and risk profile.";
constexpr std::string_view kNextStepsPrediabetes =
    "Begin lifestyle program; repeat labs in 3-6 months.";
constexpr std::string_view kNextStepsDiabetes =
    "Repeat test to confirm; order comprehensive metabolic workup; counsel on lifestyle.";
constexpr std::string_view kNextStepsNormalGdm =
    "Routine prenatal care; continue healthy lifestyle.";
constexpr std::string_view kNextStepsGdm =
    "Nutrition counseling; glucose monitoring; obstetric follow-up.";
constexpr std::string_view kNextStepsWeekNone =
    "Routine monitoring; no action needed.";
constexpr std::string_view kNextStepsWeekWarning =
    "Schedule lifestyle counseling; recheck in 3 months.";
constexpr std::string_view kNextStepsWeekAlert =
    "Schedule telehealth visit; order confirmatory labs.";
constexpr std::string_view kNextStepsNoRetino =
    "Continue annual eye exams; maintain glycemic control.";
constexpr std::string_view kNextStepsMildRetino =
    "Tighten glycemic control; repeat retinal exam in 6 months.";
constexpr std::string_view kNextStepsModerateRetino =
    "Refer to ophthalmology; intensify glycemic control.";
constexpr std::string_view kNextStepsSevereRetino =
    "Urgent ophthalmology referral; intensify glycemic control.";
constexpr std::string_view kNextStepsTriageLow =
    "No labs indicated; routine screening per risk profile.";

std::string join_tags(const std::set<CriterionTag>& tags) {
    std::string out;
    for (CriterionTag t : tags) {
        if (!out.empty()) out += ", ";
        out += render_tag(t);
    }
    return out;
}

std::string triage_next_steps(const TriageResult& result) {
    if (!result.labs_recommended) return std::string(kNextStepsTriageLow);
    std::string tests;
    for (RecommendedTest t : result.recommended_tests) {
        if (!tests.empty()) tests += ", ";
        switch (t) {
            case RecommendedTest::fpg: tests += "fasting plasma glucose"; break;
            case RecommendedTest::hba1c: tests += "HbA1c"; break;
            case RecommendedTest::urinalysis: tests += "urinalysis"; break;
        }
    }
    return "Order confirmatory labs (" + tests + "); counsel on risk factors.";
}

}  // namespace

OracleOutcome classify_glycemia(const GlycemicMarkers& markers,
                                const ThresholdConfig& cfg) {
    cfg.validate();
    markers.validate();
    if (!markers.fasting_confirmed) {
        throw PreconditionError("glycemic classification requires confirmed fasting status");
    }

    const bool fpg_dm = markers.fpg >= cfg.fpg_dm;
    const bool a1c_dm = markers.hba1c >= cfg.a1c_dm;
    const bool fpg_pre = markers.fpg >= cfg.fpg_pre && markers.fpg < cfg.fpg_dm;
    const bool a1c_pre = markers.hba1c >= cfg.a1c_pre && markers.hba1c < cfg.a1c_dm;

    Adjudication adj;
    std::ostringstream rationale;
    rationale << "FPG " << format_quantity(markers.fpg) << " mg/dL and HbA1c "
              << format_quantity(markers.hba1c) << "%. ";

    if (fpg_dm || a1c_dm) {
        adj.classification = Label::diabetes;
        if (fpg_dm) adj.criteria_triggered.insert(CriterionTag::fpg_ge_126);
        if (a1c_dm) adj.criteria_triggered.insert(CriterionTag::a1c_ge_6_5);
        adj.next_steps = kNextStepsDiabetes;
        const bool discordant = fpg_dm != a1c_dm;
        rationale << (discordant ? "One marker meets" : "Both markers meet");
        rationale << " the ADA diabetes threshold (" << join_tags(adj.criteria_triggered)
                  << ")";
        if (discordant) {
            rationale << "; the stricter criterion governs and confirmatory repeat "
                         "testing is recommended.";
        } else {
            rationale << "; confirmatory repeat testing is recommended.";
        }
    } else if (fpg_pre || a1c_pre) {
        adj.classification = Label::prediabetes;
        if (fpg_pre) adj.criteria_triggered.insert(CriterionTag::fpg_100_125);
        if (a1c_pre) adj.criteria_triggered.insert(CriterionTag::a1c_5_7_6_4);
        adj.next_steps = kNextStepsPrediabetes;
        rationale << "Values meet the ADA prediabetes criteria ("
                  << join_tags(adj.criteria_triggered)
                  << ") but not the diabetes thresholds.";
    } else {
        adj.classification = Label::normal;
        adj.next_steps = kNextStepsNormalLabs;
        rationale << "Neither marker meets an ADA prediabetes or diabetes cutoff.";
    }

    return {adj, rationale.str()};
}

OracleOutcome classify_ogtt(const OgttResult& result, const ThresholdConfig& cfg) {
    cfg.validate();
    result.validate();

    Adjudication adj;
    if (result.fasting >= cfg.gdm_fasting) {
        adj.criteria_triggered.insert(CriterionTag::fpg_ge_92);
    }
    if (result.one_hour >= cfg.gdm_1h) {
        adj.criteria_triggered.insert(CriterionTag::ogtt_1h_ge_180);
    }
    if (result.two_hour >= cfg.gdm_2h) {
        adj.criteria_triggered.insert(CriterionTag::ogtt_2h_ge_153);
    }

    std::ostringstream rationale;
    rationale << "75g OGTT: fasting " << format_quantity(result.fasting) << ", 1-hour "
              << format_quantity(result.one_hour) << ", 2-hour "
              << format_quantity(result.two_hour) << " mg/dL. ";
    if (adj.criteria_triggered.empty()) {
        adj.classification = Label::normal;
        adj.next_steps = kNextStepsNormalGdm;
        rationale << "No value meets an ADA gestational diabetes threshold.";
    } else {
        adj.classification = Label::gestational_diabetes;
        adj.next_steps = kNextStepsGdm;
        rationale << "Gestational diabetes is diagnosed when any one threshold is met ("
                  << join_tags(adj.criteria_triggered) << ").";
    }
    return {adj, rationale.str()};
}

GlycemiaClass classify_daily_reading(double reading, const ThresholdConfig& cfg) {
    if (reading >= cfg.fpg_dm) return GlycemiaClass::diabetes;
    if (reading >= cfg.fpg_pre) return GlycemiaClass::prediabetes;
    return GlycemiaClass::normal;
}

OracleOutcome classify_week(const MonitoringWeek& week, const ThresholdConfig& cfg) {
    cfg.validate();
    if (week.readings.size() < 5) {
        throw PreconditionError("weekly classification requires at least 5 readings");
    }
    week.validate();

    std::array<int, 3> counts{0, 0, 0};
    for (int reading : week.readings) {
        counts[severity_rank(classify_daily_reading(reading, cfg))]++;
    }
    // Majority daily class; ties break toward the more severe class.
    GlycemiaClass weekly = GlycemiaClass::normal;
    int best = -1;
    for (int rank = 0; rank < 3; ++rank) {
        if (counts[rank] >= best) {
            best = counts[rank];
            weekly = static_cast<GlycemiaClass>(rank);
        }
    }

    Adjudication adj;
    adj.week = week.week_index;
    switch (weekly) {
        case GlycemiaClass::normal:
            adj.classification = Label::normal;
            adj.alert_level = AlertLevel::none;
            adj.next_steps = kNextStepsWeekNone;
            break;
        case GlycemiaClass::prediabetes:
            adj.classification = Label::prediabetes;
            adj.alert_level = AlertLevel::warning;
            adj.next_steps = kNextStepsWeekWarning;
            break;
        case GlycemiaClass::diabetes:
            adj.classification = Label::diabetes;
            adj.alert_level = AlertLevel::alert;
            adj.next_steps = kNextStepsWeekAlert;
            break;
    }

    std::ostringstream rationale;
    rationale << "Week " << week.week_index << ": of " << week.readings.size()
              << " daily fasting values, " << counts[0] << " normal, " << counts[1]
              << " prediabetes-range, " << counts[2]
              << " diabetes-range days; majority class is "
              << to_string(weekly) << ", alert level "
              << to_string(*adj.alert_level) << ".";
    return {adj, rationale.str()};
}

OracleOutcome stage_retinopathy(const RetinalCase& retinal, const ThresholdConfig& cfg) {
    cfg.validate();
    retinal.validate();

    const auto& findings = retinal.findings;
    const bool mild_only = !findings.empty() &&
        std::all_of(findings.begin(), findings.end(), [](LesionFinding f) {
            return f == LesionFinding::microaneurysms ||
                   f == LesionFinding::few_hemorrhages;
        });

    RetinopathyStage stage;
    if (findings.empty()) {
        stage = RetinopathyStage::no_retinopathy;
    } else if (mild_only) {
        stage = RetinopathyStage::mild_retinopathy;
    } else if (findings.count(LesionFinding::neovascularization) > 0) {
        stage = RetinopathyStage::severe_retinopathy;
    } else {
        stage = RetinopathyStage::moderate_retinopathy;
    }

    Adjudication adj;
    if (retinal.hba1c >= cfg.retino_a1c_severe_tag) {
        adj.criteria_triggered.insert(CriterionTag::a1c_ge_9);
    } else if (retinal.hba1c >= cfg.retino_a1c_mild_tag) {
        adj.criteria_triggered.insert(CriterionTag::a1c_ge_7);
    }
    if (stage == RetinopathyStage::mild_retinopathy) {
        adj.criteria_triggered.insert(CriterionTag::microaneurysms);
    }
    if (severity_rank(stage) >= severity_rank(RetinopathyStage::moderate_retinopathy)) {
        adj.criteria_triggered.insert(CriterionTag::retinal_lesions);
    }

    switch (stage) {
        case RetinopathyStage::no_retinopathy:
            adj.classification = Label::no_retinopathy;
            adj.next_steps = kNextStepsNoRetino;
            break;
        case RetinopathyStage::mild_retinopathy:
            adj.classification = Label::mild_retinopathy;
            adj.next_steps = kNextStepsMildRetino;
            break;
        case RetinopathyStage::moderate_retinopathy:
            adj.classification = Label::moderate_retinopathy;
            adj.next_steps = kNextStepsModerateRetino;
            break;
        case RetinopathyStage::severe_retinopathy:
            adj.classification = Label::severe_retinopathy;
            adj.next_steps = kNextStepsSevereRetino;
            break;
    }

    std::ostringstream rationale;
    rationale << "HbA1c " << format_quantity(retinal.hba1c) << "% with ";
    if (findings.empty()) {
        rationale << "no retinal lesions";
    } else {
        std::string names;
        for (LesionFinding f : findings) {
            if (!names.empty()) names += ", ";
            names += to_string(f);
        }
        rationale << "findings: " << names;
    }
    rationale << "; staged as " << to_string(stage);
    if (!adj.criteria_triggered.empty()) {
        rationale << " (" << join_tags(adj.criteria_triggered) << ")";
    }
    rationale << ".";
    return {adj, rationale.str()};
}

TriageResult triage(const SymptomCase& symptom_case) {
    symptom_case.validate();
    TriageResult result;
    const auto& symptoms = symptom_case.symptoms;
    result.labs_recommended = !symptoms.empty();
    if (result.labs_recommended) {
        result.recommended_tests = {RecommendedTest::fpg, RecommendedTest::hba1c};
        if (symptoms.count(Symptom::weight_loss) > 0 ||
            symptoms.count(Symptom::nausea) > 0) {
            result.recommended_tests.push_back(RecommendedTest::urinalysis);
        }
    }
    const std::size_t n = symptoms.size();
    if (n >= 3 || (symptoms.count(Symptom::weight_loss) > 0 && n >= 2)) {
        result.suspicion = Suspicion::high;
    } else if (n >= 1) {
        result.suspicion = Suspicion::moderate;
    } else {
        result.suspicion = Suspicion::low;
    }
    return result;
}

OracleOutcome triage_symptoms(const SymptomCase& symptom_case) {
    TriageResult result = triage(symptom_case);

    Adjudication adj;
    switch (result.suspicion) {
        case Suspicion::low: adj.classification = Label::triage_low; break;
        case Suspicion::moderate: adj.classification = Label::triage_moderate; break;
        case Suspicion::high: adj.classification = Label::triage_high; break;
    }
    adj.next_steps = triage_next_steps(result);

    std::ostringstream rationale;
    rationale << symptom_case.symptoms.size() << " reported symptom(s); suspicion of "
              << "diabetes is " << to_string(result.suspicion) << ". ";
    rationale << (result.labs_recommended
                      ? "Confirmatory laboratory testing is recommended."
                      : "No confirmatory testing is indicated.");
    return {adj, rationale.str()};
}

OracleOutcome adjudicate(const CaseRecord& record, const ThresholdConfig& cfg) {
    if (!payload_matches_scenario(record.payload, record.scenario)) {
        throw DispatchError("case " + record.case_id +
                            ": payload does not match scenario");
    }
    switch (record.scenario) {
        case Scenario::symptoms:
            return triage_symptoms(std::get<SymptomCase>(record.payload));
        case Scenario::labs:
            return classify_glycemia(std::get<GlycemicMarkers>(record.payload), cfg);
        case Scenario::gdm:
            return classify_ogtt(std::get<OgttResult>(record.payload), cfg);
        case Scenario::monitoring:
            return classify_week(std::get<MonitoringWeek>(record.payload), cfg);
        case Scenario::multimodal:
            return stage_retinopathy(std::get<RetinalCase>(record.payload), cfg);
    }
    throw DispatchError("unknown scenario");
}

}  // namespace diabench::oracle
