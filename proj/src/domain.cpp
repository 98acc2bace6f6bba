#include "diabench/domain.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace diabench {
namespace {

template <typename E, std::size_t N>
std::string_view lookup(const std::array<std::string_view, N>& table, E value) {
    auto idx = static_cast<std::size_t>(value);
    if (idx >= N) throw RegistryError("enum value out of range");
    return table[idx];
}

template <typename E, std::size_t N>
std::optional<E> reverse_lookup(const std::array<std::string_view, N>& table,
                                std::string_view s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (table[i] == s) return static_cast<E>(i);
    }
    return std::nullopt;
}

constexpr std::array<std::string_view, 5> kScenarioNames{
    "symptoms", "labs", "gdm", "monitoring", "multimodal"};

constexpr std::array<std::string_view, 2> kSexNames{"male", "female"};

constexpr std::array<std::string_view, 3> kGlycemiaNames{
    "normal", "prediabetes", "diabetes"};

constexpr std::array<std::string_view, 3> kAlertNames{"none", "warning", "alert"};

constexpr std::array<std::string_view, 4> kStageNames{
    "no_retinopathy", "mild_retinopathy", "moderate_retinopathy",
    "severe_retinopathy"};

constexpr std::array<std::string_view, 3> kSuspicionNames{"low", "moderate", "high"};

constexpr std::array<std::string_view, 7> kSymptomNames{
    "frequent_urination", "excessive_thirst", "fatigue",        "blurred_vision",
    "recurrent_infections", "weight_loss",    "nausea"};

constexpr std::array<std::string_view, 5> kRiskFactorNames{
    "obesity", "sedentary_lifestyle", "family_history", "hypertension", "smoker"};

constexpr std::array<std::string_view, 5> kLesionNames{
    "microaneurysms", "few_hemorrhages", "extensive_hemorrhages",
    "cotton_wool_spots", "neovascularization"};

constexpr std::array<std::string_view, 3> kTestNames{"fpg", "hba1c", "urinalysis"};

constexpr std::array<std::string_view, 11> kLabelNames{
    "normal",
    "prediabetes",
    "diabetes",
    "gestational_diabetes",
    "no_retinopathy",
    "mild_retinopathy",
    "moderate_retinopathy",
    "severe_retinopathy",
    "triage_low",
    "triage_moderate",
    "triage_high"};

// Byte-exact spellings; these appear verbatim in model-facing JSON.
constexpr std::array<std::string_view, 11> kTagNames{
    "FPG_>=126",     "A1c_>=6.5",     "FPG_100_125", "A1c_5.7_6.4",
    "FPG_>=92",      "OGTT_1h_>=180", "OGTT_2h_>=153",
    "A1c_>=7",       "A1c_>=9",       "microaneurysms", "retinal_lesions"};

}  // namespace

std::string_view to_string(Scenario s) { return lookup(kScenarioNames, s); }
std::string_view to_string(Sex s) { return lookup(kSexNames, s); }
std::string_view to_string(GlycemiaClass c) { return lookup(kGlycemiaNames, c); }
std::string_view to_string(AlertLevel a) { return lookup(kAlertNames, a); }
std::string_view to_string(RetinopathyStage r) { return lookup(kStageNames, r); }
std::string_view to_string(Suspicion s) { return lookup(kSuspicionNames, s); }
std::string_view to_string(Symptom s) { return lookup(kSymptomNames, s); }
std::string_view to_string(RiskFactor r) { return lookup(kRiskFactorNames, r); }
std::string_view to_string(LesionFinding f) { return lookup(kLesionNames, f); }
std::string_view to_string(RecommendedTest t) { return lookup(kTestNames, t); }
std::string_view to_string(Label l) { return lookup(kLabelNames, l); }

std::optional<Scenario> parse_scenario(std::string_view s) {
    return reverse_lookup<Scenario>(kScenarioNames, s);
}
std::optional<Sex> parse_sex(std::string_view s) {
    return reverse_lookup<Sex>(kSexNames, s);
}
std::optional<GlycemiaClass> parse_glycemia_class(std::string_view s) {
    return reverse_lookup<GlycemiaClass>(kGlycemiaNames, s);
}
std::optional<AlertLevel> parse_alert_level(std::string_view s) {
    return reverse_lookup<AlertLevel>(kAlertNames, s);
}
std::optional<RetinopathyStage> parse_retinopathy_stage(std::string_view s) {
    return reverse_lookup<RetinopathyStage>(kStageNames, s);
}
std::optional<Suspicion> parse_suspicion(std::string_view s) {
    return reverse_lookup<Suspicion>(kSuspicionNames, s);
}
std::optional<Symptom> parse_symptom(std::string_view s) {
    return reverse_lookup<Symptom>(kSymptomNames, s);
}
std::optional<RiskFactor> parse_risk_factor(std::string_view s) {
    return reverse_lookup<RiskFactor>(kRiskFactorNames, s);
}
std::optional<LesionFinding> parse_lesion_finding(std::string_view s) {
    return reverse_lookup<LesionFinding>(kLesionNames, s);
}
std::optional<RecommendedTest> parse_recommended_test(std::string_view s) {
    return reverse_lookup<RecommendedTest>(kTestNames, s);
}
std::optional<Label> parse_label(std::string_view s) {
    return reverse_lookup<Label>(kLabelNames, s);
}

std::string_view render_tag(CriterionTag tag) {
    auto idx = static_cast<std::size_t>(tag);
    if (idx >= kTagNames.size()) throw RegistryError("criterion tag outside registry");
    return kTagNames[idx];
}

std::optional<CriterionTag> parse_tag(std::string_view s) {
    return reverse_lookup<CriterionTag>(kTagNames, s);
}

const std::vector<CriterionTag>& criterion_registry() {
    static const std::vector<CriterionTag> registry = [] {
        std::vector<CriterionTag> tags;
        for (int i = 0; i < kCriterionTagCount; ++i) {
            tags.push_back(static_cast<CriterionTag>(i));
        }
        return tags;
    }();
    return registry;
}

const std::vector<Label>& label_registry() {
    static const std::vector<Label> registry = [] {
        std::vector<Label> labels;
        for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
            labels.push_back(static_cast<Label>(i));
        }
        return labels;
    }();
    return registry;
}

int severity_rank(GlycemiaClass c) { return static_cast<int>(c); }
int severity_rank(AlertLevel a) { return static_cast<int>(a); }
int severity_rank(RetinopathyStage r) { return static_cast<int>(r); }

void ThresholdConfig::validate() const {
    const double values[] = {fpg_pre,     fpg_dm, a1c_pre,     a1c_dm,
                             gdm_fasting, gdm_1h, gdm_2h,      retino_a1c_mild_tag,
                             retino_a1c_severe_tag};
    for (double v : values) {
        if (!(v > 0.0)) throw ConfigError("threshold values must be strictly positive");
    }
    if (!(fpg_pre < fpg_dm)) throw ConfigError("fpg_pre must be below fpg_dm");
    if (!(a1c_pre < a1c_dm)) throw ConfigError("a1c_pre must be below a1c_dm");
    if (!(retino_a1c_mild_tag < retino_a1c_severe_tag)) {
        throw ConfigError("retino_a1c_mild_tag must be below retino_a1c_severe_tag");
    }
}

void GlycemicMarkers::validate() const {
    if (fpg < 0.0 || fpg >= 1000.0) throw Error("fpg outside [0, 1000)");
    if (hba1c < 0.0 || hba1c >= 25.0) throw Error("hba1c outside [0, 25)");
}

void OgttResult::validate() const {
    for (double v : {fasting, one_hour, two_hour}) {
        if (v < 0.0 || v >= 1000.0) throw Error("OGTT value outside [0, 1000)");
    }
}

void MonitoringWeek::validate() const {
    if (week_index < 1) throw Error("week_index must be positive");
    if (readings.empty()) throw Error("readings must be non-empty");
    if (readings.size() < 5 || readings.size() > 7) {
        throw Error("readings length must be 5-7");
    }
    for (int r : readings) {
        if (r < 40 || r > 500) throw Error("reading outside physiological band [40, 500]");
    }
}

void RetinalCase::validate() const {
    if (hba1c < 0.0 || hba1c >= 25.0) throw Error("hba1c outside [0, 25)");
}

void SymptomCase::validate() const {
    if (age < 18 || age > 90) throw Error("age outside [18, 90]");
    if (bmi < 15.0 || bmi > 60.0) throw Error("bmi outside [15, 60]");
}

void Adjudication::validate(Scenario scenario) const {
    const bool monitoring = scenario == Scenario::monitoring;
    if (monitoring) {
        if (!week || !alert_level) {
            throw Error("monitoring adjudication requires week and alert_level");
        }
        if (*week < 1) throw Error("week must be positive");
    } else if (week || alert_level) {
        throw Error("week/alert_level only valid for monitoring scenario");
    }
}

bool payload_matches_scenario(const CasePayload& payload, Scenario scenario) {
    return payload.index() == static_cast<std::size_t>(scenario);
}

std::string format_quantity(double value) {
    long long tenths = std::llround(value * 10.0);
    std::string sign = tenths < 0 ? "-" : "";
    if (tenths < 0) tenths = -tenths;
    std::string whole = std::to_string(tenths / 10);
    if (tenths % 10 == 0) return sign + whole;
    return sign + whole + "." + std::to_string(tenths % 10);
}

void CaseRecord::validate() const {
    if (case_id.empty()) throw Error("case_id must be non-empty");
    if (!payload_matches_scenario(payload, scenario)) {
        std::ostringstream msg;
        msg << "case " << case_id << ": payload does not match scenario "
            << to_string(scenario);
        throw DispatchError(msg.str());
    }
    std::visit([](const auto& p) { p.validate(); }, payload);
    ground_truth.validate(scenario);
}

}  // namespace diabench
