#ifndef DIABENCH_DOMAIN_HPP
#define DIABENCH_DOMAIN_HPP

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace diabench {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unknown enum spelling or criterion tag outside the closed registry.
struct RegistryError : Error {
    using Error::Error;
};

/// Scenario/payload mismatch when adjudicating or rendering a case.
struct DispatchError : Error {
    using Error::Error;
};

/// Violated operation precondition (unconfirmed fasting, too few readings).
struct PreconditionError : Error {
    using Error::Error;
};

/// Invalid configuration or command usage (CLI maps this to exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// Corpus and responses disagree on which cases exist.
struct CardinalityError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

enum class Scenario { symptoms, labs, gdm, monitoring, multimodal };

enum class Sex { male, female };

/// Ordered: normal < prediabetes < diabetes.
enum class GlycemiaClass { normal, prediabetes, diabetes };

/// Ordered: none < warning < alert.
enum class AlertLevel { none, warning, alert };

/// Ordered by severity.
enum class RetinopathyStage {
    no_retinopathy,
    mild_retinopathy,
    moderate_retinopathy,
    severe_retinopathy
};

enum class Suspicion { low, moderate, high };

enum class Symptom {
    frequent_urination,
    excessive_thirst,
    fatigue,
    blurred_vision,
    recurrent_infections,
    weight_loss,
    nausea
};

enum class RiskFactor {
    obesity,
    sedentary_lifestyle,
    family_history,
    hypertension,
    smoker
};

enum class LesionFinding {
    microaneurysms,
    few_hemorrhages,
    extensive_hemorrhages,
    cotton_wool_spots,
    neovascularization
};

enum class RecommendedTest { fpg, hba1c, urinalysis };

/// Canonical classification labels shared by oracle, model outputs and scorer.
enum class Label {
    normal,
    prediabetes,
    diabetes,
    gestational_diabetes,
    no_retinopathy,
    mild_retinopathy,
    moderate_retinopathy,
    severe_retinopathy,
    triage_low,
    triage_moderate,
    triage_high
};

/// Closed registry of criterion tags. The string renderings are byte-exact
/// and are a public, versioned contract (see docs/schema.md).
enum class CriterionTag {
    fpg_ge_126,    // "FPG_>=126"
    a1c_ge_6_5,    // "A1c_>=6.5"
    fpg_100_125,   // "FPG_100_125"
    a1c_5_7_6_4,   // "A1c_5.7_6.4"
    fpg_ge_92,     // "FPG_>=92"
    ogtt_1h_ge_180,// "OGTT_1h_>=180"
    ogtt_2h_ge_153,// "OGTT_2h_>=153"
    a1c_ge_7,      // "A1c_>=7"
    a1c_ge_9,      // "A1c_>=9"
    microaneurysms,// "microaneurysms"
    retinal_lesions// "retinal_lesions"
};

inline constexpr int kCriterionTagCount = 11;

// ---------------------------------------------------------------------------
// String renderings (each enumeration round-trips bijectively)
// ---------------------------------------------------------------------------

std::string_view to_string(Scenario s);
std::string_view to_string(Sex s);
std::string_view to_string(GlycemiaClass c);
std::string_view to_string(AlertLevel a);
std::string_view to_string(RetinopathyStage r);
std::string_view to_string(Suspicion s);
std::string_view to_string(Symptom s);
std::string_view to_string(RiskFactor r);
std::string_view to_string(LesionFinding f);
std::string_view to_string(RecommendedTest t);
std::string_view to_string(Label l);

std::optional<Scenario> parse_scenario(std::string_view s);
std::optional<Sex> parse_sex(std::string_view s);
std::optional<GlycemiaClass> parse_glycemia_class(std::string_view s);
std::optional<AlertLevel> parse_alert_level(std::string_view s);
std::optional<RetinopathyStage> parse_retinopathy_stage(std::string_view s);
std::optional<Suspicion> parse_suspicion(std::string_view s);
std::optional<Symptom> parse_symptom(std::string_view s);
std::optional<RiskFactor> parse_risk_factor(std::string_view s);
std::optional<LesionFinding> parse_lesion_finding(std::string_view s);
std::optional<RecommendedTest> parse_recommended_test(std::string_view s);
std::optional<Label> parse_label(std::string_view s);

/// Byte-exact canonical spelling of a registry tag.
/// Throws RegistryError for values outside the registry.
std::string_view render_tag(CriterionTag tag);
std::optional<CriterionTag> parse_tag(std::string_view s);

/// All registry tags in canonical (registry) order.
const std::vector<CriterionTag>& criterion_registry();

/// All canonical labels.
const std::vector<Label>& label_registry();

// ---------------------------------------------------------------------------
// Severity ranks (0-based, strictly monotone with the declared orders)
// ---------------------------------------------------------------------------

int severity_rank(GlycemiaClass c);
int severity_rank(AlertLevel a);
int severity_rank(RetinopathyStage r);

// ---------------------------------------------------------------------------
// Threshold configuration
// ---------------------------------------------------------------------------

/// Every ADA cutoff used by the oracle, in mg/dL and percent.
struct ThresholdConfig {
    double fpg_pre = 100.0;
    double fpg_dm = 126.0;
    double a1c_pre = 5.7;
    double a1c_dm = 6.5;
    double gdm_fasting = 92.0;
    double gdm_1h = 180.0;
    double gdm_2h = 153.0;
    double retino_a1c_mild_tag = 7.0;
    double retino_a1c_severe_tag = 9.0;

    /// Throws ConfigError if orderings or positivity are violated.
    void validate() const;

    bool operator==(const ThresholdConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario payloads
// ---------------------------------------------------------------------------

struct GlycemicMarkers {
    double fpg = 0.0;
    double hba1c = 0.0;
    bool fasting_confirmed = true;

    void validate() const;
    bool operator==(const GlycemicMarkers&) const = default;
};

struct OgttResult {
    double fasting = 0.0;
    double one_hour = 0.0;
    double two_hour = 0.0;

    void validate() const;
    bool operator==(const OgttResult&) const = default;
};

struct MonitoringWeek {
    int week_index = 1;
    std::vector<int> readings;  // daily fasting glucose, mg/dL

    void validate() const;
    bool operator==(const MonitoringWeek&) const = default;
};

struct RetinalCase {
    double hba1c = 0.0;
    std::set<LesionFinding> findings;

    void validate() const;
    bool operator==(const RetinalCase&) const = default;
};

struct SymptomCase {
    int age = 18;
    Sex sex = Sex::male;
    double bmi = 22.0;
    std::set<Symptom> symptoms;
    std::set<RiskFactor> risk_factors;

    void validate() const;
    bool operator==(const SymptomCase&) const = default;
};

struct TriageResult {
    Suspicion suspicion = Suspicion::low;
    bool labs_recommended = false;
    std::vector<RecommendedTest> recommended_tests;

    bool operator==(const TriageResult&) const = default;
};

// ---------------------------------------------------------------------------
// Adjudication and case records
// ---------------------------------------------------------------------------

/// Canonical structured summary exchanged between oracle, models and scorer.
/// week and alert_level are present iff the scenario is monitoring.
struct Adjudication {
    Label classification = Label::normal;
    std::set<CriterionTag> criteria_triggered;
    std::string next_steps;
    std::optional<int> week;
    std::optional<AlertLevel> alert_level;

    void validate(Scenario scenario) const;
    bool operator==(const Adjudication&) const = default;
};

/// Cosmetic demographics attached to lab/OGTT cases for prompt realism.
/// Never consulted by the oracle.
struct Demographics {
    int age = 30;
    Sex sex = Sex::male;
    double bmi = 25.0;

    bool operator==(const Demographics&) const = default;
};

using CasePayload =
    std::variant<SymptomCase, GlycemicMarkers, OgttResult, MonitoringWeek, RetinalCase>;

/// Payload variant index corresponding to each scenario.
bool payload_matches_scenario(const CasePayload& payload, Scenario scenario);

/// Renders a clinical quantity the way the source tables print it: integral
/// values without a decimal point ("132"), otherwise one decimal ("6.9").
/// Values are one-decimal by construction throughout the harness.
std::string format_quantity(double value);

struct CaseRecord {
    std::string case_id;
    Scenario scenario = Scenario::labs;
    CasePayload payload;
    std::optional<Demographics> demographics;
    Adjudication ground_truth;

    /// Checks payload/scenario agreement plus payload invariants.
    void validate() const;
    bool operator==(const CaseRecord&) const = default;
};

}  // namespace diabench

#endif  // DIABENCH_DOMAIN_HPP
