#include "diabench/promptkit.hpp"

#include <fstream>
#include <sstream>

#include "diabench/fnv.hpp"

namespace diabench::promptkit {
namespace {

// v1 template assets. templates/ in the repository mirrors these exactly;
// a unit test keeps the two in sync.

constexpr std::string_view kSymptomsSystem =
    "You are a clinical decision-support assistant. Follow ADA 2025 diagnostic "
    "thresholds.";
constexpr std::string_view kSymptomsUser =
    "Patient ID: {id}. Age {age}, {sex}. BMI: {bmi}. Symptoms: {symptoms}. "
    "Risk factors: {risk_factors}.\n"
    "Task: (1) Classify diabetes suspicion as {Low | Moderate | High}. "
    "(2) Provide a 2-3 sentence rationale. "
    "(3) Generate a patient-friendly explanation. "
    "(4) Output a JSON summary with fields classification, criteria_triggered, and "
    "next_steps, where classification is one of "
    "{triage_low | triage_moderate | triage_high}.";

constexpr std::string_view kLabsSystem =
    "You are a clinical decision-support assistant. Use ADA 2025 diagnostic "
    "thresholds for diabetes.";
constexpr std::string_view kLabsUser =
    "Patient ID: {id}. Confirmed fasting status. Labs: FPG = {fpg} mg/dL; "
    "HbA1c = {hba1c}%.\n"
    "Task: (1) Classify as {Normal | Prediabetes | Diabetes} strictly per ADA 2025 "
    "thresholds. (2) Provide a 2-3 sentence rationale. "
    "(3) Generate a patient-friendly explanation. "
    "(4) Output a JSON summary with fields classification, criteria_triggered, "
    "next_steps.";

constexpr std::string_view kGdmSystem =
    "You are a decision-support tool for obstetric diabetes screening. Apply ADA "
    "2025 OGTT thresholds for gestational diabetes.";
constexpr std::string_view kGdmUser =
    "Patient ID: {id}. 75g OGTT results: Fasting = {fasting} mg/dL; "
    "1-hour = {one_hour} mg/dL; 2-hour = {two_hour} mg/dL.\n"
    "Task: (1) Classify as {Normal | Gestational Diabetes}. "
    "(2) Provide 2-3 sentence rationale. "
    "(3) Create a short patient education message. "
    "(4) Return a JSON summary with classification, criteria_triggered, and "
    "next_steps.";

constexpr std::string_view kMonitoringSystem =
    "You are a diabetes monitoring assistant. Interpret fasting glucose trends "
    "using ADA 2025 thresholds. Issue alerts if values are persistently elevated.";
constexpr std::string_view kMonitoringUser =
    "Patient ID: {id}. Fasting glucose values for week {week}: {readings}.\n"
    "Task: (1) Summarize the weekly pattern. "
    "(2) Assign alert level: {None | Warning | Alert}. "
    "(3) Provide 2-3 sentence rationale. "
    "(4) Generate patient-friendly message. "
    "(5) Return JSON summary with fields week, alert_level, classification, and "
    "next_steps.";

constexpr std::string_view kMultimodalSystem =
    "You are a multimodal clinical decision-support assistant. Integrate retinal "
    "image findings with HbA1c values to assess risk of diabetic complications.";
constexpr std::string_view kMultimodalUser =
    "Patient ID: {id}. Retinal exam findings: {findings}. HbA1c = {hba1c}%.\n"
    "Task: (1) Classify diabetic retinopathy (none, mild, moderate, severe). "
    "(2) Provide rationale linking imaging and HbA1c. "
    "(3) Recommend next steps. "
    "(4) Generate a patient message. "
    "(5) Return JSON summary with fields classification, criteria_triggered, and "
    "next_steps.";

std::string read_template_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open template: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) throw ConfigError("template is empty: " + path.string());
    return text;
}

template <typename T>
std::string join_phrases(const std::set<T>& items, std::string_view if_empty) {
    if (items.empty()) return std::string(if_empty);
    std::string out;
    for (T item : items) {
        if (!out.empty()) out += ", ";
        out += human_phrase(item);
    }
    return out;
}

std::string capitalized_sex(Sex sex) {
    return sex == Sex::male ? "Male" : "Female";
}

}  // namespace

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet instance = [] {
        TemplateSet t;
        t.system_ = {std::string(kSymptomsSystem), std::string(kLabsSystem),
                     std::string(kGdmSystem), std::string(kMonitoringSystem),
                     std::string(kMultimodalSystem)};
        t.user_ = {std::string(kSymptomsUser), std::string(kLabsUser),
                   std::string(kGdmUser), std::string(kMonitoringUser),
                   std::string(kMultimodalUser)};
        t.version_ = kBuiltinTemplateVersion;
        return t;
    }();
    return instance;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    TemplateSet t;
    std::string combined;
    for (int i = 0; i < 5; ++i) {
        auto scenario = static_cast<Scenario>(i);
        auto stem = std::string(to_string(scenario));
        t.system_[static_cast<std::size_t>(i)] =
            read_template_file(dir / (stem + ".system.txt"));
        t.user_[static_cast<std::size_t>(i)] =
            read_template_file(dir / (stem + ".user.txt"));
        combined += t.system_[static_cast<std::size_t>(i)];
        combined += '\x1f';
        combined += t.user_[static_cast<std::size_t>(i)];
        combined += '\x1f';
    }
    if (combined == [] {
            std::string builtin_combined;
            const TemplateSet& b = builtin();
            for (int i = 0; i < 5; ++i) {
                auto s = static_cast<Scenario>(i);
                builtin_combined += b.system_text(s);
                builtin_combined += '\x1f';
                builtin_combined += b.user_template(s);
                builtin_combined += '\x1f';
            }
            return builtin_combined;
        }()) {
        t.version_ = kBuiltinTemplateVersion;
    } else {
        t.version_ = "custom-" + fnv1a_hex(combined);
    }
    return t;
}

const std::string& TemplateSet::system_text(Scenario scenario) const {
    return system_[static_cast<std::size_t>(scenario)];
}

const std::string& TemplateSet::user_template(Scenario scenario) const {
    return user_[static_cast<std::size_t>(scenario)];
}

std::string substitute(std::string_view text,
                       const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t open = text.find('{', pos);
        if (open == std::string_view::npos) {
            out += text.substr(pos);
            break;
        }
        std::size_t close = text.find('}', open + 1);
        if (close == std::string_view::npos) {
            out += text.substr(pos);
            break;
        }
        out += text.substr(pos, open - pos);
        auto key = std::string(text.substr(open + 1, close - open - 1));
        auto it = values.find(key);
        if (it != values.end()) {
            out += it->second;
        } else {
            out += text.substr(open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

PromptBundle render(const CaseRecord& record, const TemplateSet& templates) {
    if (!payload_matches_scenario(record.payload, record.scenario)) {
        throw DispatchError("case " + record.case_id +
                            ": payload does not match scenario");
    }

    std::map<std::string, std::string> values;
    values["id"] = record.case_id;

    switch (record.scenario) {
        case Scenario::symptoms: {
            const auto& c = std::get<SymptomCase>(record.payload);
            values["age"] = std::to_string(c.age);
            values["sex"] = capitalized_sex(c.sex);
            values["bmi"] = format_quantity(c.bmi);
            values["symptoms"] = join_phrases(c.symptoms, "none reported");
            values["risk_factors"] = join_phrases(c.risk_factors, "none reported");
            break;
        }
        case Scenario::labs: {
            const auto& m = std::get<GlycemicMarkers>(record.payload);
            values["fpg"] = format_quantity(m.fpg);
            values["hba1c"] = format_quantity(m.hba1c);
            break;
        }
        case Scenario::gdm: {
            const auto& o = std::get<OgttResult>(record.payload);
            values["fasting"] = format_quantity(o.fasting);
            values["one_hour"] = format_quantity(o.one_hour);
            values["two_hour"] = format_quantity(o.two_hour);
            break;
        }
        case Scenario::monitoring: {
            const auto& w = std::get<MonitoringWeek>(record.payload);
            values["week"] = std::to_string(w.week_index);
            std::string readings;
            for (int r : w.readings) {
                if (!readings.empty()) readings += ", ";
                readings += std::to_string(r);
            }
            values["readings"] = readings;
            break;
        }
        case Scenario::multimodal: {
            const auto& r = std::get<RetinalCase>(record.payload);
            values["hba1c"] = format_quantity(r.hba1c);
            values["findings"] = join_phrases(r.findings, "normal retina, no lesions");
            break;
        }
    }

    PromptBundle bundle;
    bundle.scenario = record.scenario;
    bundle.case_id = record.case_id;
    bundle.system = templates.system_text(record.scenario);
    bundle.user = substitute(templates.user_template(record.scenario), values);
    return bundle;
}

std::string schema_instruction(Scenario scenario, const TemplateSet& templates) {
    const std::string& user = templates.user_template(scenario);
    std::size_t task = user.find("Task:");
    return task == std::string::npos ? user : user.substr(task);
}

std::string_view human_phrase(Symptom s) {
    switch (s) {
        case Symptom::frequent_urination: return "frequent urination";
        case Symptom::excessive_thirst: return "excessive thirst";
        case Symptom::fatigue: return "fatigue";
        case Symptom::blurred_vision: return "blurred vision";
        case Symptom::recurrent_infections: return "recurrent infections";
        case Symptom::weight_loss: return "weight loss";
        case Symptom::nausea: return "nausea";
    }
    throw RegistryError("symptom out of range");
}

std::string_view human_phrase(RiskFactor r) {
    switch (r) {
        case RiskFactor::obesity: return "obesity";
        case RiskFactor::sedentary_lifestyle: return "sedentary lifestyle";
        case RiskFactor::family_history: return "family history of diabetes";
        case RiskFactor::hypertension: return "hypertension";
        case RiskFactor::smoker: return "smoker";
    }
    throw RegistryError("risk factor out of range");
}

std::string_view human_phrase(LesionFinding f) {
    switch (f) {
        case LesionFinding::microaneurysms: return "microaneurysms";
        case LesionFinding::few_hemorrhages: return "few hemorrhages";
        case LesionFinding::extensive_hemorrhages: return "extensive hemorrhages";
        case LesionFinding::cotton_wool_spots: return "cotton wool spots";
        case LesionFinding::neovascularization: return "neovascularization";
    }
    throw RegistryError("lesion finding out of range");
}

namespace {

template <typename T, typename PhraseFn>
std::optional<T> phrase_lookup(std::string_view phrase, int count, PhraseFn&& fn) {
    for (int i = 0; i < count; ++i) {
        auto value = static_cast<T>(i);
        if (fn(value) == phrase) return value;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Symptom> symptom_from_phrase(std::string_view phrase) {
    return phrase_lookup<Symptom>(phrase, 7,
                                  [](Symptom s) { return human_phrase(s); });
}

std::optional<RiskFactor> risk_factor_from_phrase(std::string_view phrase) {
    return phrase_lookup<RiskFactor>(phrase, 5,
                                     [](RiskFactor r) { return human_phrase(r); });
}

std::optional<LesionFinding> lesion_from_phrase(std::string_view phrase) {
    return phrase_lookup<LesionFinding>(phrase, 5,
                                        [](LesionFinding f) { return human_phrase(f); });
}

}  // namespace diabench::promptkit
