#include "diabench/jsonl.hpp"

#include <fstream>
#include <sstream>

namespace diabench::jsonl {
namespace {

std::string want_string(const ojson& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw Error(std::string("missing or non-string field: ") + key);
    }
    return j.at(key).get<std::string>();
}

double want_number(const ojson& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw Error(std::string("missing or non-numeric field: ") + key);
    }
    return j.at(key).get<double>();
}

template <typename T, typename ParseFn>
T parse_or_throw(ParseFn&& fn, const std::string& raw, const char* what) {
    auto parsed = fn(raw);
    if (!parsed) throw RegistryError(std::string("unknown ") + what + ": " + raw);
    return *parsed;
}

ojson payload_to_json(const CaseRecord& record) {
    ojson p;
    switch (record.scenario) {
        case Scenario::symptoms: {
            const auto& c = std::get<SymptomCase>(record.payload);
            p["age"] = c.age;
            p["sex"] = to_string(c.sex);
            p["bmi"] = c.bmi;
            ojson symptoms = ojson::array();
            for (Symptom s : c.symptoms) symptoms.push_back(to_string(s));
            p["symptoms"] = std::move(symptoms);
            ojson risks = ojson::array();
            for (RiskFactor r : c.risk_factors) risks.push_back(to_string(r));
            p["risk_factors"] = std::move(risks);
            break;
        }
        case Scenario::labs: {
            const auto& m = std::get<GlycemicMarkers>(record.payload);
            p["fpg"] = m.fpg;
            p["hba1c"] = m.hba1c;
            p["fasting_confirmed"] = m.fasting_confirmed;
            break;
        }
        case Scenario::gdm: {
            const auto& o = std::get<OgttResult>(record.payload);
            p["fasting"] = o.fasting;
            p["one_hour"] = o.one_hour;
            p["two_hour"] = o.two_hour;
            break;
        }
        case Scenario::monitoring: {
            const auto& w = std::get<MonitoringWeek>(record.payload);
            p["week_index"] = w.week_index;
            p["readings"] = w.readings;
            break;
        }
        case Scenario::multimodal: {
            const auto& r = std::get<RetinalCase>(record.payload);
            p["hba1c"] = r.hba1c;
            ojson findings = ojson::array();
            for (LesionFinding f : r.findings) findings.push_back(to_string(f));
            p["findings"] = std::move(findings);
            break;
        }
    }
    if (record.demographics) {
        p["age"] = record.demographics->age;
        p["sex"] = to_string(record.demographics->sex);
        p["bmi"] = record.demographics->bmi;
    }
    return p;
}

CasePayload payload_from_json(const ojson& p, Scenario scenario) {
    switch (scenario) {
        case Scenario::symptoms: {
            SymptomCase c;
            c.age = static_cast<int>(want_number(p, "age"));
            c.sex = parse_or_throw<Sex>(parse_sex, want_string(p, "sex"), "sex");
            c.bmi = want_number(p, "bmi");
            for (const auto& s : p.at("symptoms")) {
                c.symptoms.insert(parse_or_throw<Symptom>(
                    parse_symptom, s.get<std::string>(), "symptom"));
            }
            for (const auto& r : p.at("risk_factors")) {
                c.risk_factors.insert(parse_or_throw<RiskFactor>(
                    parse_risk_factor, r.get<std::string>(), "risk factor"));
            }
            return c;
        }
        case Scenario::labs: {
            GlycemicMarkers m;
            m.fpg = want_number(p, "fpg");
            m.hba1c = want_number(p, "hba1c");
            m.fasting_confirmed = p.value("fasting_confirmed", true);
            return m;
        }
        case Scenario::gdm: {
            OgttResult o;
            o.fasting = want_number(p, "fasting");
            o.one_hour = want_number(p, "one_hour");
            o.two_hour = want_number(p, "two_hour");
            return o;
        }
        case Scenario::monitoring: {
            MonitoringWeek w;
            w.week_index = static_cast<int>(want_number(p, "week_index"));
            for (const auto& r : p.at("readings")) w.readings.push_back(r.get<int>());
            return w;
        }
        case Scenario::multimodal: {
            RetinalCase r;
            r.hba1c = want_number(p, "hba1c");
            for (const auto& f : p.at("findings")) {
                r.findings.insert(parse_or_throw<LesionFinding>(
                    parse_lesion_finding, f.get<std::string>(), "lesion finding"));
            }
            return r;
        }
    }
    throw DispatchError("unknown scenario");
}

}  // namespace

ojson to_json(const ThresholdConfig& cfg) {
    ojson j;
    j["fpg_pre"] = cfg.fpg_pre;
    j["fpg_dm"] = cfg.fpg_dm;
    j["a1c_pre"] = cfg.a1c_pre;
    j["a1c_dm"] = cfg.a1c_dm;
    j["gdm_fasting"] = cfg.gdm_fasting;
    j["gdm_1h"] = cfg.gdm_1h;
    j["gdm_2h"] = cfg.gdm_2h;
    j["retino_a1c_mild_tag"] = cfg.retino_a1c_mild_tag;
    j["retino_a1c_severe_tag"] = cfg.retino_a1c_severe_tag;
    return j;
}

ThresholdConfig threshold_config_from_json(const ojson& j) {
    ThresholdConfig cfg;
    cfg.fpg_pre = want_number(j, "fpg_pre");
    cfg.fpg_dm = want_number(j, "fpg_dm");
    cfg.a1c_pre = want_number(j, "a1c_pre");
    cfg.a1c_dm = want_number(j, "a1c_dm");
    cfg.gdm_fasting = want_number(j, "gdm_fasting");
    cfg.gdm_1h = want_number(j, "gdm_1h");
    cfg.gdm_2h = want_number(j, "gdm_2h");
    cfg.retino_a1c_mild_tag = want_number(j, "retino_a1c_mild_tag");
    cfg.retino_a1c_severe_tag = want_number(j, "retino_a1c_severe_tag");
    cfg.validate();
    return cfg;
}

ojson to_json(const Adjudication& adj) {
    ojson j;
    j["classification"] = to_string(adj.classification);
    ojson tags = ojson::array();
    for (CriterionTag t : adj.criteria_triggered) tags.push_back(render_tag(t));
    j["criteria_triggered"] = std::move(tags);
    j["next_steps"] = adj.next_steps;
    if (adj.week) j["week"] = *adj.week;
    if (adj.alert_level) j["alert_level"] = to_string(*adj.alert_level);
    return j;
}

Adjudication adjudication_from_json(const ojson& j, Scenario scenario) {
    Adjudication adj;
    adj.classification =
        parse_or_throw<Label>(parse_label, want_string(j, "classification"), "label");
    if (j.contains("criteria_triggered")) {
        for (const auto& t : j.at("criteria_triggered")) {
            adj.criteria_triggered.insert(parse_or_throw<CriterionTag>(
                parse_tag, t.get<std::string>(), "criterion tag"));
        }
    }
    adj.next_steps = j.value("next_steps", "");
    if (j.contains("week")) adj.week = j.at("week").get<int>();
    if (j.contains("alert_level")) {
        adj.alert_level = parse_or_throw<AlertLevel>(
            parse_alert_level, want_string(j, "alert_level"), "alert level");
    }
    adj.validate(scenario);
    return adj;
}

ojson to_json(const CaseRecord& record) {
    ojson j;
    j["case_id"] = record.case_id;
    j["scenario"] = to_string(record.scenario);
    j["payload"] = payload_to_json(record);
    j["ground_truth"] = to_json(record.ground_truth);
    return j;
}

CaseRecord case_record_from_json(const ojson& j) {
    CaseRecord record;
    record.case_id = want_string(j, "case_id");
    record.scenario = parse_or_throw<Scenario>(
        parse_scenario, want_string(j, "scenario"), "scenario");
    const ojson& p = j.at("payload");
    record.payload = payload_from_json(p, record.scenario);
    if ((record.scenario == Scenario::labs || record.scenario == Scenario::gdm) &&
        p.contains("age")) {
        Demographics d;
        d.age = static_cast<int>(want_number(p, "age"));
        d.sex = parse_or_throw<Sex>(parse_sex, want_string(p, "sex"), "sex");
        d.bmi = want_number(p, "bmi");
        record.demographics = d;
    }
    record.ground_truth = adjudication_from_json(j.at("ground_truth"), record.scenario);
    record.validate();
    return record;
}

std::string serialize_corpus(const Corpus& corpus) {
    ojson meta;
    meta["record"] = "meta";
    meta["format"] = corpus.meta.format;
    meta["generator"] = corpus.meta.generator;
    meta["generator_version"] = corpus.meta.generator_version;
    meta["seed"] = corpus.meta.seed;
    if (!corpus.meta.scenario.empty()) meta["scenario"] = corpus.meta.scenario;
    meta["count"] = corpus.records.size();
    meta["thresholds"] = to_json(corpus.meta.thresholds);

    std::string out = meta.dump();
    out += '\n';
    for (const CaseRecord& record : corpus.records) {
        out += to_json(record).dump();
        out += '\n';
    }
    return out;
}

Corpus parse_corpus(std::istream& in) {
    Corpus corpus;
    bool saw_meta = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw IoError("corpus line " + std::to_string(line_no) +
                          " is not valid JSON: " + ex.what());
        }
        try {
            if (j.value("record", "") == "meta") {
                corpus.meta.format = j.value("format", std::string(kCorpusFormat));
                corpus.meta.generator = j.value("generator", "");
                corpus.meta.generator_version = j.value("generator_version", "");
                corpus.meta.seed = j.value("seed", std::uint64_t{0});
                corpus.meta.scenario = j.value("scenario", "");
                if (j.contains("thresholds")) {
                    corpus.meta.thresholds =
                        threshold_config_from_json(j.at("thresholds"));
                }
                saw_meta = true;
                continue;
            }
            corpus.records.push_back(case_record_from_json(j));
        } catch (const nlohmann::json::exception& ex) {
            throw IoError("corpus line " + std::to_string(line_no) +
                          " has an invalid shape: " + ex.what());
        }
    }
    if (!saw_meta) throw IoError("corpus has no meta header line");
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << serialize_corpus(corpus);
    if (!out) throw IoError("write failed: " + path.string());
}

Corpus read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus: " + path.string());
    return parse_corpus(in);
}

}  // namespace diabench::jsonl
