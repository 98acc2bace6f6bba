#include "diabench/casegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "diabench/oracle.hpp"

namespace diabench::casegen {
namespace {

const std::vector<std::string> kLabsStrata{
    "normal", "prediabetes", "diabetes", "discordant_a1c", "discordant_fpg"};
const std::vector<std::string> kGdmStrata{"normal", "exceed_1", "exceed_2", "exceed_3"};
const std::vector<std::string> kMonitoringStrata{"normal", "prediabetes", "diabetes"};
const std::vector<std::string> kSymptomStrata{"asymptomatic", "mild", "classic"};
const std::vector<std::string> kRetinalStrata{"none", "mild", "moderate"};

int scenario_number(Scenario s) { return static_cast<int>(s) + 1; }

std::string make_case_id(Scenario scenario, std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%d-%06llu", scenario_number(scenario),
                  static_cast<unsigned long long>(index));
    return buf;
}

/// k distinct picks from pool, chosen by partial Fisher-Yates in pool order.
template <typename T>
std::vector<T> pick_subset(Rng& rng, std::vector<T> pool, std::size_t k) {
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
        auto j = static_cast<std::size_t>(
            rng.uniform(static_cast<std::int64_t>(i),
                        static_cast<std::int64_t>(pool.size()) - 1));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(std::min(k, pool.size()));
    return pool;
}

Demographics sample_demographics(Rng& rng, Scenario scenario) {
    Demographics d;
    if (scenario == Scenario::gdm) {
        d.sex = Sex::female;
        d.age = static_cast<int>(rng.uniform(18, 45));
    } else {
        d.sex = rng.uniform(0, 1) == 0 ? Sex::male : Sex::female;
        d.age = static_cast<int>(rng.uniform(18, 75));
    }
    d.bmi = rng.uniform_tenths(200, 400);
    return d;
}

}  // namespace

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw Error("empty sampling range");
    auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    auto scaled = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * range) >> 64);
    return lo + static_cast<std::int64_t>(scaled);
}

double Rng::uniform_tenths(std::int64_t lo_tenths, std::int64_t hi_tenths) {
    return static_cast<double>(uniform(lo_tenths, hi_tenths)) / 10.0;
}

const std::vector<std::string>& strata_for(Scenario scenario) {
    switch (scenario) {
        case Scenario::symptoms: return kSymptomStrata;
        case Scenario::labs: return kLabsStrata;
        case Scenario::gdm: return kGdmStrata;
        case Scenario::monitoring: return kMonitoringStrata;
        case Scenario::multimodal: return kRetinalStrata;
    }
    throw DispatchError("unknown scenario");
}

Label stratum_expected_label(Scenario scenario, const std::string& stratum) {
    switch (scenario) {
        case Scenario::symptoms:
            if (stratum == "asymptomatic") return Label::triage_low;
            if (stratum == "mild") return Label::triage_moderate;
            if (stratum == "classic") return Label::triage_high;
            break;
        case Scenario::labs:
            if (stratum == "normal") return Label::normal;
            if (stratum == "prediabetes") return Label::prediabetes;
            // Both discordant strata sit in the diabetes class.
            if (stratum == "diabetes" || stratum == "discordant_a1c" ||
                stratum == "discordant_fpg") {
                return Label::diabetes;
            }
            break;
        case Scenario::gdm:
            if (stratum == "normal") return Label::normal;
            if (stratum.rfind("exceed_", 0) == 0) return Label::gestational_diabetes;
            break;
        case Scenario::monitoring:
            if (stratum == "normal") return Label::normal;
            if (stratum == "prediabetes") return Label::prediabetes;
            if (stratum == "diabetes") return Label::diabetes;
            break;
        case Scenario::multimodal:
            if (stratum == "none") return Label::no_retinopathy;
            if (stratum == "mild") return Label::mild_retinopathy;
            if (stratum == "moderate") return Label::moderate_retinopathy;
            break;
    }
    throw ConfigError("unknown stratum '" + stratum + "' for scenario " +
                      std::string(to_string(scenario)));
}

std::vector<std::uint64_t> allocate_strata(const GenSpec& spec) {
    const auto& strata = strata_for(spec.scenario);
    if (spec.count < 1) throw ConfigError("count must be >= 1");

    std::vector<double> quotas(strata.size(), 0.0);
    if (spec.strata_quotas.empty()) {
        std::fill(quotas.begin(), quotas.end(), 1.0 / static_cast<double>(strata.size()));
    } else {
        double total = 0.0;
        for (const auto& [name, fraction] : spec.strata_quotas) {
            auto it = std::find(strata.begin(), strata.end(), name);
            if (it == strata.end()) {
                throw ConfigError("unknown stratum '" + name + "' for scenario " +
                                  std::string(to_string(spec.scenario)));
            }
            if (fraction < 0.0) throw ConfigError("quota fractions must be >= 0");
            quotas[static_cast<std::size_t>(it - strata.begin())] = fraction;
            total += fraction;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ConfigError("quota fractions must sum to 1");
        }
    }

    std::vector<std::uint64_t> alloc(strata.size(), 0);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < strata.size(); ++i) {
        alloc[i] = static_cast<std::uint64_t>(
            std::floor(quotas[i] * static_cast<double>(spec.count) + 1e-9));
        assigned += alloc[i];
    }
    // Remainder goes one each to the first positive-quota strata in declared
    // order; it never exceeds the number of such strata.
    for (std::size_t i = 0; assigned < spec.count; i = (i + 1) % strata.size()) {
        if (quotas[i] > 0.0) {
            ++alloc[i];
            ++assigned;
        }
    }
    return alloc;
}

GlycemicMarkers sample_labs(Rng& rng, const std::string& stratum) {
    GlycemicMarkers m;
    m.fasting_confirmed = true;
    // Bands straddle each ADA cutoff; thresholds themselves are inclusive.
    if (stratum == "normal") {
        m.fpg = rng.uniform_tenths(900, 990);
        m.hba1c = rng.uniform_tenths(50, 56);
    } else if (stratum == "prediabetes") {
        m.fpg = rng.uniform_tenths(1000, 1250);
        m.hba1c = rng.uniform_tenths(57, 64);
    } else if (stratum == "diabetes") {
        m.fpg = rng.uniform_tenths(1260, 1600);
        m.hba1c = rng.uniform_tenths(65, 90);
    } else if (stratum == "discordant_a1c") {
        m.fpg = rng.uniform_tenths(1000, 1250);
        m.hba1c = rng.uniform_tenths(65, 90);
    } else if (stratum == "discordant_fpg") {
        m.fpg = rng.uniform_tenths(1260, 1600);
        m.hba1c = rng.uniform_tenths(57, 64);
    } else {
        throw ConfigError("unknown labs stratum: " + stratum);
    }
    return m;
}

OgttResult sample_ogtt(Rng& rng, const std::string& stratum) {
    int exceed_count;
    if (stratum == "normal") {
        exceed_count = 0;
    } else if (stratum == "exceed_1") {
        exceed_count = 1;
    } else if (stratum == "exceed_2") {
        exceed_count = 2;
    } else if (stratum == "exceed_3") {
        exceed_count = 3;
    } else {
        throw ConfigError("unknown gdm stratum: " + stratum);
    }

    bool above[3] = {false, false, false};
    if (exceed_count == 3) {
        above[0] = above[1] = above[2] = true;
    } else if (exceed_count == 1) {
        above[rng.uniform(0, 2)] = true;
    } else if (exceed_count == 2) {
        int spared = static_cast<int>(rng.uniform(0, 2));
        for (int i = 0; i < 3; ++i) above[i] = (i != spared);
    }

    OgttResult r;
    r.fasting = static_cast<double>(above[0] ? rng.uniform(92, 100) : rng.uniform(80, 91));
    r.one_hour = static_cast<double>(above[1] ? rng.uniform(180, 200) : rng.uniform(150, 179));
    r.two_hour = static_cast<double>(above[2] ? rng.uniform(153, 170) : rng.uniform(130, 152));
    return r;
}

MonitoringWeek sample_week(Rng& rng, GlycemiaClass profile_stage, int week_index) {
    MonitoringWeek week;
    week.week_index = week_index;
    week.readings.resize(7);
    switch (profile_stage) {
        case GlycemiaClass::normal: {
            // Mostly sub-100 days with occasional borderline highs.
            auto normal_days = static_cast<std::size_t>(rng.uniform(5, 7));
            std::vector<int> positions(7);
            std::iota(positions.begin(), positions.end(), 0);
            auto borderline = pick_subset(rng, positions, 7 - normal_days);
            for (auto& r : week.readings) r = static_cast<int>(rng.uniform(95, 99));
            for (int pos : borderline) {
                week.readings[static_cast<std::size_t>(pos)] =
                    static_cast<int>(rng.uniform(100, 105));
            }
            break;
        }
        case GlycemiaClass::prediabetes:
            for (auto& r : week.readings) r = static_cast<int>(rng.uniform(110, 125));
            break;
        case GlycemiaClass::diabetes:
            for (auto& r : week.readings) r = static_cast<int>(rng.uniform(130, 145));
            break;
    }
    return week;
}

SymptomCase sample_symptom_case(Rng& rng, const std::string& stratum) {
    SymptomCase c;
    c.age = static_cast<int>(rng.uniform(18, 75));
    c.sex = rng.uniform(0, 1) == 0 ? Sex::male : Sex::female;
    c.bmi = rng.uniform_tenths(220, 400);

    const std::vector<Symptom> all_symptoms{
        Symptom::frequent_urination, Symptom::excessive_thirst, Symptom::fatigue,
        Symptom::blurred_vision,     Symptom::recurrent_infections,
        Symptom::weight_loss,        Symptom::nausea};
    const std::vector<RiskFactor> all_risks{
        RiskFactor::obesity, RiskFactor::sedentary_lifestyle, RiskFactor::family_history,
        RiskFactor::hypertension, RiskFactor::smoker};

    if (stratum == "asymptomatic") {
        for (RiskFactor r : pick_subset(rng, all_risks,
                                        static_cast<std::size_t>(rng.uniform(0, 2)))) {
            c.risk_factors.insert(r);
        }
    } else if (stratum == "mild") {
        auto k = static_cast<std::size_t>(rng.uniform(1, 2));
        std::vector<Symptom> pool = all_symptoms;
        if (k == 2) {
            // Two symptoms including weight loss would escalate to high.
            pool.erase(std::remove(pool.begin(), pool.end(), Symptom::weight_loss),
                       pool.end());
        }
        for (Symptom s : pick_subset(rng, pool, k)) c.symptoms.insert(s);
        for (RiskFactor r : pick_subset(rng, all_risks,
                                        static_cast<std::size_t>(rng.uniform(0, 2)))) {
            c.risk_factors.insert(r);
        }
    } else if (stratum == "classic") {
        c.symptoms.insert(rng.uniform(0, 1) == 0 ? Symptom::frequent_urination
                                                 : Symptom::excessive_thirst);
        std::vector<Symptom> pool = all_symptoms;
        pool.erase(std::remove_if(pool.begin(), pool.end(),
                                  [&](Symptom s) { return c.symptoms.count(s) > 0; }),
                   pool.end());
        auto extra = static_cast<std::size_t>(rng.uniform(2, 4));
        for (Symptom s : pick_subset(rng, pool, extra)) c.symptoms.insert(s);
        for (RiskFactor r : pick_subset(rng, all_risks,
                                        static_cast<std::size_t>(rng.uniform(1, 3)))) {
            c.risk_factors.insert(r);
        }
    } else {
        throw ConfigError("unknown symptoms stratum: " + stratum);
    }
    return c;
}

RetinalCase sample_retinal_case(Rng& rng, const std::string& stratum) {
    RetinalCase r;
    if (stratum == "none") {
        r.hba1c = rng.uniform_tenths(55, 65);
    } else if (stratum == "mild") {
        // Band top 8.9 keeps the stratum inside the A1c_>=7 tag range;
        // 9.0 belongs to the moderate band floor.
        r.hba1c = rng.uniform_tenths(75, 89);
        switch (rng.uniform(0, 2)) {
            case 0: r.findings = {LesionFinding::microaneurysms}; break;
            case 1: r.findings = {LesionFinding::few_hemorrhages}; break;
            default:
                r.findings = {LesionFinding::microaneurysms,
                              LesionFinding::few_hemorrhages};
        }
    } else if (stratum == "moderate") {
        r.hba1c = rng.uniform_tenths(90, 110);
        switch (rng.uniform(0, 2)) {
            case 0: r.findings.insert(LesionFinding::cotton_wool_spots); break;
            case 1: r.findings.insert(LesionFinding::extensive_hemorrhages); break;
            default:
                r.findings.insert(LesionFinding::cotton_wool_spots);
                r.findings.insert(LesionFinding::extensive_hemorrhages);
        }
        if (rng.uniform(0, 1) == 1) r.findings.insert(LesionFinding::microaneurysms);
        if (rng.uniform(0, 1) == 1) r.findings.insert(LesionFinding::few_hemorrhages);
    } else {
        throw ConfigError("unknown multimodal stratum: " + stratum);
    }
    return r;
}

std::vector<CaseRecord> generate(const GenSpec& spec, const ThresholdConfig& cfg) {
    cfg.validate();
    const auto& strata = strata_for(spec.scenario);
    const auto alloc = allocate_strata(spec);

    Rng rng(spec.seed);
    std::vector<CaseRecord> records;
    records.reserve(spec.count);
    std::uint64_t sequence = 0;

    for (std::size_t s = 0; s < strata.size(); ++s) {
        for (std::uint64_t i = 0; i < alloc[s]; ++i) {
            CaseRecord record;
            record.scenario = spec.scenario;
            record.case_id = make_case_id(spec.scenario, sequence);
            switch (spec.scenario) {
                case Scenario::symptoms:
                    record.payload = sample_symptom_case(rng, strata[s]);
                    break;
                case Scenario::labs:
                    record.payload = sample_labs(rng, strata[s]);
                    record.demographics = sample_demographics(rng, spec.scenario);
                    break;
                case Scenario::gdm:
                    record.payload = sample_ogtt(rng, strata[s]);
                    record.demographics = sample_demographics(rng, spec.scenario);
                    break;
                case Scenario::monitoring: {
                    GlycemiaClass stage =
                        *parse_glycemia_class(strata[s]);
                    record.payload =
                        sample_week(rng, stage, static_cast<int>(sequence) + 1);
                    break;
                }
                case Scenario::multimodal:
                    record.payload = sample_retinal_case(rng, strata[s]);
                    break;
            }
            record.ground_truth = oracle::adjudicate(record, cfg).adjudication;
            record.validate();
            records.push_back(std::move(record));
            ++sequence;
        }
    }
    return records;
}

jsonl::Corpus generate_corpus(const GenSpec& spec, const ThresholdConfig& cfg) {
    jsonl::Corpus corpus;
    corpus.meta.seed = spec.seed;
    corpus.meta.scenario = to_string(spec.scenario);
    corpus.meta.thresholds = cfg;
    corpus.records = generate(spec, cfg);
    return corpus;
}

std::vector<CaseRecord> paper_fixture_corpus() {
    const ThresholdConfig cfg;
    std::vector<CaseRecord> records;

    auto add = [&](std::string id, Scenario scenario, CasePayload payload) {
        CaseRecord record;
        record.case_id = std::move(id);
        record.scenario = scenario;
        record.payload = std::move(payload);
        record.ground_truth = oracle::adjudicate(record, cfg).adjudication;
        record.validate();
        records.push_back(std::move(record));
    };

    add("P004", Scenario::labs, GlycemicMarkers{132.0, 6.9, true});
    add("P005", Scenario::labs, GlycemicMarkers{110.0, 5.8, true});
    add("P008", Scenario::labs, GlycemicMarkers{96.0, 5.5, true});
    add("P009", Scenario::labs, GlycemicMarkers{118.0, 6.6, true});

    add("P006", Scenario::gdm, OgttResult{90.0, 160.0, 140.0});
    add("P010", Scenario::gdm, OgttResult{95.0, 178.0, 154.0});
    add("P011", Scenario::gdm, OgttResult{91.0, 182.0, 149.0});

    add("P007-W1", Scenario::monitoring,
        MonitoringWeek{1, {96, 98, 97, 95, 99, 103, 105}});
    add("P007-W2", Scenario::monitoring,
        MonitoringWeek{2, {110, 115, 120, 118, 125, 112, 119}});
    add("P007-W3", Scenario::monitoring,
        MonitoringWeek{3, {130, 135, 140, 138, 145, 132, 141}});

    add("P012", Scenario::multimodal, RetinalCase{5.8, {}});
    add("P013", Scenario::multimodal,
        RetinalCase{8.4, {LesionFinding::microaneurysms, LesionFinding::few_hemorrhages}});
    add("P014", Scenario::multimodal,
        RetinalCase{9.5, {LesionFinding::cotton_wool_spots,
                          LesionFinding::extensive_hemorrhages}});

    return records;
}

jsonl::Corpus paper_fixture_corpus_with_meta() {
    jsonl::Corpus corpus;
    corpus.meta.generator = "paper-fixtures";
    corpus.meta.seed = 0;
    corpus.records = paper_fixture_corpus();
    return corpus;
}

}  // namespace diabench::casegen
