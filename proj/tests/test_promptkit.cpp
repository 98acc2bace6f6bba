#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "diabench/casegen.hpp"
#include "diabench/promptkit.hpp"

using namespace diabench;
namespace fs = std::filesystem;

namespace {

CaseRecord make_record(std::string id, Scenario scenario, CasePayload payload) {
    CaseRecord record;
    record.case_id = std::move(id);
    record.scenario = scenario;
    record.payload = std::move(payload);
    return record;
}

const CaseRecord& fixture(const std::string& id) {
    static const auto corpus = casegen::paper_fixture_corpus();
    for (const auto& record : corpus) {
        if (record.case_id == id) return record;
    }
    throw std::runtime_error("no fixture " + id);
}

int field_mentions(const std::string& text) {
    int count = 0;
    for (const char* field : {"classification", "criteria_triggered", "next_steps",
                              "week", "alert_level"}) {
        if (text.find(field) != std::string::npos) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("lab prompts carry the exact lab formatting") {
    auto bundle = promptkit::render(fixture("P004"));
    CHECK(bundle.scenario == Scenario::labs);
    CHECK(bundle.case_id == "P004");
    CHECK(bundle.system ==
          "You are a clinical decision-support assistant. Use ADA 2025 diagnostic "
          "thresholds for diabetes.");
    CHECK(bundle.user.find("Patient ID: P004.") != std::string::npos);
    CHECK(bundle.user.find("FPG = 132 mg/dL; HbA1c = 6.9%") != std::string::npos);
    // The literal choice set survives placeholder substitution.
    CHECK(bundle.user.find("{Normal | Prediabetes | Diabetes}") != std::string::npos);
}

TEST_CASE("gdm prompts carry the OGTT triplet") {
    auto bundle = promptkit::render(fixture("P006"));
    CHECK(bundle.user.find("Fasting = 90 mg/dL; 1-hour = 160 mg/dL; 2-hour = 140 "
                           "mg/dL") != std::string::npos);
    CHECK(bundle.system.find("obstetric diabetes screening") != std::string::npos);
}

TEST_CASE("monitoring prompts list the week number and all seven readings") {
    auto bundle = promptkit::render(fixture("P007-W2"));
    CHECK(bundle.user.find("week 2") != std::string::npos);
    CHECK(bundle.user.find("110, 115, 120, 118, 125, 112, 119") != std::string::npos);
}

TEST_CASE("multimodal prompts render findings as human phrases") {
    auto with_lesions = promptkit::render(fixture("P013"));
    CHECK(with_lesions.user.find("microaneurysms, few hemorrhages") !=
          std::string::npos);
    CHECK(with_lesions.user.find("HbA1c = 8.4%") != std::string::npos);

    auto clean = promptkit::render(fixture("P012"));
    CHECK(clean.user.find("normal retina, no lesions") != std::string::npos);
}

TEST_CASE("symptom prompts restore the human phrasing") {
    auto record = make_record(
        "S1-000000", Scenario::symptoms,
        SymptomCase{45, Sex::male, 31.0,
                    {Symptom::frequent_urination, Symptom::excessive_thirst,
                     Symptom::fatigue},
                    {RiskFactor::obesity, RiskFactor::sedentary_lifestyle}});
    auto bundle = promptkit::render(record);
    CHECK(bundle.user.find("Age 45, Male") != std::string::npos);
    CHECK(bundle.user.find("BMI: 31") != std::string::npos);
    CHECK(bundle.user.find("frequent urination, excessive thirst, fatigue") !=
          std::string::npos);
    CHECK(bundle.user.find("obesity, sedentary lifestyle") != std::string::npos);

    record.payload = SymptomCase{40, Sex::female, 25.0, {}, {}};
    auto empty = promptkit::render(record);
    CHECK(empty.user.find("Symptoms: none reported") != std::string::npos);
}

TEST_CASE("schema instructions name the scenario's JSON fields") {
    auto labs = promptkit::schema_instruction(Scenario::labs);
    CHECK(field_mentions(labs) == 3);
    CHECK(labs.find("JSON") != std::string::npos);

    auto monitoring = promptkit::schema_instruction(Scenario::monitoring);
    CHECK(monitoring.find("week") != std::string::npos);
    CHECK(monitoring.find("alert_level") != std::string::npos);

    auto gdm = promptkit::schema_instruction(Scenario::gdm);
    CHECK(gdm.find("patient education message") != std::string::npos);
}

TEST_CASE("re-rendering the fixtures reproduces every numeric value verbatim") {
    for (const auto& record : casegen::paper_fixture_corpus()) {
        auto bundle = promptkit::render(record);
        std::vector<std::string> expected;
        switch (record.scenario) {
            case Scenario::labs: {
                const auto& m = std::get<GlycemicMarkers>(record.payload);
                expected = {format_quantity(m.fpg), format_quantity(m.hba1c)};
                break;
            }
            case Scenario::gdm: {
                const auto& o = std::get<OgttResult>(record.payload);
                expected = {format_quantity(o.fasting), format_quantity(o.one_hour),
                            format_quantity(o.two_hour)};
                break;
            }
            case Scenario::monitoring: {
                const auto& w = std::get<MonitoringWeek>(record.payload);
                expected.push_back(std::to_string(w.week_index));
                for (int r : w.readings) expected.push_back(std::to_string(r));
                break;
            }
            case Scenario::multimodal: {
                const auto& r = std::get<RetinalCase>(record.payload);
                expected = {format_quantity(r.hba1c)};
                break;
            }
            case Scenario::symptoms: break;
        }
        for (const auto& value : expected) {
            REQUIRE(bundle.user.find(value) != std::string::npos);
        }
    }
}

TEST_CASE("rendering is injective on payload values within a scenario") {
    casegen::Rng rng(31);
    std::set<std::string> seen;
    for (int i = 0; i < 400; ++i) {
        auto record = make_record("S2-TEST", Scenario::labs,
                                  casegen::sample_labs(rng, "prediabetes"));
        seen.insert(promptkit::render(record).user);
    }
    // 26 x 8 possible one-decimal pairs in the prediabetes band; any collision
    // within 400 draws would show up as a smaller set than distinct payloads.
    std::set<std::pair<long, long>> payloads;
    casegen::Rng replay(31);
    for (int i = 0; i < 400; ++i) {
        auto m = casegen::sample_labs(replay, "prediabetes");
        payloads.insert({std::lround(m.fpg * 10), std::lround(m.hba1c * 10)});
    }
    CHECK(seen.size() == payloads.size());
}

TEST_CASE("placeholder substitution touches only known keys") {
    auto out = promptkit::substitute(
        "a {x} b {unknown} c {x}", {{"x", "1"}});
    CHECK(out == "a 1 b {unknown} c 1");
    CHECK(promptkit::substitute("no placeholders", {}) == "no placeholders");
    CHECK(promptkit::substitute("dangling {", {}) == "dangling {");
}

TEST_CASE("human phrase table is bidirectional") {
    for (int i = 0; i < 7; ++i) {
        auto s = static_cast<Symptom>(i);
        CHECK(promptkit::symptom_from_phrase(promptkit::human_phrase(s)) == s);
    }
    for (int i = 0; i < 5; ++i) {
        auto r = static_cast<RiskFactor>(i);
        CHECK(promptkit::risk_factor_from_phrase(promptkit::human_phrase(r)) == r);
        auto f = static_cast<LesionFinding>(i);
        CHECK(promptkit::lesion_from_phrase(promptkit::human_phrase(f)) == f);
    }
    CHECK_FALSE(promptkit::symptom_from_phrase("polyuria").has_value());
}

TEST_CASE("shipped template assets match the built-ins") {
    auto loaded = promptkit::TemplateSet::load_dir(DIABENCH_TEMPLATES_DIR);
    CHECK(loaded.version() == promptkit::kBuiltinTemplateVersion);
    for (int i = 0; i < 5; ++i) {
        auto scenario = static_cast<Scenario>(i);
        CHECK(loaded.system_text(scenario) ==
              promptkit::TemplateSet::builtin().system_text(scenario));
        CHECK(loaded.user_template(scenario) ==
              promptkit::TemplateSet::builtin().user_template(scenario));
    }
}

TEST_CASE("an alternative template directory swaps in cleanly") {
    const fs::path dir = fs::temp_directory_path() / "diabench_templates_test";
    fs::create_directories(dir);
    for (int i = 0; i < 5; ++i) {
        auto scenario = static_cast<Scenario>(i);
        auto stem = std::string(to_string(scenario));
        std::ofstream(dir / (stem + ".system.txt"))
            << promptkit::TemplateSet::builtin().system_text(scenario) << "\n";
        std::ofstream(dir / (stem + ".user.txt"))
            << promptkit::TemplateSet::builtin().user_template(scenario) << "\n";
    }
    std::ofstream(dir / "labs.user.txt")
        << "Labs for {id}: FPG {fpg}, A1c {hba1c}. Reply with JSON.\n";

    auto custom = promptkit::TemplateSet::load_dir(dir);
    CHECK(custom.version() != promptkit::kBuiltinTemplateVersion);
    CHECK(custom.version().rfind("custom-", 0) == 0);

    auto bundle = promptkit::render(fixture("P004"), custom);
    CHECK(bundle.user == "Labs for P004: FPG 132, A1c 6.9. Reply with JSON.");

    fs::remove(dir / "gdm.system.txt");
    CHECK_THROWS_AS(promptkit::TemplateSet::load_dir(dir), IoError);
    fs::remove_all(dir);
}

TEST_CASE("render rejects mismatched payloads") {
    auto record = make_record("X", Scenario::gdm, GlycemicMarkers{110.0, 5.8, true});
    CHECK_THROWS_AS(promptkit::render(record), DispatchError);
}
