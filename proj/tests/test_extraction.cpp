#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "diabench/extraction.hpp"
#include "diabench/jsonl.hpp"
#include "diabench/oracle.hpp"

using namespace diabench;
using extraction::ExtractionResult;
using extraction::IssueCode;
using extraction::Verdict;

namespace {

bool has_issue(const ExtractionResult& result, IssueCode code) {
    for (const auto& issue : result.issues) {
        if (issue.code == code) return true;
    }
    return false;
}

std::string random_prose(std::mt19937_64& rng, int words) {
    static const char* vocabulary[] = {
        "the",     "patient", "reports",  "values",   "clinical", "assessment",
        "summary", "week",    "glucose",  "elevated", "routine",  "follow-up",
        "normal",  "\"quoted\"", "colon:", "(note)",  "100",      "risk."};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(vocabulary) - 1);
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (!out.empty()) out += ' ';
        out += vocabulary[pick(rng)];
    }
    return out;
}

}  // namespace

TEST_CASE("published JSON summaries extract cleanly") {
    SUBCASE("P005 prediabetes summary") {
        const std::string response =
            "Classification: Prediabetes. Rationale: values meet ADA prediabetes "
            "thresholds but not diabetes.\n"
            "JSON:\n"
            "{ \"classification\":\"prediabetes\",\n"
            "  \"criteria_triggered\":[\"FPG_100_125\",\"A1c_5.7_6.4\"],\n"
            "  \"next_steps\":\"Lifestyle program; schedule follow-up labs in 3-6 "
            "months.\" }";
        auto result = extraction::extract(response, Scenario::labs);
        REQUIRE(result.verdict == Verdict::ok);
        REQUIRE(result.adjudication.has_value());
        CHECK(result.adjudication->classification == Label::prediabetes);
        CHECK(result.adjudication->criteria_triggered ==
              std::set<CriterionTag>{CriterionTag::fpg_100_125,
                                     CriterionTag::a1c_5_7_6_4});
        CHECK(result.issues.empty());
    }
    SUBCASE("P011 summary inside a fenced block with leading prose") {
        const std::string response =
            "ADA criteria diagnose GDM if any one threshold is exceeded; here the "
            "1-hour glucose is sufficient.\n"
            "```json\n"
            "{ \"classification\":\"gestational_diabetes\",\n"
            "  \"criteria_triggered\":[\"OGTT_1h_>=180\"],\n"
            "  \"next_steps\":\"Confirm diagnosis; initiate nutrition therapy.\" }\n"
            "```\n";
        auto result = extraction::extract(response, Scenario::gdm);
        REQUIRE(result.verdict == Verdict::ok);
        CHECK(result.adjudication->classification == Label::gestational_diabetes);
        CHECK(result.adjudication->criteria_triggered ==
              std::set<CriterionTag>{CriterionTag::ogtt_1h_ge_180});
    }
    SUBCASE("week summary with week and alert_level") {
        const std::string response =
            "{ \"week\":3, \"alert_level\":\"alert\", \"classification\":\"diabetes\","
            " \"next_steps\":\"Schedule telehealth visit.\" }";
        auto result = extraction::extract(response, Scenario::monitoring);
        REQUIRE(result.verdict == Verdict::ok);
        CHECK(result.adjudication->week == 3);
        CHECK(result.adjudication->alert_level == AlertLevel::alert);
    }
}

TEST_CASE("responses without JSON fail with NO_JSON") {
    auto result = extraction::extract("no json here at all", Scenario::labs);
    CHECK(result.verdict == Verdict::failed);
    CHECK_FALSE(result.adjudication.has_value());
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].code == IssueCode::no_json);
    CHECK(extraction::to_string(result.issues[0].code) == "NO_JSON");

    auto unbalanced = extraction::extract("opening { only", Scenario::labs);
    CHECK(unbalanced.verdict == Verdict::failed);
    CHECK(has_issue(unbalanced, IssueCode::no_json));
}

TEST_CASE("balanced but unparseable braces fail with MALFORMED") {
    auto result = extraction::extract("see {not valid json} above", Scenario::labs);
    CHECK(result.verdict == Verdict::failed);
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].code == IssueCode::malformed);
}

TEST_CASE("a later valid object rescues an earlier broken one") {
    const std::string response =
        "header {oops} then { \"classification\":\"normal\", "
        "\"criteria_triggered\":[], \"next_steps\":\"ok\" }";
    auto result = extraction::extract(response, Scenario::labs);
    REQUIRE(result.verdict == Verdict::ok);
    CHECK(result.adjudication->classification == Label::normal);

    // An unbalanced opening brace before the object is also skipped.
    const std::string nested_start =
        "{ { \"classification\":\"normal\", \"criteria_triggered\":[], "
        "\"next_steps\":\"ok\" }";
    auto rescued = extraction::extract(nested_start, Scenario::labs);
    REQUIRE(rescued.verdict == Verdict::ok);
}

TEST_CASE("the first parseable object wins when several appear") {
    const std::string response =
        "{ \"classification\":\"normal\", \"criteria_triggered\":[], "
        "\"next_steps\":\"first\" } and later "
        "{ \"classification\":\"diabetes\", \"criteria_triggered\":[], "
        "\"next_steps\":\"second\" }";
    auto result = extraction::extract(response, Scenario::labs);
    REQUIRE(result.adjudication.has_value());
    CHECK(result.adjudication->classification == Label::normal);
    CHECK(result.adjudication->next_steps == "first");
}

TEST_CASE("non-canonical labels recover case-insensitively") {
    // Every registry label in Capitalized and UPPER variants.
    for (Label label : label_registry()) {
        std::string canonical(to_string(label));
        std::string capitalized = canonical;
        capitalized[0] = static_cast<char>(std::toupper(capitalized[0]));
        std::string upper = canonical;
        for (char& c : upper) c = static_cast<char>(std::toupper(c));

        for (const std::string& variant : {capitalized, upper}) {
            std::string response = "{ \"classification\":\"" + variant +
                                   "\", \"criteria_triggered\":[], "
                                   "\"next_steps\":\"x\" }";
            auto result = extraction::extract(response, Scenario::labs);
            REQUIRE(result.adjudication.has_value());
            CHECK(result.adjudication->classification == label);
            if (variant != canonical) {
                CHECK(result.verdict == Verdict::recovered);
                CHECK(has_issue(result, IssueCode::unknown_label));
            }
        }
    }
}

TEST_CASE("unknown labels fail; unknown tags are dropped but recoverable") {
    auto bad_label = extraction::extract(
        "{ \"classification\":\"borderline\", \"criteria_triggered\":[], "
        "\"next_steps\":\"x\" }",
        Scenario::labs);
    CHECK(bad_label.verdict == Verdict::failed);
    CHECK(has_issue(bad_label, IssueCode::unknown_label));

    auto bad_tag = extraction::extract(
        "{ \"classification\":\"diabetes\", "
        "\"criteria_triggered\":[\"FPG_>=126\",\"made_up_tag\"], "
        "\"next_steps\":\"x\" }",
        Scenario::labs);
    REQUIRE(bad_tag.verdict == Verdict::recovered);
    CHECK(has_issue(bad_tag, IssueCode::unknown_tag));
    CHECK(bad_tag.adjudication->criteria_triggered ==
          std::set<CriterionTag>{CriterionTag::fpg_ge_126});

    auto folded_tag = extraction::extract(
        "{ \"classification\":\"diabetes\", \"criteria_triggered\":[\"fpg_>=126\"], "
        "\"next_steps\":\"x\" }",
        Scenario::labs);
    REQUIRE(folded_tag.verdict == Verdict::recovered);
    CHECK(folded_tag.adjudication->criteria_triggered ==
          std::set<CriterionTag>{CriterionTag::fpg_ge_126});
}

TEST_CASE("missing fields are reported per the scenario contract") {
    auto no_classification = extraction::extract(
        "{ \"criteria_triggered\":[], \"next_steps\":\"x\" }", Scenario::labs);
    CHECK(no_classification.verdict == Verdict::failed);
    CHECK(has_issue(no_classification, IssueCode::missing_field));

    auto no_criteria = extraction::extract(
        "{ \"classification\":\"normal\", \"next_steps\":\"x\" }", Scenario::labs);
    CHECK(no_criteria.verdict == Verdict::recovered);
    CHECK(has_issue(no_criteria, IssueCode::missing_field));
    CHECK(no_criteria.adjudication->criteria_triggered.empty());

    // Monitoring summaries omit criteria_triggered by design.
    auto monitoring = extraction::extract(
        "{ \"week\":1, \"alert_level\":\"none\", \"classification\":\"normal\", "
        "\"next_steps\":\"x\" }",
        Scenario::monitoring);
    CHECK(monitoring.verdict == Verdict::ok);

    auto missing_alert = extraction::extract(
        "{ \"week\":1, \"classification\":\"normal\", \"criteria_triggered\":[], "
        "\"next_steps\":\"x\" }",
        Scenario::monitoring);
    CHECK(missing_alert.verdict == Verdict::recovered);
    bool found = false;
    for (const auto& issue : missing_alert.issues) {
        if (issue.code == IssueCode::missing_field &&
            issue.message.find("alert_level") != std::string::npos) {
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("fields from the wrong scenario are flagged") {
    auto labs_with_week = extraction::extract(
        "{ \"classification\":\"diabetes\", \"criteria_triggered\":[\"FPG_>=126\"], "
        "\"next_steps\":\"x\", \"week\":2 }",
        Scenario::labs);
    CHECK(labs_with_week.verdict == Verdict::recovered);
    CHECK(has_issue(labs_with_week, IssueCode::unexpected_field));
}

TEST_CASE("scenario tag families match the published outputs") {
    using Fam = std::set<CriterionTag>;
    CHECK(extraction::tag_family(Scenario::labs) ==
          Fam{CriterionTag::fpg_ge_126, CriterionTag::a1c_ge_6_5,
              CriterionTag::fpg_100_125, CriterionTag::a1c_5_7_6_4});
    CHECK(extraction::tag_family(Scenario::gdm) ==
          Fam{CriterionTag::fpg_ge_92, CriterionTag::ogtt_1h_ge_180,
              CriterionTag::ogtt_2h_ge_153});
    CHECK(extraction::tag_family(Scenario::multimodal) ==
          Fam{CriterionTag::a1c_ge_7, CriterionTag::a1c_ge_9,
              CriterionTag::microaneurysms, CriterionTag::retinal_lesions});
    CHECK(extraction::tag_family(Scenario::symptoms).empty());
    CHECK(extraction::tag_family(Scenario::monitoring).empty());

    // A lab tag inside a gdm response is valid registry but foreign family.
    auto foreign = extraction::extract(
        "{ \"classification\":\"gestational_diabetes\", "
        "\"criteria_triggered\":[\"A1c_>=6.5\"], \"next_steps\":\"x\" }",
        Scenario::gdm);
    REQUIRE(foreign.verdict == Verdict::recovered);
    CHECK(has_issue(foreign, IssueCode::foreign_tag));

    // Exhaustive family check across scenarios and registry tags.
    for (int s = 0; s < 5; ++s) {
        auto scenario = static_cast<Scenario>(s);
        const auto& family = extraction::tag_family(scenario);
        for (CriterionTag tag : criterion_registry()) {
            Adjudication adj;
            adj.classification = Label::normal;
            adj.criteria_triggered = {tag};
            if (scenario == Scenario::monitoring) {
                adj.week = 1;
                adj.alert_level = AlertLevel::none;
            }
            auto issues = extraction::validate_schema(adj, scenario);
            bool flagged = false;
            for (const auto& issue : issues) {
                if (issue.code == IssueCode::foreign_tag) flagged = true;
            }
            REQUIRE(flagged == (family.count(tag) == 0));
        }
    }
}

TEST_CASE("validate_schema checks week and alert presence") {
    Adjudication labs_adj;
    labs_adj.classification = Label::diabetes;
    labs_adj.week = 2;
    auto issues = extraction::validate_schema(labs_adj, Scenario::labs);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].code == IssueCode::unexpected_field);

    Adjudication monitoring_adj;
    monitoring_adj.classification = Label::normal;
    auto missing = extraction::validate_schema(monitoring_adj, Scenario::monitoring);
    CHECK(missing.size() == 2);  // week and alert_level
}

TEST_CASE("brace matcher recovers objects embedded anywhere in prose") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> words(0, 40);
    std::uniform_int_distribution<int> pretty(0, 1);

    auto corpora = [] {
        std::vector<Adjudication> all;
        GlycemicMarkers markers{118.0, 6.6, true};
        all.push_back(oracle::classify_glycemia(markers).adjudication);
        all.push_back(oracle::classify_ogtt(OgttResult{95, 178, 154}).adjudication);
        all.push_back(oracle::classify_week(
                          MonitoringWeek{2, {110, 115, 120, 118, 125, 112, 119}})
                          .adjudication);
        all.push_back(
            oracle::stage_retinopathy(RetinalCase{8.4,
                                                  {LesionFinding::microaneurysms}})
                .adjudication);
        return all;
    }();
    const Scenario scenarios[] = {Scenario::labs, Scenario::gdm,
                                  Scenario::monitoring, Scenario::multimodal};

    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t which = trial % corpora.size();
        const Adjudication& adj = corpora[which];
        auto dump = pretty(rng) ? jsonl::to_json(adj).dump(2)
                                : jsonl::to_json(adj).dump();
        std::string text = random_prose(rng, words(rng)) + " " + dump + " " +
                           random_prose(rng, words(rng));

        auto result = extraction::extract(text, scenarios[which]);
        REQUIRE(result.verdict == Verdict::ok);
        REQUIRE(*result.adjudication == adj);
    }
}

TEST_CASE("extraction never throws on arbitrary bytes") {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> len(0, 200);
    std::uniform_int_distribution<int> byte(1, 255);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string junk;
        int n = len(rng);
        for (int i = 0; i < n; ++i) junk.push_back(static_cast<char>(byte(rng)));
        CHECK_NOTHROW(extraction::extract(junk, Scenario::labs));
        CHECK_NOTHROW(extraction::extract(junk, Scenario::monitoring));
    }
    CHECK_NOTHROW(extraction::extract("", Scenario::gdm));
    CHECK_NOTHROW(extraction::extract("{\"a\":\"\\", Scenario::gdm));
}

TEST_CASE("issue codes render with their documented spellings") {
    CHECK(extraction::to_string(IssueCode::no_json) == "NO_JSON");
    CHECK(extraction::to_string(IssueCode::malformed) == "MALFORMED");
    CHECK(extraction::to_string(IssueCode::missing_field) == "MISSING_FIELD");
    CHECK(extraction::to_string(IssueCode::unexpected_field) == "UNEXPECTED_FIELD");
    CHECK(extraction::to_string(IssueCode::unknown_label) == "UNKNOWN_LABEL");
    CHECK(extraction::to_string(IssueCode::unknown_tag) == "UNKNOWN_TAG");
    CHECK(extraction::to_string(IssueCode::foreign_tag) == "FOREIGN_TAG");
}
