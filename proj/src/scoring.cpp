#include "diabench/scoring.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace diabench::scoring {
namespace {

using ojson = nlohmann::ordered_json;

double jaccard(const std::set<CriterionTag>& a, const std::set<CriterionTag>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t intersection = 0;
    for (CriterionTag t : a) intersection += b.count(t);
    const std::size_t unions = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

std::string fmt_double(double v) { return ojson(v).dump(); }

struct ScenarioDescription {
    std::string_view ground_truth;
    std::string_view task;
};

ScenarioDescription describe(std::string_view scenario) {
    if (scenario == "symptoms") {
        return {"ADA symptom clusters requiring labs",
                "Flag symptoms and recommend confirmatory lab testing"};
    }
    if (scenario == "labs") {
        return {"ADA thresholds for FPG and HbA1c",
                "Classify normal/prediabetes/diabetes; handle discordant cases"};
    }
    if (scenario == "gdm") {
        return {"ADA OGTT thresholds (92, 180, 153 mg/dL)",
                "Detect GDM if any threshold exceeded"};
    }
    if (scenario == "monitoring") {
        return {"Weekly values crossing ADA thresholds",
                "Escalate alerts none -> warning -> alert"};
    }
    if (scenario == "multimodal") {
        return {"Lesion descriptors plus glycemic control",
                "Stage retinopathy and recommend follow-up"};
    }
    return {"", ""};
}

bool needs_labs(Label label) { return label != Label::triage_low; }

}  // namespace

CaseScore score_case(const Adjudication& truth,
                     const extraction::ExtractionResult& extracted,
                     std::string case_id) {
    CaseScore score;
    score.case_id = std::move(case_id);
    score.extraction_verdict = extracted.verdict;
    if (truth.alert_level) score.alert_correct = false;

    if (extracted.verdict == extraction::Verdict::failed || !extracted.adjudication) {
        return score;
    }
    const Adjudication& answer = *extracted.adjudication;
    score.predicted = answer.classification;
    score.classification_correct = answer.classification == truth.classification;
    score.criteria_exact = answer.criteria_triggered == truth.criteria_triggered;
    score.criteria_jaccard = jaccard(truth.criteria_triggered, answer.criteria_triggered);
    if (truth.alert_level) {
        score.alert_correct =
            answer.alert_level && *answer.alert_level == *truth.alert_level;
    }
    return score;
}

std::vector<CaseScore> score_responses(
    const std::vector<CaseRecord>& corpus,
    const std::vector<backends::ModelResponse>& responses) {
    std::map<std::string, const backends::ModelResponse*> by_id;
    for (const auto& response : responses) {
        if (!by_id.emplace(response.case_id, &response).second) {
            throw CardinalityError("duplicate response for case " + response.case_id);
        }
    }

    std::vector<std::string> missing;
    std::vector<CaseScore> scores;
    scores.reserve(corpus.size());
    for (const CaseRecord& record : corpus) {
        auto it = by_id.find(record.case_id);
        if (it == by_id.end()) {
            missing.push_back(record.case_id);
            continue;
        }
        auto extracted = extraction::extract(it->second->raw_text, record.scenario);
        scores.push_back(score_case(record.ground_truth, extracted, record.case_id));
        by_id.erase(it);
    }

    if (!missing.empty() || !by_id.empty()) {
        std::ostringstream msg;
        msg << "corpus/responses mismatch;";
        if (!missing.empty()) {
            msg << " missing responses for:";
            for (const auto& id : missing) msg << ' ' << id;
            msg << ';';
        }
        if (!by_id.empty()) {
            msg << " responses without corpus case:";
            for (const auto& [id, _] : by_id) msg << ' ' << id;
        }
        throw CardinalityError(msg.str());
    }
    return scores;
}

EvalReport aggregate(const std::vector<CaseScore>& scores,
                     const std::vector<CaseRecord>& corpus, RunMetadata metadata) {
    if (corpus.empty()) throw Error("cannot aggregate an empty corpus");
    if (scores.size() != corpus.size()) {
        throw CardinalityError("expected one score per corpus case (" +
                               std::to_string(corpus.size()) + " cases, " +
                               std::to_string(scores.size()) + " scores)");
    }

    std::map<std::string, const CaseScore*> score_by_id;
    for (const CaseScore& score : scores) {
        if (!score_by_id.emplace(score.case_id, &score).second) {
            throw CardinalityError("duplicate score for case " + score.case_id);
        }
    }

    // Accumulate in case_id order so aggregation is invariant under input
    // order (including float summation).
    std::map<std::string, const CaseRecord*> record_by_id;
    for (const CaseRecord& record : corpus) {
        if (!record_by_id.emplace(record.case_id, &record).second) {
            throw CardinalityError("duplicate corpus case " + record.case_id);
        }
    }

    struct Accumulator {
        std::uint64_t n = 0;
        std::uint64_t classification_correct = 0;
        std::uint64_t criteria_exact = 0;
        double jaccard_sum = 0.0;
        std::uint64_t failed = 0;
        std::uint64_t alert_correct = 0;
        std::uint64_t labs_bit_correct = 0;
        std::map<std::string, std::map<std::string, std::uint64_t>> confusion;
    };
    std::map<std::string, Accumulator> per_scenario;
    std::uint64_t overall_correct = 0;
    std::uint64_t overall_exact = 0;
    std::uint64_t overall_failed = 0;

    for (const auto& [case_id, record] : record_by_id) {
        auto it = score_by_id.find(case_id);
        if (it == score_by_id.end()) {
            throw CardinalityError("no score for corpus case " + case_id);
        }
        const CaseScore& score = *it->second;
        Accumulator& acc = per_scenario[std::string(to_string(record->scenario))];
        acc.n += 1;
        acc.classification_correct += score.classification_correct ? 1 : 0;
        acc.criteria_exact += score.criteria_exact ? 1 : 0;
        acc.jaccard_sum += score.criteria_jaccard;
        acc.failed += score.extraction_verdict == extraction::Verdict::failed ? 1 : 0;
        overall_correct += score.classification_correct ? 1 : 0;
        overall_exact += score.criteria_exact ? 1 : 0;
        overall_failed += score.extraction_verdict == extraction::Verdict::failed ? 1 : 0;
        if (score.alert_correct.value_or(false)) acc.alert_correct += 1;
        if (record->scenario == Scenario::symptoms) {
            const bool truth_bit = needs_labs(record->ground_truth.classification);
            const bool agrees = score.predicted.has_value() &&
                                needs_labs(*score.predicted) == truth_bit;
            if (agrees) acc.labs_bit_correct += 1;
        }
        const std::string truth_label(to_string(record->ground_truth.classification));
        const std::string predicted_label =
            score.predicted ? std::string(to_string(*score.predicted))
                            : "extraction_failed";
        acc.confusion[truth_label][predicted_label] += 1;
    }

    EvalReport report;
    report.metadata = std::move(metadata);
    report.n = corpus.size();
    report.overall_accuracy =
        static_cast<double>(overall_correct) / static_cast<double>(corpus.size());
    report.overall_criteria_exact_rate =
        static_cast<double>(overall_exact) / static_cast<double>(corpus.size());
    report.overall_extraction_failure_rate =
        static_cast<double>(overall_failed) / static_cast<double>(corpus.size());
    for (auto& [name, acc] : per_scenario) {
        ScenarioReport sr;
        sr.n = acc.n;
        const auto denom = static_cast<double>(acc.n);
        sr.classification_accuracy =
            static_cast<double>(acc.classification_correct) / denom;
        sr.criteria_exact_rate = static_cast<double>(acc.criteria_exact) / denom;
        sr.mean_jaccard = acc.jaccard_sum / denom;
        sr.extraction_failure_rate = static_cast<double>(acc.failed) / denom;
        if (name == "monitoring") {
            sr.alert_accuracy = static_cast<double>(acc.alert_correct) / denom;
        }
        if (name == "symptoms") {
            sr.labs_recommended_accuracy =
                static_cast<double>(acc.labs_bit_correct) / denom;
        }
        sr.confusion = std::move(acc.confusion);
        report.scenarios.emplace(name, std::move(sr));
    }
    return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    return std::nullopt;
}

namespace {

ojson report_to_json(const EvalReport& report) {
    ojson j;
    j["format"] = "diabench.report.v1";
    ojson metadata;
    metadata["seed"] = report.metadata.seed;
    metadata["backend_hash"] = report.metadata.backend_hash;
    metadata["template_version"] = report.metadata.template_version;
    j["metadata"] = std::move(metadata);
    ojson overall;
    overall["n"] = report.n;
    overall["classification_accuracy"] = report.overall_accuracy;
    overall["criteria_exact_rate"] = report.overall_criteria_exact_rate;
    overall["extraction_failure_rate"] = report.overall_extraction_failure_rate;
    j["overall"] = std::move(overall);

    ojson scenarios = ojson::object();
    for (const auto& [name, sr] : report.scenarios) {
        ojson s;
        s["n"] = sr.n;
        s["classification_accuracy"] = sr.classification_accuracy;
        s["criteria_exact_rate"] = sr.criteria_exact_rate;
        s["mean_jaccard"] = sr.mean_jaccard;
        s["extraction_failure_rate"] = sr.extraction_failure_rate;
        if (sr.alert_accuracy) s["alert_accuracy"] = *sr.alert_accuracy;
        if (sr.labs_recommended_accuracy) {
            s["labs_recommended_accuracy"] = *sr.labs_recommended_accuracy;
        }
        ojson confusion = ojson::object();
        for (const auto& [truth, row] : sr.confusion) {
            ojson row_json = ojson::object();
            for (const auto& [predicted, count] : row) row_json[predicted] = count;
            confusion[truth] = std::move(row_json);
        }
        s["confusion"] = std::move(confusion);
        scenarios[name] = std::move(s);
    }
    j["scenarios"] = std::move(scenarios);
    return j;
}

std::string emit_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "scenario,n,classification_accuracy,criteria_exact_rate,mean_jaccard,"
           "extraction_failure_rate\n";
    for (const auto& [name, sr] : report.scenarios) {
        out << name << ',' << sr.n << ',' << fmt_double(sr.classification_accuracy)
            << ',' << fmt_double(sr.criteria_exact_rate) << ','
            << fmt_double(sr.mean_jaccard) << ','
            << fmt_double(sr.extraction_failure_rate) << '\n';
    }
    return out.str();
}

std::string emit_markdown(const EvalReport& report) {
    std::ostringstream out;
    out << "# Evaluation report\n\n";
    out << "Overall classification accuracy: "
        << fmt_double(report.overall_accuracy) << " over " << report.n
        << " cases.\n\n";
    out << "| Scenario | Ground Truth Definition | Expected Task | n | Accuracy |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& [name, sr] : report.scenarios) {
        auto desc = describe(name);
        out << "| " << name << " | " << desc.ground_truth << " | " << desc.task
            << " | " << sr.n << " | " << fmt_double(sr.classification_accuracy)
            << " |\n";
    }
    out << "\n";
    out << "| Scenario | Criteria exact | Mean Jaccard | Extraction failures |\n";
    out << "|---|---|---|---|\n";
    for (const auto& [name, sr] : report.scenarios) {
        out << "| " << name << " | " << fmt_double(sr.criteria_exact_rate) << " | "
            << fmt_double(sr.mean_jaccard) << " | "
            << fmt_double(sr.extraction_failure_rate) << " |\n";
    }
    return out.str();
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return report_to_json(report).dump(2) + "\n";
        case ReportFormat::csv: return emit_csv(report);
        case ReportFormat::markdown: return emit_markdown(report);
    }
    throw ConfigError("unknown report format");
}

EvalReport parse_report(const std::string& json_text) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("report is not valid JSON: ") + ex.what());
    }
    EvalReport report;
    const auto& metadata = j.at("metadata");
    report.metadata.seed = metadata.value("seed", std::uint64_t{0});
    report.metadata.backend_hash = metadata.value("backend_hash", "");
    report.metadata.template_version = metadata.value("template_version", "");
    report.n = j.at("overall").value("n", std::uint64_t{0});
    report.overall_accuracy = j.at("overall").value("classification_accuracy", 0.0);
    report.overall_criteria_exact_rate =
        j.at("overall").value("criteria_exact_rate", 0.0);
    report.overall_extraction_failure_rate =
        j.at("overall").value("extraction_failure_rate", 0.0);
    for (const auto& [name, s] : j.at("scenarios").items()) {
        ScenarioReport sr;
        sr.n = s.value("n", std::uint64_t{0});
        sr.classification_accuracy = s.value("classification_accuracy", 0.0);
        sr.criteria_exact_rate = s.value("criteria_exact_rate", 0.0);
        sr.mean_jaccard = s.value("mean_jaccard", 0.0);
        sr.extraction_failure_rate = s.value("extraction_failure_rate", 0.0);
        if (s.contains("alert_accuracy")) {
            sr.alert_accuracy = s.at("alert_accuracy").get<double>();
        }
        if (s.contains("labs_recommended_accuracy")) {
            sr.labs_recommended_accuracy =
                s.at("labs_recommended_accuracy").get<double>();
        }
        if (s.contains("confusion")) {
            for (const auto& [truth, row] : s.at("confusion").items()) {
                for (const auto& [predicted, count] : row.items()) {
                    sr.confusion[truth][predicted] = count.get<std::uint64_t>();
                }
            }
        }
        report.scenarios.emplace(name, std::move(sr));
    }
    return report;
}

}  // namespace diabench::scoring
