#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "diabench/backends.hpp"
#include "diabench/casegen.hpp"
#include "diabench/domain.hpp"
#include "diabench/jsonl.hpp"
#include "diabench/oracle.hpp"
#include "diabench/promptkit.hpp"
#include "diabench/scoring.hpp"

namespace {

namespace fs = std::filesystem;
using namespace diabench;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;  // I/O, cardinality, partial run failures
constexpr int kExitUsage = 2;    // flag/config errors

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::map<std::string, double> parse_quotas(const std::string& text) {
    std::map<std::string, double> quotas;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("quota item '" + item + "' is not name=fraction");
        }
        try {
            quotas[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("quota fraction in '" + item + "' is not a number");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return quotas;
}

struct GenerateArgs {
    std::string scenario;
    std::uint64_t count = 0;
    std::uint64_t weeks = 0;
    std::uint64_t seed = 0;
    std::string quotas;
    std::string profile;
    std::string out;
    bool verify = false;
};

int cmd_generate(const GenerateArgs& args) {
    auto scenario = parse_scenario(args.scenario);
    if (!scenario) throw ConfigError("unknown scenario: " + args.scenario);

    casegen::GenSpec spec;
    spec.scenario = *scenario;
    spec.seed = args.seed;
    spec.count = args.count;

    if (args.weeks > 0) {
        if (*scenario != Scenario::monitoring) {
            throw ConfigError("--weeks only applies to --scenario monitoring");
        }
        spec.count = args.weeks;
    }
    if (spec.count < 1) throw ConfigError("case count must be >= 1");

    if (!args.profile.empty()) {
        if (*scenario != Scenario::monitoring) {
            throw ConfigError("--profile only applies to --scenario monitoring");
        }
        if (args.profile == "progression") {
            // default uniform quotas give normal -> prediabetes -> diabetes
        } else if (args.profile == "normal" || args.profile == "prediabetes" ||
                   args.profile == "diabetes") {
            spec.strata_quotas = {{args.profile, 1.0}};
        } else {
            throw ConfigError("unknown profile: " + args.profile);
        }
    }
    if (!args.quotas.empty()) spec.strata_quotas = parse_quotas(args.quotas);

    jsonl::Corpus corpus = casegen::generate_corpus(spec);
    jsonl::write_corpus(corpus, args.out);

    const auto alloc = casegen::allocate_strata(spec);
    const auto& strata = casegen::strata_for(spec.scenario);
    std::cout << "wrote " << corpus.records.size() << " cases to " << args.out
              << "\nstratum counts:";
    for (std::size_t i = 0; i < strata.size(); ++i) {
        std::cout << ' ' << strata[i] << '=' << alloc[i];
    }
    std::cout << '\n';

    if (args.verify) {
        jsonl::Corpus reread = jsonl::read_corpus(args.out);
        for (const CaseRecord& record : reread.records) {
            auto fresh = oracle::adjudicate(record, reread.meta.thresholds);
            if (!(fresh.adjudication == record.ground_truth)) {
                std::cerr << "verify: ground truth mismatch for " << record.case_id
                          << '\n';
                return kExitRuntime;
            }
        }
        std::cout << "verify: ground truth matches a fresh oracle pass\n";
    }
    return kExitOk;
}

int cmd_fixtures(const std::string& out) {
    jsonl::Corpus corpus = casegen::paper_fixture_corpus_with_meta();
    jsonl::write_corpus(corpus, out);
    std::cout << "wrote " << corpus.records.size() << " fixture cases to " << out
              << '\n';
    return kExitOk;
}

struct RunArgs {
    std::string corpus;
    std::string backend;
    std::string endpoint;
    std::string model;
    std::string transcript;
    std::string templates_dir;
    std::string request_log;
    std::string out;
    std::string manifest;
    double temperature = 0.0;
    int max_retries = 3;
    double timeout_seconds = 60.0;
    int parallel = 4;
};

int cmd_run(const RunArgs& args) {
    backends::BackendConfig cfg;
    auto kind = backends::parse_backend_kind(args.backend);
    if (!kind) throw ConfigError("unknown backend: " + args.backend);
    cfg.kind = *kind;
    cfg.endpoint_url = args.endpoint;
    cfg.model_name = args.model;
    cfg.transcript_path = args.transcript;
    cfg.request_log_path = args.request_log;
    cfg.temperature = args.temperature;
    cfg.max_retries = args.max_retries;
    cfg.timeout_seconds = args.timeout_seconds;
    cfg.validate();

    if (cfg.kind == backends::BackendKind::http) {
        const char* key = std::getenv(std::string(backends::kApiKeyEnvVar).c_str());
        if (!key || std::string(key).empty()) {
            throw ConfigError(std::string(backends::kApiKeyEnvVar) +
                              " must be set for the http backend");
        }
    }

    jsonl::Corpus corpus = jsonl::read_corpus(args.corpus);
    const promptkit::TemplateSet templates =
        args.templates_dir.empty() ? promptkit::TemplateSet::builtin()
                                   : promptkit::TemplateSet::load_dir(args.templates_dir);

    backends::ResponseSet responses = backends::run_cases(
        corpus.records, cfg, templates, corpus.meta.thresholds, args.parallel);
    backends::record(responses, args.out);

    const std::string manifest_path =
        args.manifest.empty() ? args.out + ".manifest.json" : args.manifest;
    nlohmann::ordered_json manifest;
    manifest["format"] = "diabench.manifest.v1";
    manifest["corpus"] = args.corpus;
    manifest["responses"] = args.out;
    nlohmann::ordered_json backend_json;
    backend_json["kind"] = backends::to_string(cfg.kind);
    backend_json["endpoint_url"] = cfg.endpoint_url;
    backend_json["model_name"] = cfg.model_name;
    backend_json["temperature"] = cfg.temperature;
    backend_json["max_retries"] = cfg.max_retries;
    backend_json["timeout_seconds"] = cfg.timeout_seconds;
    backend_json["transcript_path"] = cfg.transcript_path;
    backend_json["hash"] = backends::backend_config_hash(cfg);
    manifest["backend"] = std::move(backend_json);
    manifest["template_version"] = templates.version();
    manifest["templates_dir"] = args.templates_dir;
    manifest["parallelism"] = args.parallel;
    manifest["timestamp"] = utc_timestamp();
    std::ofstream manifest_out(manifest_path, std::ios::binary);
    if (!manifest_out) throw IoError("cannot write manifest: " + manifest_path);
    manifest_out << manifest.dump(2) << '\n';

    int failures = 0;
    for (const auto& response : responses.responses) {
        if (!response.error.empty()) {
            ++failures;
            std::cerr << "failed: " << response.case_id << ": " << response.error
                      << '\n';
        }
    }
    std::cout << "wrote " << responses.responses.size() << " responses to "
              << args.out << " (" << failures << " failed); manifest "
              << manifest_path << '\n';
    return failures == 0 ? kExitOk : kExitRuntime;
}

struct ScoreArgs {
    std::string corpus;
    std::string responses;
    std::string report_dir;
    std::string prefix = "report";
};

int cmd_score(const ScoreArgs& args) {
    jsonl::Corpus corpus = jsonl::read_corpus(args.corpus);
    backends::ResponseSet responses = backends::load_transcript(args.responses);

    auto scores = scoring::score_responses(corpus.records, responses.responses);
    scoring::RunMetadata metadata;
    metadata.seed = corpus.meta.seed;
    metadata.backend_hash = responses.meta.backend_hash;
    metadata.template_version = responses.meta.template_version;
    scoring::EvalReport report = scoring::aggregate(scores, corpus.records, metadata);

    fs::create_directories(args.report_dir);
    auto write_doc = [&](scoring::ReportFormat format, const char* extension) {
        fs::path path = fs::path(args.report_dir) / (args.prefix + extension);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write report: " + path.string());
        out << scoring::emit_report(report, format);
        return path;
    };
    auto json_path = write_doc(scoring::ReportFormat::json, ".json");
    write_doc(scoring::ReportFormat::csv, ".csv");
    write_doc(scoring::ReportFormat::markdown, ".md");

    std::cout << "scored " << report.n << " cases; overall accuracy "
              << report.overall_accuracy << "; reports in " << args.report_dir
              << " (" << json_path.filename().string() << ", .csv, .md)\n";
    // Accuracy is data, not failure: exit 0 regardless of the numbers.
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic diabetes-case simulation and LLM evaluation harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (key=value lines; flags win)");

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand(
        "generate", "Generate a seeded synthetic corpus with oracle ground truth");
    generate->add_option("--scenario", gen.scenario,
                         "symptoms|labs|gdm|monitoring|multimodal")
        ->required();
    generate->add_option("--n", gen.count, "Number of cases");
    generate->add_option("--weeks", gen.weeks, "Number of weeks (monitoring)");
    generate->add_option("--seed", gen.seed, "RNG seed")->required();
    generate->add_option("--quotas", gen.quotas,
                         "Stratum quotas, e.g. normal=0.34,prediabetes=0.33,diabetes=0.33");
    generate->add_option("--profile", gen.profile,
                         "Monitoring profile: progression|normal|prediabetes|diabetes");
    generate->add_option("--out", gen.out, "Output corpus JSONL")->required();
    generate->add_flag("--verify", gen.verify,
                       "Re-adjudicate the written corpus against a fresh oracle pass");

    std::string fixtures_out;
    CLI::App* fixtures = app.add_subcommand(
        "fixtures", "Write the 13-case golden corpus from the source tables");
    fixtures->add_option("--out", fixtures_out, "Output corpus JSONL")->required();

    RunArgs run;
    CLI::App* run_cmd = app.add_subcommand(
        "run", "Render prompts and collect model responses for a corpus");
    run_cmd->add_option("--corpus", run.corpus, "Corpus JSONL")->required();
    run_cmd->add_option("--backend", run.backend, "http|replay|reference")->required();
    run_cmd->add_option("--endpoint", run.endpoint,
                        "Chat-completions URL (http backend)");
    run_cmd->add_option("--model", run.model, "Model name (http backend)");
    run_cmd->add_option("--transcript", run.transcript,
                        "Recorded transcript to replay (replay backend)");
    run_cmd->add_option("--templates", run.templates_dir,
                        "Alternative template directory");
    run_cmd->add_option("--request-log", run.request_log,
                        "Mirror exact request payloads to this JSONL file");
    run_cmd->add_option("--temperature", run.temperature, "Sampling temperature");
    run_cmd->add_option("--max-retries", run.max_retries, "Retries per request");
    run_cmd->add_option("--timeout", run.timeout_seconds, "Request timeout, seconds");
    run_cmd->add_option("--parallel", run.parallel, "Concurrent requests");
    run_cmd->add_option("--out", run.out, "Responses JSONL")->required();
    run_cmd->add_option("--manifest", run.manifest,
                        "Run manifest path (default: <out>.manifest.json)");

    ScoreArgs score;
    CLI::App* score_cmd = app.add_subcommand(
        "score", "Extract, validate and score responses against ground truth");
    score_cmd->add_option("--corpus", score.corpus, "Corpus JSONL")->required();
    score_cmd->add_option("--responses", score.responses, "Responses JSONL")->required();
    score_cmd->add_option("--report-dir", score.report_dir, "Report directory")
        ->required();
    score_cmd->add_option("--prefix", score.prefix, "Report file name prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*fixtures) return cmd_fixtures(fixtures_out);
        if (*run_cmd) return cmd_run(run);
        if (*score_cmd) return cmd_score(score);
    } catch (const ConfigError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
