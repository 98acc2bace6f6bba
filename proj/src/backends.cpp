#include "diabench/backends.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "diabench/fnv.hpp"
#include "diabench/jsonl.hpp"
#include "diabench/oracle.hpp"

namespace diabench::backends {
namespace {

using ojson = nlohmann::ordered_json;

std::string_view patient_message(Label label) {
    switch (label) {
        case Label::normal:
            return "Your results look normal. Keep up your current healthy habits.";
        case Label::prediabetes:
            return "Your sugar levels are a little higher than normal. Healthy food "
                   "and exercise changes now can help prevent diabetes.";
        case Label::diabetes:
            return "Your results are in the diabetes range. Please schedule a visit "
                   "to discuss next steps and treatment options.";
        case Label::gestational_diabetes:
            return "Your test shows higher than expected sugar levels during "
                   "pregnancy. With diet, exercise and monitoring this can be "
                   "managed safely.";
        case Label::no_retinopathy:
            return "Your eye exam looks healthy. Keep up the healthy lifestyle to "
                   "protect your vision.";
        case Label::mild_retinopathy:
            return "Your eye test shows early changes related to diabetes. Better "
                   "blood sugar control and regular checkups help prevent worsening.";
        case Label::moderate_retinopathy:
            return "Your eye exam shows more serious changes from diabetes. We "
                   "recommend seeing an eye specialist soon.";
        case Label::severe_retinopathy:
            return "Your eye exam shows serious changes that need urgent attention. "
                   "Please see an eye specialist right away.";
        case Label::triage_low:
            return "Nothing in your answers points to diabetes right now. Keep up "
                   "routine checkups.";
        case Label::triage_moderate:
            return "Some of your symptoms can be related to blood sugar. A simple "
                   "lab test will give a clear answer.";
        case Label::triage_high:
            return "Your symptoms fit a pattern that deserves prompt testing. Please "
                   "get the recommended lab tests soon.";
    }
    return "";
}

/// Four-part answer (classification, rationale, patient message, JSON block)
/// as the prompt templates instruct. Monitoring JSON keeps the field order
/// week, alert_level, classification, next_steps.
std::string render_reference_answer(const oracle::OracleOutcome& outcome,
                                    Scenario scenario) {
    const Adjudication& adj = outcome.adjudication;
    ojson summary;
    if (scenario == Scenario::monitoring) {
        summary["week"] = adj.week.value_or(0);
        summary["alert_level"] =
            adj.alert_level ? to_string(*adj.alert_level) : "none";
        summary["classification"] = to_string(adj.classification);
        summary["next_steps"] = adj.next_steps;
    } else {
        summary["classification"] = to_string(adj.classification);
        ojson tags = ojson::array();
        for (CriterionTag t : adj.criteria_triggered) tags.push_back(render_tag(t));
        summary["criteria_triggered"] = std::move(tags);
        summary["next_steps"] = adj.next_steps;
    }

    std::ostringstream out;
    out << "Classification: " << to_string(adj.classification) << ".\n"
        << "Rationale: " << outcome.rationale << "\n"
        << "Patient message: " << patient_message(adj.classification) << "\n"
        << "JSON:\n```json\n"
        << summary.dump() << "\n```\n";
    return out.str();
}

class ReferenceBackend final : public Backend {
public:
    ReferenceBackend(const std::vector<CaseRecord>& corpus, ThresholdConfig thresholds)
        : thresholds_(thresholds) {
        for (const CaseRecord& record : corpus) cases_.emplace(record.case_id, record);
    }

    ModelResponse complete(const promptkit::PromptBundle& prompt) override {
        auto it = cases_.find(prompt.case_id);
        if (it == cases_.end()) {
            throw BackendError(prompt.case_id, "not present in reference corpus");
        }
        ModelResponse response;
        response.case_id = prompt.case_id;
        response.raw_text = render_reference_answer(
            oracle::adjudicate(it->second, thresholds_), it->second.scenario);
        response.latency_ms = 0;
        response.attempt_count = 1;
        return response;
    }

private:
    std::map<std::string, CaseRecord> cases_;
    ThresholdConfig thresholds_;
};

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(const std::filesystem::path& transcript_path) {
        ResponseSet set = load_transcript(transcript_path);
        meta_ = set.meta;
        for (ModelResponse& response : set.responses) {
            responses_.emplace(response.case_id, std::move(response));
        }
    }

    ModelResponse complete(const promptkit::PromptBundle& prompt) override {
        auto it = responses_.find(prompt.case_id);
        if (it == responses_.end()) {
            throw TranscriptMissError(prompt.case_id, "no transcript entry");
        }
        return it->second;
    }

    const ResponsesMeta& meta() const { return meta_; }

private:
    std::map<std::string, ModelResponse> responses_;
    ResponsesMeta meta_;
};

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL must include a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
        const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str());
        api_key_ = key ? key : "";
        url_ = split_url(cfg_.endpoint_url);
    }

    ModelResponse complete(const promptkit::PromptBundle& prompt) override {
        if (api_key_.empty()) {
            throw BackendError(prompt.case_id,
                               std::string(kApiKeyEnvVar) + " is not set");
        }
        const std::string body = build_chat_request(prompt, cfg_).dump();
        log_request(prompt.case_id, body);

        const auto started = std::chrono::steady_clock::now();
        auto elapsed_ms = [&] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                .count();
        };

        std::string last_failure = "no attempt made";
        for (int attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
            httplib::Client client(url_.base);
            client.set_connection_timeout(std::chrono::milliseconds(
                static_cast<int>(cfg_.timeout_seconds * 1000)));
            client.set_read_timeout(std::chrono::milliseconds(
                static_cast<int>(cfg_.timeout_seconds * 1000)));
            client.set_write_timeout(std::chrono::milliseconds(
                static_cast<int>(cfg_.timeout_seconds * 1000)));
            httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

            auto res = client.Post(url_.path, headers, body, "application/json");
            if (res && res->status >= 200 && res->status < 300) {
                auto content = parse_chat_response(res->body);
                if (!content) {
                    throw BackendError(prompt.case_id,
                                       "response body is not a chat completion: " +
                                           body_excerpt(res->body));
                }
                ModelResponse response;
                response.case_id = prompt.case_id;
                response.raw_text = *content;
                response.latency_ms = elapsed_ms();
                response.attempt_count = attempt;
                return response;
            }

            if (res && !transient_status(res->status)) {
                throw BackendError(prompt.case_id,
                                   "HTTP " + std::to_string(res->status) + ": " +
                                       body_excerpt(res->body));
            }
            last_failure = res ? "HTTP " + std::to_string(res->status) + ": " +
                                     body_excerpt(res->body)
                               : "connection error: " + httplib::to_string(res.error());
            if (attempt <= cfg_.max_retries) {
                std::this_thread::sleep_for(backoff_delay(attempt));
            }
        }
        throw BackendError(prompt.case_id,
                           "failed after " + std::to_string(cfg_.max_retries + 1) +
                               " attempts; last error: " + last_failure);
    }

private:
    std::chrono::milliseconds backoff_delay(int attempt) const {
        std::int64_t base = cfg_.retry_base_delay_ms;
        std::int64_t delay = base << std::min(attempt - 1, 20);
        delay = std::min<std::int64_t>(delay, 30'000);
        thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
        std::uniform_int_distribution<std::int64_t> jitter(0, std::max<std::int64_t>(
                                                                  1, delay / 2));
        return std::chrono::milliseconds(delay + jitter(jitter_rng));
    }

    void log_request(const std::string& case_id, const std::string& body) {
        if (cfg_.request_log_path.empty()) return;
        std::lock_guard<std::mutex> lock(log_mutex_);
        std::ofstream out(cfg_.request_log_path, std::ios::app | std::ios::binary);
        if (!out) throw IoError("cannot open request log: " + cfg_.request_log_path);
        ojson line;
        line["case_id"] = case_id;
        line["request"] = nlohmann::ordered_json::parse(body);
        out << line.dump() << '\n';
    }

    BackendConfig cfg_;
    std::string api_key_;
    ParsedUrl url_;
    std::mutex log_mutex_;
};

}  // namespace

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::http: return "http";
        case BackendKind::replay: return "replay";
        case BackendKind::reference: return "reference";
    }
    return "reference";
}

std::optional<BackendKind> parse_backend_kind(std::string_view s) {
    if (s == "http") return BackendKind::http;
    if (s == "replay") return BackendKind::replay;
    if (s == "reference") return BackendKind::reference;
    return std::nullopt;
}

void BackendConfig::validate() const {
    if (kind == BackendKind::http) {
        if (endpoint_url.empty()) throw ConfigError("http backend requires endpoint_url");
        if (model_name.empty()) throw ConfigError("http backend requires model_name");
    }
    if (kind == BackendKind::replay && transcript_path.empty()) {
        throw ConfigError("replay backend requires transcript_path");
    }
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (timeout_seconds <= 0) throw ConfigError("timeout must be positive");
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                      const std::vector<CaseRecord>& corpus,
                                      const ThresholdConfig& thresholds) {
    cfg.validate();
    switch (cfg.kind) {
        case BackendKind::http: return std::make_unique<HttpBackend>(cfg);
        case BackendKind::replay:
            return std::make_unique<ReplayBackend>(cfg.transcript_path);
        case BackendKind::reference:
            return std::make_unique<ReferenceBackend>(corpus, thresholds);
    }
    throw ConfigError("unknown backend kind");
}

ModelResponse complete(const promptkit::PromptBundle& prompt, const BackendConfig& cfg,
                       const std::vector<CaseRecord>& corpus,
                       const ThresholdConfig& thresholds) {
    return make_backend(cfg, corpus, thresholds)->complete(prompt);
}

ResponseSet run_cases(const std::vector<CaseRecord>& corpus, const BackendConfig& cfg,
                      const promptkit::TemplateSet& templates,
                      const ThresholdConfig& thresholds, int parallelism) {
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    auto backend = make_backend(cfg, corpus, thresholds);

    std::vector<promptkit::PromptBundle> prompts;
    prompts.reserve(corpus.size());
    for (const CaseRecord& record : corpus) {
        prompts.push_back(promptkit::render(record, templates));
    }

    std::vector<ModelResponse> responses(corpus.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < prompts.size();
             i = next.fetch_add(1)) {
            try {
                responses[i] = backend->complete(prompts[i]);
            } catch (const std::exception& ex) {
                ModelResponse failed;
                failed.case_id = prompts[i].case_id;
                failed.error = ex.what();
                failed.attempt_count = cfg.max_retries + 1;
                responses[i] = std::move(failed);
            }
        }
    };

    const auto thread_count = std::min<std::size_t>(
        static_cast<std::size_t>(parallelism), std::max<std::size_t>(1, corpus.size()));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    // Downstream output is order-stable regardless of completion order.
    std::sort(responses.begin(), responses.end(),
              [](const ModelResponse& a, const ModelResponse& b) {
                  return a.case_id < b.case_id;
              });

    ResponseSet set;
    set.responses = std::move(responses);
    if (cfg.kind == BackendKind::replay) {
        set.meta = static_cast<ReplayBackend*>(backend.get())->meta();
    } else {
        set.meta.backend_kind = to_string(cfg.kind);
        set.meta.backend_hash = backend_config_hash(cfg);
        set.meta.template_version = templates.version();
    }
    return set;
}

void record(const ResponseSet& responses, const std::filesystem::path& path) {
    std::set<std::string> seen;
    for (const ModelResponse& response : responses.responses) {
        if (!seen.insert(response.case_id).second) {
            throw Error("duplicate case_id in responses: " + response.case_id);
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());

    ojson meta;
    meta["record"] = "meta";
    meta["format"] = responses.meta.format;
    meta["backend_kind"] = responses.meta.backend_kind;
    meta["backend_hash"] = responses.meta.backend_hash;
    meta["template_version"] = responses.meta.template_version;
    out << meta.dump() << '\n';

    for (const ModelResponse& response : responses.responses) {
        ojson line;
        line["case_id"] = response.case_id;
        line["raw_text"] = response.raw_text;
        line["latency_ms"] = response.latency_ms;
        line["attempt_count"] = response.attempt_count;
        if (!response.error.empty()) line["error"] = response.error;
        out << line.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

ResponseSet load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open transcript: " + path.string());

    ResponseSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw IoError("transcript line " + std::to_string(line_no) +
                          " is not valid JSON: " + ex.what());
        }
        if (j.value("record", "") == "meta") {
            set.meta.format = j.value("format", set.meta.format);
            set.meta.backend_kind = j.value("backend_kind", "");
            set.meta.backend_hash = j.value("backend_hash", "");
            set.meta.template_version = j.value("template_version", "");
            continue;
        }
        ModelResponse response;
        if (!j.contains("case_id") || !j["case_id"].is_string()) {
            throw IoError("transcript line " + std::to_string(line_no) +
                          " has no case_id");
        }
        response.case_id = j["case_id"].get<std::string>();
        response.raw_text = j.value("raw_text", "");
        response.latency_ms = j.value("latency_ms", std::int64_t{0});
        response.attempt_count = j.value("attempt_count", 1);
        response.error = j.value("error", "");
        set.responses.push_back(std::move(response));
    }
    return set;
}

std::string backend_config_hash(const BackendConfig& cfg) {
    ojson j;
    j["kind"] = to_string(cfg.kind);
    j["endpoint_url"] = cfg.endpoint_url;
    j["model_name"] = cfg.model_name;
    j["temperature"] = cfg.temperature;
    j["max_retries"] = cfg.max_retries;
    j["timeout_seconds"] = cfg.timeout_seconds;
    j["transcript_path"] = cfg.transcript_path;
    return fnv1a_hex(j.dump());
}

nlohmann::ordered_json build_chat_request(const promptkit::PromptBundle& prompt,
                                          const BackendConfig& cfg) {
    ojson body;
    body["model"] = cfg.model_name;
    ojson messages = ojson::array();
    ojson system;
    system["role"] = "system";
    system["content"] = prompt.system;
    messages.push_back(std::move(system));
    ojson user;
    user["role"] = "user";
    user["content"] = prompt.user;
    messages.push_back(std::move(user));
    body["messages"] = std::move(messages);
    body["temperature"] = cfg.temperature;
    return body;
}

std::optional<std::string> parse_chat_response(const std::string& body) {
    auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        return std::nullopt;
    }
    const auto& first = j["choices"][0];
    if (!first.is_object() || !first.contains("message")) return std::nullopt;
    const auto& message = first["message"];
    if (!message.is_object() || !message.contains("content") ||
        !message["content"].is_string()) {
        return std::nullopt;
    }
    return message["content"].get<std::string>();
}

}  // namespace diabench::backends
