#ifndef DIABENCH_BACKENDS_HPP
#define DIABENCH_BACKENDS_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "diabench/domain.hpp"
#include "diabench/promptkit.hpp"

namespace diabench::backends {

enum class BackendKind { http, replay, reference };
std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view s);

/// Name of the environment variable holding the bearer token for the http
/// backend. Its value is never written to logs, manifests or transcripts.
inline constexpr std::string_view kApiKeyEnvVar = "LLM_API_KEY";

struct BackendConfig {
    BackendKind kind = BackendKind::reference;
    std::string endpoint_url;      // http: full chat-completions URL
    std::string model_name;        // http
    double temperature = 0.0;
    int max_retries = 3;
    double timeout_seconds = 60.0;
    std::string transcript_path;   // replay
    std::string request_log_path;  // http: optional JSONL mirror of exact payloads
    int retry_base_delay_ms = 1000;

    /// http requires endpoint_url and model_name; replay requires
    /// transcript_path. Throws ConfigError.
    void validate() const;
};

struct ModelResponse {
    std::string case_id;
    std::string raw_text;  // preserved byte-exactly
    std::int64_t latency_ms = 0;
    int attempt_count = 1;
    std::string error;  // non-empty when the case failed

    bool operator==(const ModelResponse&) const = default;
};

/// Failure completing one case; carries the case id.
struct BackendError : Error {
    BackendError(std::string case_id_, const std::string& message)
        : Error("case " + case_id_ + ": " + message), case_id(std::move(case_id_)) {}
    std::string case_id;
};

/// Replay backend asked for a case the transcript does not contain.
struct TranscriptMissError : BackendError {
    using BackendError::BackendError;
};

class Backend {
public:
    virtual ~Backend() = default;
    /// Thread-safe; invocations may run concurrently.
    virtual ModelResponse complete(const promptkit::PromptBundle& prompt) = 0;
};

/// Provenance header of a responses/transcript file. Replay runs copy the
/// source transcript's provenance so a rescored replay is indistinguishable
/// from the original run.
struct ResponsesMeta {
    std::string format = "diabench.responses.v1";
    std::string backend_kind;
    std::string backend_hash;
    std::string template_version;

    bool operator==(const ResponsesMeta&) const = default;
};

struct ResponseSet {
    ResponsesMeta meta;
    std::vector<ModelResponse> responses;
};

/// The corpus is needed by the reference backend (it answers from the
/// oracle, keyed by case_id). Other kinds ignore it.
std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                      const std::vector<CaseRecord>& corpus = {},
                                      const ThresholdConfig& thresholds = {});

/// One-shot convenience wrapper over make_backend + Backend::complete.
ModelResponse complete(const promptkit::PromptBundle& prompt, const BackendConfig& cfg,
                       const std::vector<CaseRecord>& corpus = {},
                       const ThresholdConfig& thresholds = {});

/// Renders every case, invokes the backend with at most `parallelism`
/// concurrent requests, and returns responses ordered by case_id. Per-case
/// failures are recorded in ModelResponse::error; the run continues.
ResponseSet run_cases(const std::vector<CaseRecord>& corpus, const BackendConfig& cfg,
                      const promptkit::TemplateSet& templates,
                      const ThresholdConfig& thresholds, int parallelism);

/// JSONL transcript: meta header line plus one response per line, replayable
/// bit-exactly. Duplicate case ids are rejected.
void record(const ResponseSet& responses, const std::filesystem::path& path);
ResponseSet load_transcript(const std::filesystem::path& path);

/// Deterministic fingerprint of a backend configuration (no credentials).
std::string backend_config_hash(const BackendConfig& cfg);

/// Chat-completions request body: {model, messages[{role,content}],
/// temperature}. Exposed so tests can pin the wire shape without a server.
nlohmann::ordered_json build_chat_request(const promptkit::PromptBundle& prompt,
                                          const BackendConfig& cfg);

/// Content of the first choice's message, or nullopt if the shape is wrong.
std::optional<std::string> parse_chat_response(const std::string& body);

}  // namespace diabench::backends

#endif  // DIABENCH_BACKENDS_HPP
