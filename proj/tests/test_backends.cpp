#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "diabench/backends.hpp"
#include "diabench/casegen.hpp"
#include "diabench/extraction.hpp"
#include "diabench/jsonl.hpp"
#include "diabench/oracle.hpp"

using namespace diabench;
namespace fs = std::filesystem;

namespace {

backends::BackendConfig reference_config() {
    backends::BackendConfig cfg;
    cfg.kind = backends::BackendKind::reference;
    return cfg;
}

promptkit::PromptBundle prompt_for(const CaseRecord& record) {
    return promptkit::render(record);
}

const CaseRecord& fixture(const std::string& id) {
    static const auto corpus = casegen::paper_fixture_corpus();
    for (const auto& record : corpus) {
        if (record.case_id == id) return record;
    }
    throw std::runtime_error("no fixture " + id);
}

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

/// Minimal chat-completions stub. Echoes a canned reply and can fail the
/// first N requests with a given status.
class StubServer {
public:
    explicit StubServer(std::string reply, int fail_first = 0, int fail_status = 500)
        : reply_(std::move(reply)), fail_remaining_(fail_first) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         last_auth_ = req.get_header_value("Authorization");
                         last_body_ = req.body;
                         ++hits_;
                         if (fail_remaining_ > 0) {
                             --fail_remaining_;
                             res.status = fail_status_;
                             res.set_content("transient failure", "text/plain");
                             return;
                         }
                         nlohmann::json body;
                         body["choices"] = {
                             {{"message", {{"role", "assistant"},
                                           {"content", reply_}}}}};
                         res.set_content(body.dump(), "application/json");
                     });
        fail_status_ = fail_status;
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }
    int hits() const { return hits_; }
    std::string last_auth() const { return last_auth_; }
    std::string last_body() const { return last_body_; }

private:
    httplib::Server server_;
    std::thread thread_;
    std::string reply_;
    std::atomic<int> fail_remaining_;
    int fail_status_ = 500;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::string last_auth_;
    std::string last_body_;
};

backends::BackendConfig http_config(const std::string& endpoint) {
    backends::BackendConfig cfg;
    cfg.kind = backends::BackendKind::http;
    cfg.endpoint_url = endpoint;
    cfg.model_name = "test-model";
    cfg.max_retries = 3;
    cfg.retry_base_delay_ms = 1;  // keep test backoff in the millisecond range
    cfg.timeout_seconds = 5.0;
    return cfg;
}

}  // namespace

TEST_CASE("backend config validation") {
    backends::BackendConfig cfg;
    cfg.kind = backends::BackendKind::http;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // endpoint missing
    cfg.endpoint_url = "http://example.test/v1/chat/completions";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // model missing
    cfg.model_name = "m";
    CHECK_NOTHROW(cfg.validate());

    backends::BackendConfig replay;
    replay.kind = backends::BackendKind::replay;
    CHECK_THROWS_AS(replay.validate(), ConfigError);
    replay.transcript_path = "somewhere.jsonl";
    CHECK_NOTHROW(replay.validate());
}

TEST_CASE("reference backend renders compliant four-part answers") {
    const auto corpus = casegen::paper_fixture_corpus();

    auto p010 = backends::complete(prompt_for(fixture("P010")), reference_config(),
                                   corpus);
    CHECK(p010.raw_text.find("\"classification\":\"gestational_diabetes\"") !=
          std::string::npos);
    CHECK(p010.raw_text.find("Patient message:") != std::string::npos);
    CHECK(p010.attempt_count == 1);

    auto week3 = backends::complete(prompt_for(fixture("P007-W3")),
                                    reference_config(), corpus);
    CHECK(week3.raw_text.find("\"alert_level\":\"alert\"") != std::string::npos);
    CHECK(week3.raw_text.find("\"week\":3") != std::string::npos);
}

TEST_CASE("reference answers extract back to the oracle adjudication") {
    // End-to-end identity over the fixtures plus generated corpora.
    std::vector<CaseRecord> corpus = casegen::paper_fixture_corpus();
    for (int s = 0; s < 5; ++s) {
        casegen::GenSpec spec;
        spec.scenario = static_cast<Scenario>(s);
        spec.count = 10;
        spec.seed = 50 + static_cast<std::uint64_t>(s);
        auto generated = casegen::generate(spec);
        corpus.insert(corpus.end(), generated.begin(), generated.end());
    }

    auto backend = backends::make_backend(reference_config(), corpus);
    for (const CaseRecord& record : corpus) {
        auto response = backend->complete(prompt_for(record));
        auto extracted = extraction::extract(response.raw_text, record.scenario);
        REQUIRE(extracted.verdict == extraction::Verdict::ok);
        REQUIRE(*extracted.adjudication == record.ground_truth);
    }
}

TEST_CASE("reference backend errors on unknown cases") {
    auto backend = backends::make_backend(reference_config(),
                                          casegen::paper_fixture_corpus());
    promptkit::PromptBundle bogus;
    bogus.case_id = "P999";
    bogus.system = "s";
    bogus.user = "u";
    CHECK_THROWS_AS(backend->complete(bogus), backends::BackendError);
}

TEST_CASE("record and replay round-trip byte-exactly") {
    const auto corpus = casegen::paper_fixture_corpus();
    backends::ResponseSet run = backends::run_cases(
        corpus, reference_config(), promptkit::TemplateSet::builtin(), {}, 4);
    REQUIRE(run.responses.size() == corpus.size());

    const fs::path path = temp_file("diabench_transcript_test.jsonl");
    backends::record(run, path);

    backends::BackendConfig replay_cfg;
    replay_cfg.kind = backends::BackendKind::replay;
    replay_cfg.transcript_path = path.string();
    backends::ResponseSet replayed = backends::run_cases(
        corpus, replay_cfg, promptkit::TemplateSet::builtin(), {}, 4);

    REQUIRE(replayed.responses.size() == run.responses.size());
    for (std::size_t i = 0; i < run.responses.size(); ++i) {
        CHECK(replayed.responses[i] == run.responses[i]);
    }
    // Replay preserves the original run's provenance.
    CHECK(replayed.meta == run.meta);
    fs::remove(path);
}

TEST_CASE("replay misses raise a transcript error") {
    const fs::path path = temp_file("diabench_partial_transcript.jsonl");
    backends::ResponseSet partial;
    partial.meta.backend_kind = "reference";
    partial.responses.push_back({"P004", "text", 0, 1, ""});
    backends::record(partial, path);

    backends::BackendConfig cfg;
    cfg.kind = backends::BackendKind::replay;
    cfg.transcript_path = path.string();
    auto backend = backends::make_backend(cfg);

    promptkit::PromptBundle hit;
    hit.case_id = "P004";
    CHECK(backend->complete(hit).raw_text == "text");

    promptkit::PromptBundle miss;
    miss.case_id = "P005";
    CHECK_THROWS_AS(backend->complete(miss), backends::TranscriptMissError);
    fs::remove(path);
}

TEST_CASE("transcripts reject duplicates and support empty runs") {
    const fs::path path = temp_file("diabench_dup_transcript.jsonl");
    backends::ResponseSet dup;
    dup.responses.push_back({"A", "1", 0, 1, ""});
    dup.responses.push_back({"A", "2", 0, 1, ""});
    CHECK_THROWS_AS(backends::record(dup, path), Error);

    backends::ResponseSet empty;
    empty.meta.backend_kind = "reference";
    backends::record(empty, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1);  // header only

    auto loaded = backends::load_transcript(path);
    CHECK(loaded.responses.empty());
    CHECK(loaded.meta.backend_kind == "reference");
    fs::remove(path);
}

TEST_CASE("chat request carries the exact prompt and settings") {
    promptkit::PromptBundle prompt;
    prompt.system = "system line";
    prompt.user = "user line with {braces}";
    prompt.case_id = "X";

    auto cfg = http_config("http://example.test/v1/chat/completions");
    cfg.temperature = 0.25;
    auto body = backends::build_chat_request(prompt, cfg);
    CHECK(body["model"] == "test-model");
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "system line");
    CHECK(body["messages"][1]["role"] == "user");
    // Prompt text is never mutated on its way to the wire.
    CHECK(body["messages"][1]["content"] == "user line with {braces}");
    CHECK(body["temperature"] == 0.25);
}

TEST_CASE("chat response parsing") {
    CHECK(backends::parse_chat_response(
              R"({"choices":[{"message":{"content":"hello"}}]})") == "hello");
    CHECK_FALSE(backends::parse_chat_response("{}").has_value());
    CHECK_FALSE(backends::parse_chat_response("not json").has_value());
    CHECK_FALSE(backends::parse_chat_response(R"({"choices":[]})").has_value());
}

TEST_CASE("backend hash is deterministic and config-sensitive") {
    auto cfg = http_config("http://example.test/v1");
    CHECK(backends::backend_config_hash(cfg) == backends::backend_config_hash(cfg));
    auto other = cfg;
    other.model_name = "different";
    CHECK(backends::backend_config_hash(cfg) != backends::backend_config_hash(other));
}

TEST_CASE("http backend completes against a live endpoint") {
    setenv("LLM_API_KEY", "test-secret", 1);
    StubServer server("stub reply text");
    auto cfg = http_config(server.endpoint());

    promptkit::PromptBundle prompt = prompt_for(fixture("P004"));
    auto response = backends::complete(prompt, cfg);
    CHECK(response.raw_text == "stub reply text");
    CHECK(response.attempt_count == 1);
    CHECK(server.last_auth() == "Bearer test-secret");
    // The posted body is the exact chat request.
    CHECK(server.last_body() == backends::build_chat_request(prompt, cfg).dump());
}

TEST_CASE("http backend retries transient failures with backoff") {
    setenv("LLM_API_KEY", "test-secret", 1);
    StubServer server("eventual success", /*fail_first=*/2, /*fail_status=*/500);
    auto cfg = http_config(server.endpoint());

    auto response = backends::complete(prompt_for(fixture("P004")), cfg);
    CHECK(response.raw_text == "eventual success");
    CHECK(response.attempt_count == 3);
    CHECK(server.hits() == 3);
}

TEST_CASE("http backend gives up after max retries") {
    setenv("LLM_API_KEY", "test-secret", 1);
    StubServer server("never", /*fail_first=*/100, /*fail_status=*/503);
    auto cfg = http_config(server.endpoint());
    cfg.max_retries = 2;

    CHECK_THROWS_AS(backends::complete(prompt_for(fixture("P004")), cfg),
                    backends::BackendError);
    CHECK(server.hits() == 3);  // initial try + 2 retries
}

TEST_CASE("http backend surfaces non-transient statuses with a body excerpt") {
    setenv("LLM_API_KEY", "test-secret", 1);
    StubServer server("unused", /*fail_first=*/100, /*fail_status=*/400);
    auto cfg = http_config(server.endpoint());

    try {
        backends::complete(prompt_for(fixture("P004")), cfg);
        FAIL("expected BackendError");
    } catch (const backends::BackendError& ex) {
        CHECK(std::string(ex.what()).find("400") != std::string::npos);
        CHECK(std::string(ex.what()).find("transient failure") != std::string::npos);
        CHECK(ex.case_id == "P004");
    }
    CHECK(server.hits() == 1);  // no retry on a plain 400
}

TEST_CASE("http backend requires the API key") {
    unsetenv("LLM_API_KEY");
    auto cfg = http_config("http://127.0.0.1:9/v1/chat/completions");
    CHECK_THROWS_AS(backends::complete(prompt_for(fixture("P004")), cfg),
                    backends::BackendError);
}

TEST_CASE("request log mirrors exact payloads") {
    setenv("LLM_API_KEY", "test-secret", 1);
    StubServer server("ok");
    const fs::path log = temp_file("diabench_request_log.jsonl");
    fs::remove(log);
    auto cfg = http_config(server.endpoint());
    cfg.request_log_path = log.string();

    auto prompt = prompt_for(fixture("P005"));
    backends::complete(prompt, cfg);

    std::ifstream in(log);
    std::string line;
    REQUIRE(std::getline(in, line));
    auto logged = nlohmann::json::parse(line);
    CHECK(logged["case_id"] == "P005");
    CHECK(logged["request"]["messages"][1]["content"] == prompt.user);
    // Credentials never reach the log.
    CHECK(line.find("test-secret") == std::string::npos);
    fs::remove(log);
}

TEST_CASE("run_cases orders results by case_id and records failures") {
    auto corpus = casegen::paper_fixture_corpus();
    // Deliberately shuffle the corpus; output order must not follow it.
    std::rotate(corpus.begin(), corpus.begin() + 5, corpus.end());

    auto run = backends::run_cases(corpus, reference_config(),
                                   promptkit::TemplateSet::builtin(), {}, 3);
    REQUIRE(run.responses.size() == corpus.size());
    for (std::size_t i = 1; i < run.responses.size(); ++i) {
        CHECK(run.responses[i - 1].case_id < run.responses[i].case_id);
    }
    for (const auto& response : run.responses) CHECK(response.error.empty());

    // Replay against a transcript that lacks some cases: failures are
    // recorded per-case and the run continues.
    const fs::path path = temp_file("diabench_missing_transcript.jsonl");
    backends::ResponseSet partial = run;
    partial.responses.resize(4);
    backends::record(partial, path);

    backends::BackendConfig replay_cfg;
    replay_cfg.kind = backends::BackendKind::replay;
    replay_cfg.transcript_path = path.string();
    auto degraded = backends::run_cases(corpus, replay_cfg,
                                        promptkit::TemplateSet::builtin(), {}, 4);
    int failures = 0;
    for (const auto& response : degraded.responses) {
        if (!response.error.empty()) ++failures;
    }
    CHECK(failures == static_cast<int>(corpus.size()) - 4);
    fs::remove(path);
}
