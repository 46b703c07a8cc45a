#include <doctest.h>

#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dagex/config.hpp"
#include "dagex/llm_backend.hpp"
#include "dagex/tools_builtin.hpp"
#include "test_helpers.hpp"

using namespace dagex;
using namespace std::chrono_literals;
using nlohmann::json;

TEST_CASE("scripted backend matches first rule by substring") {
    ScriptedBackend backend({{"alpha", "A", 0ms, TokenSplit::Whitespace},
                             {"", "fallback", 0ms, TokenSplit::Whitespace}});
    CompletionRequest req;
    req.prompt = "has alpha inside";
    CHECK(backend.complete(req) == "A");
    req.prompt = "nothing special";
    CHECK(backend.complete(req) == "fallback");

    ScriptedBackend strict({{"alpha", "A", 0ms, TokenSplit::Whitespace}});
    CHECK_THROWS_AS(strict.complete(req), Error);
}

TEST_CASE("tokenize granularities reassemble the original text") {
    std::string text = "one two\nthree\n";
    for (auto split : {TokenSplit::Whitespace, TokenSplit::Line, TokenSplit::Char}) {
        std::string joined;
        for (const auto& chunk : ScriptedBackend::tokenize(text, split)) joined += chunk;
        CHECK(joined == text);
    }
    CHECK(ScriptedBackend::tokenize(text, TokenSplit::Line).size() == 2);
    CHECK(ScriptedBackend::tokenize(text, TokenSplit::Char).size() == text.size());
}

TEST_CASE("scripted streaming sleeps only between chunks") {
    // 3 lines -> 2 inter-chunk delays of 50ms each.
    ScriptedBackend backend({{"", "a\nb\nc\n", 50ms, TokenSplit::Line}});
    CompletionRequest req;
    req.prompt = "x";

    auto start = std::chrono::steady_clock::now();
    std::string streamed;
    backend.complete_streaming(req, [&](std::string_view c) { streamed += c; });
    auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(streamed == "a\nb\nc\n");
    CHECK(elapsed >= 100ms);
    CHECK(elapsed < 250ms);

    // complete() models the same total generation time
    start = std::chrono::steady_clock::now();
    CHECK(backend.complete(req) == "a\nb\nc\n");
    elapsed = std::chrono::steady_clock::now() - start;
    CHECK(elapsed >= 100ms);
    CHECK(elapsed < 250ms);
}

TEST_CASE("scripted rules load from JSON") {
    auto rules = load_scripted_rules(testutil::data_path("rules/planner.json"));
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].match == "same nationality");
    CHECK(rules[0].split == TokenSplit::Line);
}

namespace {

struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    StubServer() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            ++hits;
            json body = json::parse(req.body);
            std::string prompt = body["messages"][0]["content"];
            if (prompt.find("rate-limit-once") != std::string::npos && hits == 1) {
                res.status = 429;
                return;
            }
            if (body.value("stream", false)) {
                std::string sse;
                for (const char* piece : {"hello ", "world"}) {
                    json chunk;
                    chunk["choices"][0]["delta"]["content"] = piece;
                    sse += "data: " + chunk.dump() + "\n\n";
                }
                sse += "data: [DONE]\n\n";
                res.set_content(sse, "text/event-stream");
                return;
            }
            json out;
            out["choices"][0]["message"]["content"] = "hello world";
            out["usage"]["prompt_tokens"] = 3;
            out["usage"]["completion_tokens"] = 2;
            res.set_content(out.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }

    HttpBackendConfig config() const {
        HttpBackendConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port);
        c.model = "test-model";
        c.backoff_base = 10ms;
        return c;
    }
};

} // namespace

TEST_CASE("http backend completes, streams, and reports usage") {
    StubServer stub;
    HttpBackend backend(stub.config());
    CompletionRequest req;
    req.prompt = "hi";
    CHECK(backend.complete(req) == "hello world");
    CHECK(backend.last_usage().prompt_tokens == 3);

    std::string streamed;
    std::string full =
        backend.complete_streaming(req, [&](std::string_view c) { streamed += c; });
    CHECK(full == "hello world");
    CHECK(streamed == full);
}

TEST_CASE("http backend retries a 429 then succeeds") {
    StubServer stub;
    HttpBackend backend(stub.config());
    CompletionRequest req;
    req.prompt = "rate-limit-once";
    CHECK(backend.complete(req) == "hello world");
    CHECK(stub.hits == 2);
}

TEST_CASE("http backend surfaces unreachable endpoints") {
    HttpBackendConfig c;
    c.base_url = "http://127.0.0.1:9"; // discard port, nothing listens
    c.backoff_base = 1ms;
    HttpBackend backend(c);
    CompletionRequest req;
    req.prompt = "hi";
    CHECK_THROWS_AS(backend.complete(req), Error);
}

TEST_CASE("corpus lookup: exact, fuzzy, and miss") {
    Corpus corpus = Corpus::load(testutil::data_path("corpus.json"));
    REQUIRE(corpus.lookup("Scott Derrickson") != nullptr);
    REQUIRE(corpus.lookup("scott derrickson") != nullptr); // case-insensitive
    const auto* fuzzy = corpus.lookup("Derrickson Scott biography");
    REQUIRE(fuzzy != nullptr);
    CHECK(fuzzy->title == "Scott Derrickson");
    CHECK(corpus.lookup("completely unrelated query zzz") == nullptr);
}

TEST_CASE("eval_math agrees with a shunting-yard oracle") {
    for (const char* expr : {"1 + 2 * 3", "(1 + 2) * 3", "10 / 4", "2.5 * 4",
                             "1 + 2 + 3 + 4", "(8 - 2) / (1 + 2)", "7 * (6 - 6 / 2)"}) {
        CHECK(eval_math(expr) == testutil::shunting_yard(expr));
    }
    CHECK(eval_math("-3 + 5") == Rational(2));
    CHECK_THROWS_AS(eval_math("1 +"), Error);
    CHECK_THROWS_AS(eval_math("1 / 0"), Error);
    CHECK_THROWS_AS(eval_math("two plus two"), Error);
}

TEST_CASE("builtin tools run through the registry") {
    auto corpus =
        std::make_shared<Corpus>(Corpus::load(testutil::data_path("corpus.json")));
    ToolRegistry registry;
    register_builtin_tools(registry, corpus);
    REQUIRE(registry.contains("search"));
    REQUIRE(registry.contains("math"));

    TaskMemory memory;
    Value hit = registry.find("search")->run({Value::make_text("Ed Wood")}, memory);
    CHECK(hit.text.find("American") != std::string::npos);
    CHECK_THROWS_AS(
        registry.find("search")->run({Value::make_text("zzz unknown")}, memory),
        Error);

    Value ratio = registry.find("math")->run({Value::make_text("6 / 4")}, memory);
    CHECK(ratio.kind == Value::Kind::Number);
    CHECK(ratio.number == doctest::Approx(1.5));
}

TEST_CASE("config file parses sections, types, arrays, comments") {
    ConfigFile cfg = ConfigFile::parse(
        "top = 1\n"
        "[engine] # trailing comment\n"
        "max_replans = 4\n"
        "streaming = true\n"
        "ratio = 0.5\n"
        "name = \"with # inside\"\n"
        "files = [\"a.txt\", \"b.txt\"]\n");
    CHECK(cfg.get_int("top") == 1);
    CHECK(cfg.get_int("engine.max_replans") == 4);
    CHECK(cfg.get_bool("engine.streaming") == true);
    CHECK(cfg.get_double("engine.ratio") == doctest::Approx(0.5));
    CHECK(cfg.get_string("engine.name") == "with # inside");
    CHECK(cfg.get_string_array("engine.files") ==
          std::vector<std::string>{"a.txt", "b.txt"});
    CHECK_FALSE(cfg.get_int("engine.missing").has_value());
    CHECK_THROWS_AS(ConfigFile::parse("just a line\n"), Error);
}

TEST_CASE("engine setup builds from the shipped configs") {
    EngineSetup demo = build_engine_setup(testutil::data_path("dagex.toml"));
    CHECK(demo.registry.contains("search"));
    CHECK(demo.registry.contains("math"));
    CHECK(demo.run_config.planner != nullptr);

    EngineSetup g24 = build_engine_setup(testutil::data_path("game24.toml"));
    CHECK(g24.registry.contains("thought_proposer"));
    CHECK(g24.run_config.max_replans == 4);
    CHECK(g24.run_config.planner_examples.size() == 2);
}
