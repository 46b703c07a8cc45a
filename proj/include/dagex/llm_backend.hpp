#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dagex/errors.hpp"

namespace dagex {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 2048;
    std::vector<std::string> stop;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

using ChunkCallback = std::function<void(std::string_view)>;

// Uniform completion interface: HTTP chat endpoint, scripted test
// double, or arbitrary callback. Implementations are shareable across
// concurrent tasks.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string complete(const CompletionRequest& req) = 0;

    // Delivers ordered chunks whose concatenation equals the returned
    // full text. Default: the full text as one chunk.
    virtual std::string complete_streaming(const CompletionRequest& req,
                                           const ChunkCallback& on_chunk);

    virtual TokenUsage last_usage() const { return {}; }
};

enum class TokenSplit { Whitespace, Line, Char };

struct ScriptedRule {
    std::string match; // substring applied to the prompt
    std::string response;
    std::chrono::milliseconds delay{0}; // inter-chunk delay
    TokenSplit split = TokenSplit::Whitespace;
};

// Deterministic backend: first matching rule wins; no match is a
// ScriptMiss. Streaming sleeps `delay` between consecutive chunks;
// complete() sleeps the same total so batch and streamed planning share
// one generation-time model.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptedRule> rules)
        : rules_(std::move(rules)) {}

    std::string complete(const CompletionRequest& req) override;
    std::string complete_streaming(const CompletionRequest& req,
                                   const ChunkCallback& on_chunk) override;
    TokenUsage last_usage() const override { return usage_; }

    // Splits text into chunks per the rule granularity, delimiters kept.
    static std::vector<std::string> tokenize(const std::string& text, TokenSplit split);

private:
    const ScriptedRule& match(const CompletionRequest& req) const;

    std::vector<ScriptedRule> rules_;
    TokenUsage usage_;
};

// Wraps an arbitrary function as a backend.
class CallbackBackend : public Backend {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}

    std::string complete(const CompletionRequest& req) override { return fn_(req); }

private:
    Fn fn_;
};

struct HttpBackendConfig {
    std::string base_url;   // e.g. http://localhost:8080
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;    // resolved from the environment by the caller
    int max_retries = 3;    // on 429/5xx
    std::chrono::milliseconds backoff_base{1000};
};

// Chat-completion HTTP client; streaming consumes server-sent
// incremental deltas.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string complete(const CompletionRequest& req) override;
    std::string complete_streaming(const CompletionRequest& req,
                                   const ChunkCallback& on_chunk) override;
    TokenUsage last_usage() const override { return usage_; }

private:
    std::string request(const CompletionRequest& req, bool stream,
                        const ChunkCallback& on_chunk);

    HttpBackendConfig config_;
    TokenUsage usage_;
};

// Loads scripted rules from a JSON array:
// [{"match": "...", "response": "...", "delay_ms": 0, "split": "whitespace"}]
std::vector<ScriptedRule> load_scripted_rules(const std::string& path);

} // namespace dagex
