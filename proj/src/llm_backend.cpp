#include "dagex/llm_backend.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace dagex {

using nlohmann::json;

std::string Backend::complete_streaming(const CompletionRequest& req,
                                        const ChunkCallback& on_chunk) {
    std::string full = complete(req);
    if (!full.empty()) on_chunk(full);
    return full;
}

std::vector<std::string> ScriptedBackend::tokenize(const std::string& text,
                                                   TokenSplit split) {
    std::vector<std::string> chunks;
    switch (split) {
    case TokenSplit::Char:
        for (char c : text) chunks.emplace_back(1, c);
        break;
    case TokenSplit::Line: {
        size_t start = 0;
        while (start < text.size()) {
            size_t nl = text.find('\n', start);
            if (nl == std::string::npos) {
                chunks.push_back(text.substr(start));
                break;
            }
            chunks.push_back(text.substr(start, nl - start + 1));
            start = nl + 1;
        }
        break;
    }
    case TokenSplit::Whitespace: {
        // words and whitespace runs alternate; both are chunks
        size_t i = 0;
        while (i < text.size()) {
            size_t start = i;
            bool ws = isspace(static_cast<unsigned char>(text[i])) != 0;
            while (i < text.size() &&
                   (isspace(static_cast<unsigned char>(text[i])) != 0) == ws) {
                ++i;
            }
            chunks.push_back(text.substr(start, i - start));
        }
        break;
    }
    }
    return chunks;
}

const ScriptedRule& ScriptedBackend::match(const CompletionRequest& req) const {
    for (const auto& rule : rules_) {
        if (req.prompt.find(rule.match) != std::string::npos) return rule;
    }
    throw Error(ErrorCode::ScriptMiss,
                "no rule matches prompt: " + req.prompt.substr(0, 80));
}

std::string ScriptedBackend::complete(const CompletionRequest& req) {
    const ScriptedRule& rule = match(req);
    auto chunks = tokenize(rule.response, rule.split);
    if (chunks.size() > 1 && rule.delay.count() > 0) {
        std::this_thread::sleep_for(rule.delay * (chunks.size() - 1));
    }
    usage_.prompt_tokens = static_cast<int>(tokenize(req.prompt, TokenSplit::Whitespace).size());
    usage_.completion_tokens = static_cast<int>(chunks.size());
    return rule.response;
}

std::string ScriptedBackend::complete_streaming(const CompletionRequest& req,
                                                const ChunkCallback& on_chunk) {
    const ScriptedRule& rule = match(req);
    auto chunks = tokenize(rule.response, rule.split);
    for (size_t i = 0; i < chunks.size(); ++i) {
        if (i > 0 && rule.delay.count() > 0) std::this_thread::sleep_for(rule.delay);
        on_chunk(chunks[i]);
    }
    usage_.prompt_tokens = static_cast<int>(tokenize(req.prompt, TokenSplit::Whitespace).size());
    usage_.completion_tokens = static_cast<int>(chunks.size());
    return rule.response;
}

namespace {

json build_request_body(const HttpBackendConfig& config, const CompletionRequest& req,
                        bool stream) {
    json body;
    body["model"] = config.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", req.prompt}}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (!req.stop.empty()) body["stop"] = req.stop;
    body["stream"] = stream;
    return body;
}

} // namespace

std::string HttpBackend::request(const CompletionRequest& req, bool stream,
                                 const ChunkCallback& on_chunk) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    std::string body = build_request_body(config_, req, stream).dump();

    for (int attempt = 0;; ++attempt) {
        std::string full_text;
        std::string sse_buffer;
        bool saw_done = false;

        auto handle_sse_line = [&](const std::string& line) {
            if (line.rfind("data:", 0) != 0) return;
            std::string payload = line.substr(5);
            size_t start = payload.find_first_not_of(' ');
            payload = start == std::string::npos ? "" : payload.substr(start);
            if (payload == "[DONE]") {
                saw_done = true;
                return;
            }
            json j = json::parse(payload, nullptr, false);
            if (j.is_discarded()) return;
            if (j.contains("usage") && j["usage"].is_object()) {
                usage_.prompt_tokens = j["usage"].value("prompt_tokens", 0);
                usage_.completion_tokens = j["usage"].value("completion_tokens", 0);
            }
            if (!j.contains("choices") || j["choices"].empty()) return;
            const auto& delta = j["choices"][0].contains("delta")
                                    ? j["choices"][0]["delta"]
                                    : j["choices"][0];
            if (delta.contains("content") && delta["content"].is_string()) {
                std::string chunk = delta["content"].get<std::string>();
                if (!chunk.empty()) {
                    full_text += chunk;
                    if (on_chunk) on_chunk(chunk);
                }
            }
        };

        httplib::Result res;
        if (stream) {
            httplib::Request http_req;
            http_req.method = "POST";
            http_req.path = config_.path;
            http_req.headers = headers;
            http_req.body = body;
            http_req.set_header("Content-Type", "application/json");
            http_req.content_receiver = [&](const char* data, size_t len, uint64_t,
                                            uint64_t) {
                sse_buffer.append(data, len);
                size_t nl;
                while ((nl = sse_buffer.find('\n')) != std::string::npos) {
                    std::string line = sse_buffer.substr(0, nl);
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    sse_buffer.erase(0, nl + 1);
                    handle_sse_line(line);
                }
                return true;
            };
            res = client.send(http_req);
        } else {
            res = client.Post(config_.path, headers, body, "application/json");
        }

        int status = res ? res->status : 0;
        bool retryable = !res || status == 429 || status >= 500;
        if (retryable && attempt < config_.max_retries - 1) {
            auto backoff = config_.backoff_base * (1 << attempt);
            std::this_thread::sleep_for(backoff);
            continue;
        }
        if (!res) {
            throw Error(ErrorCode::BackendUnavailable,
                        "no response from " + config_.base_url);
        }
        if (status == 429) {
            throw Error(ErrorCode::RateLimited, "rate limited after retries");
        }
        if (status >= 400) {
            throw Error(ErrorCode::BackendUnavailable,
                        "HTTP " + std::to_string(status) + ": " + res->body);
        }

        if (stream) {
            (void)saw_done;
            return full_text;
        }

        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
            throw Error(ErrorCode::ProtocolError, "malformed completion response");
        }
        if (j.contains("usage") && j["usage"].is_object()) {
            usage_.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            usage_.completion_tokens = j["usage"].value("completion_tokens", 0);
        }
        const auto& msg = j["choices"][0]["message"];
        return msg.value("content", "");
    }
}

std::string HttpBackend::complete(const CompletionRequest& req) {
    return request(req, false, nullptr);
}

std::string HttpBackend::complete_streaming(const CompletionRequest& req,
                                            const ChunkCallback& on_chunk) {
    return request(req, true, on_chunk);
}

std::vector<ScriptedRule> load_scripted_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    json j;
    in >> j;
    if (!j.is_array()) throw Error(ErrorCode::ConfigError, "rules file must be an array");
    std::vector<ScriptedRule> rules;
    for (const auto& item : j) {
        ScriptedRule rule;
        rule.match = item.value("match", "");
        rule.response = item.at("response").get<std::string>();
        rule.delay = std::chrono::milliseconds(item.value("delay_ms", 0));
        std::string split = item.value("split", "whitespace");
        if (split == "line") rule.split = TokenSplit::Line;
        else if (split == "char") rule.split = TokenSplit::Char;
        else rule.split = TokenSplit::Whitespace;
        rules.push_back(std::move(rule));
    }
    return rules;
}

} // namespace dagex
