#include "dagex/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dagex/tools_game24.hpp"

namespace dagex {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& s, int line_no) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
        throw Error(ErrorCode::ConfigError,
                    "bad string on line " + std::to_string(line_no));
    }
    std::string out;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) ++i;
        out += s[i];
    }
    return out;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(ErrorCode::ConfigError,
                            "bad section header on line " + std::to_string(line_no));
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ConfigError,
                        "expected key = value on line " + std::to_string(line_no));
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw Error(ErrorCode::ConfigError,
                        "empty key or value on line " + std::to_string(line_no));
        }
        Entry entry;
        if (value.front() == '"') {
            entry.is_string = true;
            entry.raw = unquote(value, line_no);
        } else if (value.front() == '[') {
            if (value.back() != ']') {
                throw Error(ErrorCode::ConfigError,
                            "bad array on line " + std::to_string(line_no));
            }
            entry.is_array = true;
            std::string body = trim(value.substr(1, value.size() - 2));
            size_t pos = 0;
            while (pos < body.size()) {
                size_t open = body.find('"', pos);
                if (open == std::string::npos) break;
                size_t close = body.find('"', open + 1);
                if (close == std::string::npos) {
                    throw Error(ErrorCode::ConfigError,
                                "bad array on line " + std::to_string(line_no));
                }
                entry.array.push_back(body.substr(open + 1, close - open - 1));
                pos = close + 1;
            }
        } else {
            entry.raw = value;
        }
        std::string full_key = section.empty() ? key : section + "." + key;
        cfg.values_[full_key] = std::move(entry);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.is_array) return std::nullopt;
    return it->second.raw;
}

std::optional<long> ConfigFile::get_int(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.is_string || it->second.is_array) {
        return std::nullopt;
    }
    try {
        return std::stol(it->second.raw);
    } catch (...) {
        throw Error(ErrorCode::ConfigError, "not an integer: " + key);
    }
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.is_string || it->second.is_array) {
        return std::nullopt;
    }
    try {
        return std::stod(it->second.raw);
    } catch (...) {
        throw Error(ErrorCode::ConfigError, "not a number: " + key);
    }
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.is_string || it->second.is_array) {
        return std::nullopt;
    }
    if (it->second.raw == "true") return true;
    if (it->second.raw == "false") return false;
    throw Error(ErrorCode::ConfigError, "not a boolean: " + key);
}

std::optional<std::vector<std::string>> ConfigFile::get_string_array(
    const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || !it->second.is_array) return std::nullopt;
    return it->second.array;
}

namespace {

std::shared_ptr<Backend> build_backend(const ConfigFile& cfg, const std::string& section,
                                       const fs::path& base_dir, int game24_k) {
    std::string kind = cfg.get_string(section + ".kind").value_or("scripted");
    if (kind == "scripted") {
        auto rules_path = cfg.get_string(section + ".rules");
        if (!rules_path) {
            throw Error(ErrorCode::ConfigError, section + ".rules required");
        }
        return std::make_shared<ScriptedBackend>(
            load_scripted_rules((base_dir / *rules_path).string()));
    }
    if (kind == "http") {
        HttpBackendConfig http;
        http.base_url = cfg.get_string(section + ".endpoint").value_or("");
        if (http.base_url.empty()) {
            throw Error(ErrorCode::ConfigError, section + ".endpoint required");
        }
        http.model = cfg.get_string(section + ".model").value_or("");
        if (auto env = cfg.get_string(section + ".api_key_env")) {
            if (const char* key = std::getenv(env->c_str())) http.api_key = key;
        }
        return std::make_shared<HttpBackend>(std::move(http));
    }
    if (kind == "game24-planner") return game24::make_planner_backend(game24_k);
    if (kind == "game24-answerer") return game24::make_answerer_backend();
    throw Error(ErrorCode::ConfigError, "unknown backend kind: " + kind);
}

} // namespace

EngineSetup build_engine_setup(const std::string& config_path) {
    ConfigFile cfg = ConfigFile::load(config_path);
    fs::path base_dir = fs::path(config_path).parent_path();

    EngineSetup setup;
    setup.run_config.max_replans =
        static_cast<int>(cfg.get_int("engine.max_replans").value_or(4));
    setup.run_config.streaming = cfg.get_bool("engine.streaming").value_or(false);
    setup.run_config.concurrency_cap =
        static_cast<int>(cfg.get_int("engine.concurrency_cap").value_or(0));
    setup.trace_path = cfg.get_string("engine.trace").value_or("");
    if (!setup.trace_path.empty() && !fs::path(setup.trace_path).is_absolute()) {
        setup.trace_path = (base_dir / setup.trace_path).string();
    }

    int k = static_cast<int>(cfg.get_int("tools.top_k").value_or(5));
    if (cfg.get_bool("tools.builtin").value_or(false)) {
        auto corpus_path = cfg.get_string("tools.corpus");
        if (!corpus_path) {
            throw Error(ErrorCode::ConfigError, "tools.corpus required with builtin tools");
        }
        setup.corpus = std::make_shared<Corpus>(
            Corpus::load((base_dir / *corpus_path).string()));
        register_builtin_tools(setup.registry, setup.corpus);
    }
    if (cfg.get_bool("tools.game24").value_or(false)) {
        game24::register_tools(setup.registry, k);
    }
    if (setup.registry.size() == 0) {
        throw Error(ErrorCode::ConfigError, "no tools enabled");
    }

    setup.run_config.planner = build_backend(cfg, "planner", base_dir, k);
    setup.run_config.answerer = build_backend(cfg, "answerer", base_dir, k);
    setup.run_config.planner_temperature =
        cfg.get_double("planner.temperature").value_or(0.0);

    if (auto example_files = cfg.get_string_array("planner.examples")) {
        for (const auto& file : *example_files) {
            std::ifstream in(base_dir / file);
            if (!in) throw Error(ErrorCode::IoError, "cannot read example file " + file);
            std::ostringstream buf;
            buf << in.rdbuf();
            setup.run_config.planner_examples.push_back(buf.str());
        }
    }
    return setup;
}

} // namespace dagex
