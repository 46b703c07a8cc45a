#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dagex/executor.hpp"
#include "dagex/replan.hpp"
#include "dagex/tools_builtin.hpp"

namespace dagex {

// Minimal TOML-style reader: [sections], key = value with strings,
// integers, floats, booleans, and arrays of strings; # comments.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    // Keys are "section.key"; top-level keys have no dot.
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<long> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::string>> get_string_array(const std::string& key) const;

    bool has(const std::string& key) const { return values_.count(key) != 0; }

private:
    struct Entry {
        std::string raw;
        bool is_string = false;
        std::vector<std::string> array;
        bool is_array = false;
    };
    std::map<std::string, Entry> values_;
};

// Everything the CLI needs, resolved from one config file. Paths in the
// file are taken relative to the file's directory.
struct EngineSetup {
    ToolRegistry registry;
    RunConfig run_config;
    std::shared_ptr<const Corpus> corpus;
    std::string trace_path; // empty: no trace file
};

// Builds tools and backends from a config file. Secrets come from the
// environment variable named by <section>.api_key_env only.
EngineSetup build_engine_setup(const std::string& config_path);

} // namespace dagex
