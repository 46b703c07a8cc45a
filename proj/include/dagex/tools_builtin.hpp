#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dagex/executor.hpp"
#include "dagex/rational.hpp"

namespace dagex {

struct CorpusEntry {
    std::string title;
    std::string first_paragraph;
};

// Offline search fixture: a small set of titled first paragraphs.
// Lookup is exact (case-insensitive, whitespace-normalized) first, then
// best token overlap above 0.5, ties broken by shorter title.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<CorpusEntry> entries);

    static Corpus load(const std::string& path);

    const CorpusEntry* lookup(const std::string& query) const;
    size_t size() const { return entries_.size(); }

private:
    std::vector<CorpusEntry> entries_;
};

// Evaluates an arithmetic expression over exact rationals. Supported:
// + - * /, unary minus, parentheses, integer and decimal literals.
Rational eval_math(const std::string& expression);

// Registers "search" (fixture-backed) and "math" tools.
void register_builtin_tools(ToolRegistry& registry, std::shared_ptr<const Corpus> corpus);

} // namespace dagex
