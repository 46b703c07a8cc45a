#include "dagex/tools_builtin.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dagex {

using nlohmann::json;

namespace {

std::string normalize(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) {
            out += ' ';
            space = false;
        }
        out += static_cast<char>(tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::set<std::string> tokens(const std::string& s) {
    std::set<std::string> out;
    std::istringstream in(normalize(s));
    std::string tok;
    while (in >> tok) out.insert(tok);
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

} // namespace

Corpus::Corpus(std::vector<CorpusEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        if (!seen.insert(normalize(e.title)).second) {
            throw Error(ErrorCode::ConfigError, "duplicate corpus title: " + e.title);
        }
    }
}

Corpus Corpus::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    json j;
    in >> j;
    std::vector<CorpusEntry> entries;
    for (const auto& item : j) {
        entries.push_back(CorpusEntry{item.at("title").get<std::string>(),
                                      item.at("first_paragraph").get<std::string>()});
    }
    return Corpus(std::move(entries));
}

const CorpusEntry* Corpus::lookup(const std::string& query) const {
    std::string nq = normalize(query);
    for (const auto& e : entries_) {
        if (normalize(e.title) == nq) return &e;
    }
    auto qt = tokens(query);
    const CorpusEntry* best = nullptr;
    double best_score = 0.0;
    for (const auto& e : entries_) {
        double score = jaccard(qt, tokens(e.title));
        if (score < 0.5) continue;
        if (!best || score > best_score ||
            (score == best_score && e.title.size() < best->title.size())) {
            best = &e;
            best_score = score;
        }
    }
    return best;
}

namespace {

// Recursive-descent arithmetic over exact rationals.
class MathParser {
public:
    explicit MathParser(const std::string& src) : s_(src) {}

    Rational parse() {
        Rational v = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& reason) const {
        throw Error(ErrorCode::ParseError,
                    reason + " at position " + std::to_string(pos_) + " in '" + s_ + "'");
    }
    void skip_ws() {
        while (pos_ < s_.size() && isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Rational expr() {
        Rational v = term();
        while (true) {
            char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                Rational rhs = term();
                v = c == '+' ? v + rhs : v - rhs;
            } else {
                return v;
            }
        }
    }

    Rational term() {
        Rational v = factor();
        while (true) {
            char c = peek();
            if (c == '*' || c == '/') {
                ++pos_;
                Rational rhs = factor();
                v = c == '*' ? v * rhs : v / rhs;
            } else {
                return v;
            }
        }
    }

    Rational factor() {
        char c = peek();
        if (c == '-') {
            ++pos_;
            return -factor();
        }
        if (c == '(') {
            ++pos_;
            Rational v = expr();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return v;
        }
        if (isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
                ++pos_;
            }
            return Rational::parse(s_.substr(start, pos_ - start));
        }
        fail("expected number, '(' or '-'");
    }

    const std::string& s_;
    size_t pos_ = 0;
};

} // namespace

Rational eval_math(const std::string& expression) {
    return MathParser(expression).parse();
}

void register_builtin_tools(ToolRegistry& registry, std::shared_ptr<const Corpus> corpus) {
    ToolSpec search;
    search.name = "search";
    search.description =
        "search(query): returns the first paragraph of the best-matching "
        "encyclopedia entry for the query string.";
    search.arg_schema = {{"query", ArgKind::Text}};
    search.run = [corpus](const std::vector<Value>& args, TaskMemory& memory) {
        const std::string& query = args[0].text;
        if (query.empty()) throw Error(ErrorCode::NotFound, "empty query");
        const CorpusEntry* entry = corpus->lookup(query);
        if (!entry) throw Error(ErrorCode::NotFound, "no entry for '" + query + "'");
        memory.note("matched title: " + entry->title);
        return Value::make_text(entry->first_paragraph);
    };
    registry.register_tool(std::move(search));

    ToolSpec math;
    math.name = "math";
    math.description =
        "math(expression): evaluates an arithmetic expression with + - * / "
        "and parentheses, returning the numeric result.";
    math.arg_schema = {{"expression", ArgKind::Text}};
    math.run = [](const std::vector<Value>& args, TaskMemory& memory) {
        Rational r = eval_math(args[0].text);
        memory.note("exact result: " + r.to_string());
        return Value::make_number(r.to_double());
    };
    registry.register_tool(std::move(math));
}

} // namespace dagex
