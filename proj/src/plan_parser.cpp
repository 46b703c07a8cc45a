#include "dagex/plan_parser.hpp"

#include <cctype>
#include <charconv>

namespace dagex {

namespace {

// Cursor over one task line.
struct LineCursor {
    const std::string& s;
    size_t pos = 0;
    int line_no;

    [[noreturn]] void fail(const std::string& reason) const {
        throw SyntaxError(line_no, s, reason);
    }
    bool eof() const { return pos >= s.size(); }
    char peek() const { return eof() ? '\0' : s[pos]; }
    void skip_ws() {
        while (!eof() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    void expect(char c, const char* what) {
        if (peek() != c) fail(std::string("expected ") + what);
        ++pos;
    }
    long parse_int() {
        size_t start = pos;
        while (!eof() && isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) fail("expected integer");
        long v = 0;
        std::from_chars(s.data() + start, s.data() + pos, v);
        return v;
    }
};

std::string parse_quoted(LineCursor& c) {
    c.expect('"', "'\"'");
    std::string out;
    while (true) {
        if (c.eof()) c.fail("unterminated string");
        char ch = c.s[c.pos++];
        if (ch == '"') break;
        if (ch == '\\') {
            if (c.eof()) c.fail("dangling escape");
            char esc = c.s[c.pos++];
            if (esc != '"' && esc != '\\') c.fail("unknown escape");
            out += esc;
            continue;
        }
        out += ch;
    }
    return out;
}

ArgValue parse_arg(LineCursor& c);

ArgValue parse_list(LineCursor& c) {
    c.expect('[', "'['");
    std::vector<ArgValue> items;
    c.skip_ws();
    if (c.peek() == ']') {
        ++c.pos;
        return ArgValue::make_list(std::move(items));
    }
    while (true) {
        items.push_back(parse_arg(c));
        c.skip_ws();
        if (c.peek() == ',') {
            ++c.pos;
            c.skip_ws();
            continue;
        }
        c.expect(']', "']' or ','");
        break;
    }
    return ArgValue::make_list(std::move(items));
}

ArgValue parse_arg(LineCursor& c) {
    c.skip_ws();
    char ch = c.peek();
    if (ch == '"') return ArgValue::make_text(parse_quoted(c));
    if (ch == '[') return parse_list(c);
    if (ch == '$') {
        ++c.pos;
        long id = c.parse_int();
        return ArgValue::make_ref(static_cast<TaskId>(id));
    }
    if (ch == '-' || ch == '+' || isdigit(static_cast<unsigned char>(ch))) {
        size_t start = c.pos;
        if (ch == '-' || ch == '+') ++c.pos;
        bool any = false;
        while (!c.eof() && (isdigit(static_cast<unsigned char>(c.peek())) || c.peek() == '.')) {
            any = true;
            ++c.pos;
        }
        if (!any) c.fail("expected number");
        double v = 0;
        auto res = std::from_chars(c.s.data() + start, c.s.data() + c.pos, v);
        if (res.ec != std::errc() || res.ptr != c.s.data() + c.pos) c.fail("bad number");
        return ArgValue::make_number(v);
    }
    c.fail("expected argument");
}

std::string rstrip(std::string_view sv) {
    size_t end = sv.size();
    while (end > 0 && (sv[end - 1] == ' ' || sv[end - 1] == '\t' || sv[end - 1] == '\r')) --end;
    return std::string(sv.substr(0, end));
}

bool is_blank(const std::string& line) {
    for (char c : line) {
        if (c != ' ' && c != '\t') return false;
    }
    return true;
}

} // namespace

std::optional<TaskSpec> StreamParser::consume_line(const std::string& raw) {
    ++line_no_;
    std::string line = rstrip(raw);

    if (is_blank(line)) return std::nullopt;
    if (line.rfind("###", 0) == 0) return std::nullopt;

    if (line.rfind("Thought:", 0) == 0) {
        std::string text = line.substr(8);
        size_t start = text.find_first_not_of(" \t");
        pending_thought_ = start == std::string::npos ? "" : text.substr(start);
        return std::nullopt;
    }

    if (finished_) {
        throw SyntaxError(line_no_, line, "content after join");
    }

    LineCursor c{line, 0, line_no_};
    c.skip_ws();

    // id prefix: "$N =" or "N."
    long id;
    if (c.peek() == '$') {
        ++c.pos;
        id = c.parse_int();
        c.skip_ws();
        c.expect('=', "'='");
    } else {
        id = c.parse_int();
        c.expect('.', "'.'");
    }
    c.skip_ws();

    size_t ident_start = c.pos;
    while (!c.eof() &&
           (isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_')) {
        ++c.pos;
    }
    if (c.pos == ident_start || isdigit(static_cast<unsigned char>(line[ident_start]))) {
        c.fail("expected tool name");
    }
    std::string tool = line.substr(ident_start, c.pos - ident_start);

    c.expect('(', "'('");
    std::vector<ArgValue> args;
    c.skip_ws();
    if (c.peek() != ')') {
        while (true) {
            args.push_back(parse_arg(c));
            c.skip_ws();
            if (c.peek() == ',') {
                ++c.pos;
                continue;
            }
            break;
        }
    }
    c.expect(')', "')'");
    c.skip_ws();
    if (!c.eof()) {
        // covers trailing '#' comments, which the planner prompt forbids
        c.fail("trailing content after ')'");
    }

    TaskSpec task;
    task.id = static_cast<TaskId>(id);
    task.tool = std::move(tool);
    task.args = std::move(args);

    if (task.id < 1) c.fail("task id must be >= 1");
    if (task.id <= last_id_) c.fail("task id not strictly increasing");
    for (TaskId dep : task.deps()) {
        if (dep >= task.id) c.fail("forward reference $" + std::to_string(dep));
        if (dep < 1) c.fail("bad reference $" + std::to_string(dep));
    }
    if (task.is_join() && !task.args.empty()) c.fail("join takes no arguments");

    if (pending_thought_) {
        task.thought = std::move(*pending_thought_);
        pending_thought_.reset();
    }

    last_id_ = task.id;
    ++emitted_;
    if (task.is_join()) finished_ = true;
    return task;
}

std::vector<TaskSpec> StreamParser::feed(std::string_view chunk) {
    buffer_.append(chunk);
    std::vector<TaskSpec> out;
    size_t nl;
    while ((nl = buffer_.find('\n')) != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (auto task = consume_line(line)) out.push_back(std::move(*task));
    }
    return out;
}

std::vector<TaskSpec> StreamParser::finish() {
    std::vector<TaskSpec> out;
    if (!buffer_.empty()) {
        std::string line = std::move(buffer_);
        buffer_.clear();
        if (auto task = consume_line(line)) out.push_back(std::move(*task));
    }
    if (!finished_) {
        throw SyntaxError(line_no_ + 1, "", "no join task found");
    }
    return out;
}

std::vector<TaskSpec> parse_plan(const std::string& text) {
    StreamParser p;
    std::vector<TaskSpec> tasks = p.feed(text);
    std::vector<TaskSpec> rest = p.finish();
    tasks.insert(tasks.end(), rest.begin(), rest.end());
    return tasks;
}

} // namespace dagex
