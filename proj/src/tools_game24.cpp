#include "dagex/tools_game24.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dagex/tools_builtin.hpp"

namespace dagex {
namespace game24 {

namespace {

const Rational kTarget(24);

std::string join_rationals(const std::vector<Rational>& xs, const char* sep = " ") {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i].to_string();
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

Rational Step::apply() const {
    switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    case '/': return a / b;
    }
    throw Error(ErrorCode::ParseError, std::string("bad operator '") + op + "'");
}

std::string Step::text() const {
    return a.to_string() + op + b.to_string() + "=" + result.to_string() +
           "(left:" + join_rationals(left) + ")";
}

GameState GameState::initial(std::vector<Rational> numbers) {
    GameState s;
    s.original = numbers;
    std::sort(numbers.begin(), numbers.end());
    s.remaining = std::move(numbers);
    return s;
}

std::string GameState::serialize() const {
    std::string out;
    for (size_t i = 0; i < history.size(); ++i) {
        if (i) out += ";";
        out += history[i].text();
    }
    return out;
}

bool GameState::solved() const {
    return remaining.size() == 1 && remaining[0] == kTarget;
}

namespace {

Step parse_step(const std::string& text) {
    auto fail = [&] {
        throw Error(ErrorCode::ParseError, "bad step: " + text);
    };
    size_t eq = text.find('=');
    size_t paren = text.find("(left:", eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || paren == std::string::npos || text.back() != ')') fail();

    std::string lhs = text.substr(0, eq);
    Rational result = Rational::parse(trim(text.substr(eq + 1, paren - eq - 1)));

    std::vector<Rational> left;
    std::istringstream in(text.substr(paren + 6, text.size() - paren - 7));
    std::string tok;
    while (in >> tok) left.push_back(Rational::parse(tok));

    // Operands may themselves contain '-' or '/', so try every operator
    // position and accept the split consistent with the stated result.
    for (size_t i = 1; i + 1 < lhs.size(); ++i) {
        char c = lhs[i];
        if (c != '+' && c != '-' && c != '*' && c != '/') continue;
        Step step;
        step.op = c;
        step.result = result;
        step.left = left;
        try {
            step.a = Rational::parse(trim(lhs.substr(0, i)));
            step.b = Rational::parse(trim(lhs.substr(i + 1)));
        } catch (const Error&) {
            continue;
        }
        try {
            if (step.apply() == result) return step;
        } catch (const Error&) {
        }
    }
    fail();
}

} // namespace

GameState GameState::parse(const std::vector<Rational>& original,
                           const std::string& text) {
    std::string body = trim(text);
    if (body.empty()) return initial(original);

    GameState s;
    s.original = original;
    size_t start = 0;
    while (start <= body.size()) {
        size_t semi = body.find(';', start);
        std::string part =
            semi == std::string::npos ? body.substr(start) : body.substr(start, semi - start);
        if (!trim(part).empty()) s.history.push_back(parse_step(trim(part)));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    if (s.history.empty() || s.history.size() > 3) {
        throw Error(ErrorCode::ParseError, "bad state: " + text);
    }
    s.remaining = s.history.back().left;
    std::sort(s.remaining.begin(), s.remaining.end());
    if (s.remaining.size() != 4 - s.history.size()) {
        throw Error(ErrorCode::ParseError, "inconsistent state: " + text);
    }
    return s;
}

std::vector<Rational> parse_puzzle(const std::string& text) {
    std::istringstream in(trim(text));
    std::vector<Rational> numbers;
    std::string tok;
    while (in >> tok) numbers.push_back(Rational::parse(tok));
    if (numbers.size() != 4) {
        throw Error(ErrorCode::ParseError, "puzzle needs exactly four numbers: " + text);
    }
    for (const auto& n : numbers) {
        if (!n.is_integer() || n.num() < 1 || n.num() > 13) {
            throw Error(ErrorCode::ParseError, "puzzle numbers must be integers 1-13");
        }
    }
    return numbers;
}

std::vector<GameState> thought_proposer(const GameState& state) {
    if (state.remaining.size() < 2) {
        throw Error(ErrorCode::TerminalState, "fewer than two numbers remain");
    }

    std::vector<GameState> out;
    std::set<std::string> seen;
    const auto& nums = state.remaining;
    for (size_t i = 0; i < nums.size(); ++i) {
        for (size_t j = i + 1; j < nums.size(); ++j) {
            Rational a = nums[i], b = nums[j];
            std::vector<std::pair<std::pair<Rational, Rational>, char>> candidates = {
                {{a, b}, '+'}, {{a, b}, '*'}, {{a, b}, '-'}, {{b, a}, '-'}};
            if (b.num() != 0) candidates.push_back({{a, b}, '/'});
            if (a.num() != 0) candidates.push_back({{b, a}, '/'});

            for (const auto& [operands, op] : candidates) {
                Step step;
                step.a = operands.first;
                step.b = operands.second;
                step.op = op;
                step.result = step.apply();

                std::vector<Rational> rest;
                for (size_t k = 0; k < nums.size(); ++k) {
                    if (k != i && k != j) rest.push_back(nums[k]);
                }
                rest.push_back(step.result);
                std::sort(rest.begin(), rest.end());
                step.left = rest;

                GameState next;
                next.original = state.original;
                next.history = state.history;
                next.history.push_back(step);
                next.remaining = std::move(rest);

                if (seen.insert(step.text()).second) out.push_back(std::move(next));
            }
        }
    }
    return out;
}

bool solvable_to_24(std::vector<Rational> numbers) {
    if (numbers.size() == 1) return numbers[0] == kTarget;
    for (size_t i = 0; i < numbers.size(); ++i) {
        for (size_t j = i + 1; j < numbers.size(); ++j) {
            Rational a = numbers[i], b = numbers[j];
            std::vector<Rational> results = {a + b, a - b, b - a, a * b};
            if (b.num() != 0) results.push_back(a / b);
            if (a.num() != 0) results.push_back(b / a);

            std::vector<Rational> rest;
            for (size_t k = 0; k < numbers.size(); ++k) {
                if (k != i && k != j) rest.push_back(numbers[k]);
            }
            for (const auto& r : results) {
                rest.push_back(r);
                if (solvable_to_24(rest)) return true;
                rest.pop_back();
            }
        }
    }
    return false;
}

std::string state_evaluator(const GameState& state) {
    return solvable_to_24(state.remaining) ? "sure" : "impossible";
}

std::vector<GameState> top_k_select(const std::vector<GameState>& states,
                                    const std::vector<std::string>& labels, int k) {
    if (states.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(states.size()) + " states vs " +
                        std::to_string(labels.size()) + " labels");
    }
    std::vector<GameState> out;
    for (const char* rank : {"sure", "likely"}) {
        for (size_t i = 0; i < states.size(); ++i) {
            if (labels[i] == rank) out.push_back(states[i]);
        }
    }
    if (static_cast<int>(out.size()) > k) out.resize(k);
    return out;
}

std::string solution_expression(const GameState& state) {
    std::vector<std::pair<Rational, std::string>> pool;
    for (const auto& n : state.original) pool.emplace_back(n, n.to_string());

    std::string last;
    for (const auto& step : state.history) {
        auto take = [&](const Rational& v) {
            for (size_t i = 0; i < pool.size(); ++i) {
                if (pool[i].first == v) {
                    std::string expr = pool[i].second;
                    pool.erase(pool.begin() + i);
                    return expr;
                }
            }
            throw Error(ErrorCode::ParseError,
                        "step operand " + v.to_string() + " not available");
        };
        std::string ea = take(step.a);
        std::string eb = take(step.b);
        last = "(" + ea + " " + step.op + " " + eb + ")";
        pool.emplace_back(step.result, last);
    }
    return last;
}

bool validate_solution(const std::string& expression, const std::string& puzzle) {
    std::vector<Rational> numbers = parse_puzzle(puzzle);

    // literal multiset must equal the puzzle multiset
    std::vector<Rational> literals;
    for (size_t i = 0; i < expression.size(); ++i) {
        if (!isdigit(static_cast<unsigned char>(expression[i]))) continue;
        size_t j = i;
        long v = 0;
        while (j < expression.size() && isdigit(static_cast<unsigned char>(expression[j]))) {
            v = v * 10 + (expression[j] - '0');
            ++j;
        }
        literals.push_back(Rational(v));
        i = j - 1;
    }
    std::sort(numbers.begin(), numbers.end());
    std::sort(literals.begin(), literals.end());
    if (numbers != literals) return false;

    try {
        return eval_math(expression) == kTarget;
    } catch (const Error&) {
        return false;
    }
}

namespace {

// Splits the textual rendering of a (possibly nested) list into its
// top-level elements: "[[a, b], [c]]" -> "[a, b]", "[c]".
std::vector<std::string> split_list_text(const std::string& text) {
    std::string body = trim(text);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
        throw Error(ErrorCode::ParseError, "not a list rendering: " + text);
    }
    body = body.substr(1, body.size() - 2);
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : body) {
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

// Flattens a tool argument into leaf texts. Accepts real List values
// and textual list renderings (the planner passes "$N" inside quoted
// strings, which substitutes to rendered text).
void flatten_states(const Value& v, std::vector<std::string>& out) {
    if (v.kind == Value::Kind::List) {
        for (const auto& item : v.items) flatten_states(item, out);
        return;
    }
    std::string text = trim(v.render());
    if (!text.empty() && text.front() == '[') {
        for (const auto& part : split_list_text(text)) {
            if (!part.empty() && part.front() == '[') {
                flatten_states(Value::make_text(part), out);
            } else {
                out.push_back(part);
            }
        }
        return;
    }
    out.push_back(text);
}

std::vector<std::string> flatten_states(const Value& v) {
    std::vector<std::string> out;
    flatten_states(v, out);
    return out;
}

} // namespace

void register_tools(ToolRegistry& registry, int k) {
    ToolSpec proposer;
    proposer.name = "thought_proposer";
    proposer.description =
        "thought_proposer(puzzle, state): proposes all next partial solutions "
        "from the given Game of 24 state; returns a list of successor states.";
    proposer.arg_schema = {{"puzzle", ArgKind::Text}, {"state", ArgKind::Text}};
    proposer.run = [](const std::vector<Value>& args, TaskMemory&) {
        GameState state = GameState::parse(parse_puzzle(args[0].text), args[1].text);
        std::vector<Value> out;
        for (const auto& next : thought_proposer(state)) {
            out.push_back(Value::make_text(next.serialize()));
        }
        return Value::make_list(std::move(out));
    };
    registry.register_tool(std::move(proposer));

    ToolSpec evaluator;
    evaluator.name = "state_evaluator";
    evaluator.description =
        "state_evaluator(puzzle, states): labels each state 'sure', 'likely' or "
        "'impossible' for reaching 24; returns labels in the same order.";
    evaluator.arg_schema = {{"puzzle", ArgKind::Text}, {"states", ArgKind::Any}};
    evaluator.run = [](const std::vector<Value>& args, TaskMemory&) {
        std::vector<Rational> puzzle = parse_puzzle(args[0].text);
        bool single = args[1].kind == Value::Kind::Text &&
                      (args[1].text.empty() || trim(args[1].text).front() != '[');
        if (single) {
            return Value::make_text(
                state_evaluator(GameState::parse(puzzle, args[1].text)));
        }
        std::vector<Value> labels;
        for (const auto& text : flatten_states(args[1])) {
            labels.push_back(
                Value::make_text(state_evaluator(GameState::parse(puzzle, text))));
        }
        return Value::make_list(std::move(labels));
    };
    registry.register_tool(std::move(evaluator));

    ToolSpec select;
    select.name = "top_k_select";
    select.description =
        "top_k_select(puzzle, states, labels): keeps the best states by label "
        "rank (sure > likely > impossible), at most " + std::to_string(k) + ".";
    select.arg_schema = {{"puzzle", ArgKind::Text},
                         {"states", ArgKind::Any},
                         {"labels", ArgKind::Any}};
    select.run = [k](const std::vector<Value>& args, TaskMemory&) {
        std::vector<Rational> puzzle = parse_puzzle(args[0].text);
        std::vector<std::string> state_texts = flatten_states(args[1]);
        std::vector<std::string> labels = flatten_states(args[2]);
        std::vector<GameState> states;
        for (const auto& text : state_texts) {
            states.push_back(GameState::parse(puzzle, text));
        }
        std::vector<Value> out;
        for (const auto& s : top_k_select(states, labels, k)) {
            out.push_back(Value::make_text(s.serialize()));
        }
        return Value::make_list(std::move(out));
    };
    registry.register_tool(std::move(select));
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

// Last "Question:" line of the prompt: the current query (earlier ones
// belong to in-context examples).
std::string last_question_line(const std::string& prompt) {
    size_t pos = prompt.rfind("Question:");
    if (pos == std::string::npos) {
        throw Error(ErrorCode::ProtocolError, "prompt has no Question line");
    }
    size_t end = prompt.find('\n', pos);
    return prompt.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

std::string extract_puzzle(const std::string& question_line) {
    std::string rest = trim(question_line.substr(9)); // after "Question:"
    if (!rest.empty() && rest.front() == '"') {
        size_t close = rest.find('"', 1);
        if (close != std::string::npos) return rest.substr(1, close - 1);
    }
    size_t comma = rest.find(", state_list:");
    return trim(comma == std::string::npos ? rest : rest.substr(0, comma));
}

std::vector<std::string> extract_state_list(const std::string& question_line) {
    size_t pos = question_line.find("state_list:");
    if (pos == std::string::npos) return {};
    size_t open = question_line.find('[', pos);
    if (open == std::string::npos) return {};
    std::vector<std::string> states;
    size_t i = open + 1;
    while (i < question_line.size() && question_line[i] != ']') {
        if (question_line[i] == '"') {
            std::string s;
            ++i;
            while (i < question_line.size() && question_line[i] != '"') {
                if (question_line[i] == '\\' && i + 1 < question_line.size()) ++i;
                s += question_line[i++];
            }
            ++i;
            states.push_back(std::move(s));
        } else {
            ++i;
        }
    }
    return states;
}

std::string render_state_list(const std::vector<std::string>& states) {
    std::string out = "[";
    for (size_t i = 0; i < states.size(); ++i) {
        if (i) out += ",";
        out += quote(states[i]);
    }
    out += "]";
    return out;
}

} // namespace

std::shared_ptr<Backend> make_planner_backend(int) {
    return std::make_shared<CallbackBackend>([](const CompletionRequest& req) {
        std::string question = last_question_line(req.prompt);
        std::string puzzle = extract_puzzle(question);
        std::vector<std::string> states = extract_state_list(question);
        states.erase(std::remove(states.begin(), states.end(), std::string()),
                     states.end());

        std::ostringstream plan;
        if (states.empty()) {
            plan << "$1 = thought_proposer(" << quote(puzzle) << ", \"\")\n"
                 << "$2 = state_evaluator(" << quote(puzzle) << ", \"$1\")\n"
                 << "$3 = top_k_select(" << quote(puzzle)
                 << ", [\"$1\"], [\"$2\"])\n"
                 << "$4 = join()\n###\n";
            return plan.str();
        }
        size_t m = states.size();
        for (size_t i = 0; i < m; ++i) {
            plan << "$" << (i + 1) << " = thought_proposer(" << quote(puzzle) << ", "
                 << quote(states[i]) << ")\n";
        }
        for (size_t i = 0; i < m; ++i) {
            plan << "$" << (m + i + 1) << " = state_evaluator(" << quote(puzzle)
                 << ", \"$" << (i + 1) << "\")\n";
        }
        plan << "$" << (2 * m + 1) << " = top_k_select(" << quote(puzzle) << ", [";
        for (size_t i = 0; i < m; ++i) {
            if (i) plan << ", ";
            plan << "\"$" << (i + 1) << "\"";
        }
        plan << "], [";
        for (size_t i = 0; i < m; ++i) {
            if (i) plan << ", ";
            plan << "\"$" << (m + i + 1) << "\"";
        }
        plan << "])\n$" << (2 * m + 2) << " = join()\n###\n";
        return plan.str();
    });
}

std::shared_ptr<Backend> make_answerer_backend() {
    return std::make_shared<CallbackBackend>([](const CompletionRequest& req) {
        std::string puzzle = extract_puzzle(last_question_line(req.prompt));
        std::vector<Rational> numbers = parse_puzzle(puzzle);

        // the top_k_select observation is the round's shortlist
        std::vector<std::string> shortlist;
        std::istringstream in(req.prompt);
        std::string line;
        while (std::getline(in, line)) {
            if (line.find("(top_k_select) = ") == std::string::npos) continue;
            size_t eq = line.find("= ");
            shortlist = split_list_text(trim(line.substr(eq + 2)));
        }

        for (const auto& text : shortlist) {
            GameState state = GameState::parse(numbers, text);
            if (state.solved()) {
                return "FINISH: " + solution_expression(state);
            }
        }
        if (shortlist.empty()) shortlist.push_back("");
        return "REPLAN: " + render_state_list(shortlist);
    });
}

} // namespace game24
} // namespace dagex

