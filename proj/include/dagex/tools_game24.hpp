#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dagex/executor.hpp"
#include "dagex/llm_backend.hpp"
#include "dagex/rational.hpp"

namespace dagex {
namespace game24 {

// One combining step: a op b = result, e.g. "1+2=3(left:3 3 4)".
struct Step {
    Rational a;
    Rational b;
    Rational result;
    char op = '+';
    std::vector<Rational> left; // numbers remaining after this step

    Rational apply() const;
    std::string text() const; // "1+2=3(left:3 3 4)"
};

// A partial solution: steps taken so far plus the multiset of numbers
// still on the table (kept sorted ascending).
struct GameState {
    std::vector<Rational> original; // the four puzzle numbers
    std::vector<Step> history;
    std::vector<Rational> remaining;

    static GameState initial(std::vector<Rational> numbers);
    // Parses a serialized state ("" means the initial state). Steps are
    // ';'-separated "a<op>b=c(left:x y z)" records.
    static GameState parse(const std::vector<Rational>& original,
                           const std::string& text);
    std::string serialize() const;

    bool solved() const;
};

// "2 4 4 7" -> four rationals. Throws ParseError unless exactly four
// numbers in 1..13.
std::vector<Rational> parse_puzzle(const std::string& text);

// All successor states from every unordered pair and applicable
// operation, deduplicated by step text + resulting multiset. Throws
// TerminalState when fewer than two numbers remain.
std::vector<GameState> thought_proposer(const GameState& state);

// Brute force: can these numbers be combined to exactly 24?
bool solvable_to_24(std::vector<Rational> numbers);

// Exact mode: "sure" iff the remaining numbers are solvable, else
// "impossible" ("likely" is reserved for LLM-mode evaluators).
std::string state_evaluator(const GameState& state);

// Orders by label rank (sure > likely > impossible), stable within rank,
// drops impossible, keeps at most k.
std::vector<GameState> top_k_select(const std::vector<GameState>& states,
                                    const std::vector<std::string>& labels, int k);

// Rebuilds the fully parenthesized expression of a solved state.
std::string solution_expression(const GameState& state);

// Validity check: expression uses each puzzle number exactly once and
// evaluates to exactly 24 under rational arithmetic.
bool validate_solution(const std::string& expression, const std::string& puzzle);

// Registers the tool trio with list-aware wire bindings.
void register_tools(ToolRegistry& registry, int k = 5);

// Deterministic planner/answerer backends speaking the plan DSL and the
// FINISH:/REPLAN: join protocol.
std::shared_ptr<Backend> make_planner_backend(int k = 5);
std::shared_ptr<Backend> make_answerer_backend();

} // namespace game24
} // namespace dagex
