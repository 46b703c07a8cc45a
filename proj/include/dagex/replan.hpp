#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dagex/executor.hpp"
#include "dagex/llm_backend.hpp"

namespace dagex {

// Outcome of the join step: either the final answer or a request to
// plan another round with carried-over state.
struct JoinDecision {
    enum class Kind { Finish, Replan };
    Kind kind = Kind::Finish;
    std::string text; // Finish: answer; Replan: carry state for the next prompt
};

struct RunConfig {
    int max_replans = 4;
    bool streaming = false;
    int concurrency_cap = 0; // 0 = unlimited
    std::shared_ptr<Backend> planner;
    std::shared_ptr<Backend> answerer;
    std::vector<std::string> planner_examples;
    double planner_temperature = 0.0;
};

// Fixed planner rule block + tool descriptions + in-context examples +
// query (+ optional carried state from the previous round).
std::string assemble_planner_prompt(const std::vector<const ToolSpec*>& tools,
                                    const std::vector<std::string>& examples,
                                    const std::string& query,
                                    const std::optional<std::string>& carry_state);

// Drives the full loop: plan (batch or streamed), execute, join, and
// replan until Finish or the round limit.
class Orchestrator {
public:
    Orchestrator(const ToolRegistry& registry, RunConfig config);

    struct RoundResult {
        std::map<TaskId, Observation> observations;
        JoinDecision decision;
    };

    RoundResult run_round(const std::string& query,
                          const std::optional<std::string>& carry_state,
                          RunTrace& trace);

    struct RunOutcome {
        bool finished = false;
        std::string answer;                     // when finished
        std::optional<std::string> last_carry;  // when rounds exhausted
        int rounds = 0;
    };

    RunOutcome run(const std::string& query, RunTrace& trace);

private:
    JoinDecision decide(const std::string& query,
                        const std::map<TaskId, Observation>& observations,
                        const std::string& join_summary);

    const ToolRegistry& registry_;
    RunConfig config_;
};

} // namespace dagex
