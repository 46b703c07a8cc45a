#include "dagex/replan.hpp"

#include <sstream>

#include "dagex/plan_parser.hpp"

namespace dagex {

namespace {

// Rules every planner must follow, injected ahead of the tool list.
const char* kPlannerRules =
    "- Each action described above contains input/output types and descriptions.\n"
    "- You must strictly adhere to the input and output types for each action.\n"
    "- The action descriptions contain the guidelines. You MUST strictly follow "
    "those guidelines when you use the actions.\n"
    "- Each action in the plan should strictly be one of the above types. Follow "
    "the Python conventions for each action.\n"
    "- Each action MUST have a unique ID, which is strictly increasing.\n"
    "- Inputs for actions can either be constants or outputs from preceding "
    "actions. In the latter case, use the format $id to denote the ID of the "
    "previous action whose output will be the input.\n"
    "- Ensure the plan maximizes parallelizability.\n"
    "- Only use the provided action types. If a query cannot be addressed using "
    "these, invoke the join action for the next steps.\n"
    "- Never explain the plan with comments (e.g. #).\n"
    "- Never introduce new actions other than the ones provided.\n";

std::string render_tool_lines(const std::vector<const ToolSpec*>& tools) {
    std::ostringstream out;
    int n = 1;
    for (const ToolSpec* tool : tools) {
        out << n++ << ". " << tool->name << "(";
        for (size_t i = 0; i < tool->arg_schema.size(); ++i) {
            if (i) out << ", ";
            out << tool->arg_schema[i].first;
        }
        out << "): " << tool->description << "\n";
    }
    out << n << ". join(): collects all observations and decides the final answer "
           "or a replan.\n";
    return out.str();
}

} // namespace

std::string assemble_planner_prompt(const std::vector<const ToolSpec*>& tools,
                                    const std::vector<std::string>& examples,
                                    const std::string& query,
                                    const std::optional<std::string>& carry_state) {
    if (tools.empty()) {
        throw Error(ErrorCode::ConfigError, "planner prompt needs at least one tool");
    }
    std::ostringstream out;
    out << "Available actions:\n" << render_tool_lines(tools) << "\n";
    out << "Guidelines:\n" << kPlannerRules << "\n";
    for (const auto& example : examples) {
        out << example;
        if (example.empty() || example.back() != '\n') out << "\n";
        out << "\n";
    }
    if (carry_state) {
        out << "Question: \"" << query << "\", state_list: " << *carry_state << "\n";
    } else {
        out << "Question: " << query << "\n";
    }
    return out.str();
}

Orchestrator::Orchestrator(const ToolRegistry& registry, RunConfig config)
    : registry_(registry), config_(std::move(config)) {
    if (!config_.planner || !config_.answerer) {
        throw Error(ErrorCode::ConfigError, "planner and answerer backends required");
    }
}

JoinDecision Orchestrator::decide(const std::string& query,
                                  const std::map<TaskId, Observation>& observations,
                                  const std::string& join_summary) {
    std::ostringstream prompt;
    prompt << "Question: " << query << "\n\nObservations:\n"
           << join_summary
           << "\nAnswer the question from the observations. Reply with exactly one "
              "line starting with 'FINISH: <answer>' or 'REPLAN: <state to carry "
              "over>'.\n";

    CompletionRequest req;
    req.prompt = prompt.str();
    std::string response = config_.answerer->complete(req);

    size_t nl = response.find('\n');
    std::string first = nl == std::string::npos ? response : response.substr(0, nl);

    JoinDecision decision;
    if (first.rfind("FINISH:", 0) == 0) {
        decision.kind = JoinDecision::Kind::Finish;
        decision.text = first.substr(7);
    } else if (first.rfind("REPLAN:", 0) == 0) {
        decision.kind = JoinDecision::Kind::Replan;
        decision.text = first.substr(7);
    } else {
        throw Error(ErrorCode::ProtocolError,
                    "answerer must start with FINISH: or REPLAN:, got: " +
                        first.substr(0, 80));
    }
    size_t start = decision.text.find_first_not_of(" \t");
    decision.text = start == std::string::npos ? "" : decision.text.substr(start);

    if (decision.kind == JoinDecision::Kind::Finish) {
        // $N in the answer echoes the observation of task N
        ArgValue arg = ArgValue::make_text(decision.text);
        if (!arg.placeholders.empty()) {
            decision.text = substitute({arg}, observations)[0].render();
        }
        if (decision.text.empty()) {
            throw Error(ErrorCode::ProtocolError, "empty FINISH answer");
        }
    }
    return decision;
}

Orchestrator::RoundResult Orchestrator::run_round(
    const std::string& query, const std::optional<std::string>& carry_state,
    RunTrace& trace) {
    CompletionRequest req;
    req.prompt = assemble_planner_prompt(registry_.all(), config_.planner_examples,
                                         query, carry_state);
    req.temperature = config_.planner_temperature;

    ExecSession session(registry_, config_.concurrency_cap, &trace);
    std::string plan_text;

    if (config_.streaming) {
        StreamParser parser;
        plan_text = config_.planner->complete_streaming(req, [&](std::string_view chunk) {
            trace.record("plan_token");
            for (const auto& task : parser.feed(chunk)) session.submit(task);
        });
        for (const auto& task : parser.finish()) session.submit(task);
    } else {
        plan_text = config_.planner->complete(req);
        for (const auto& task : parse_plan(plan_text)) session.submit(task);
    }

    RunResult result = session.finish();

    RoundResult round;
    round.observations = result.observations;
    round.decision = decide(query, result.observations, result.join_summary);
    return round;
}

Orchestrator::RunOutcome Orchestrator::run(const std::string& query, RunTrace& trace) {
    RunOutcome outcome;
    std::optional<std::string> carry;
    int max_rounds = config_.max_replans + 1;

    for (int round = 1; round <= max_rounds; ++round) {
        outcome.rounds = round;
        if (round > 1) trace.record("replan");

        RoundResult result = run_round(query, carry, trace);
        if (result.decision.kind == JoinDecision::Kind::Finish) {
            outcome.finished = true;
            outcome.answer = result.decision.text;
            return outcome;
        }
        carry = result.decision.text;
    }
    outcome.finished = false;
    outcome.last_carry = carry;
    return outcome;
}

} // namespace dagex
