#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "dagex/latency_model.hpp"
#include "dagex/plan_parser.hpp"
#include "dagex/replan.hpp"
#include "dagex/tools_game24.hpp"
#include "dagex/trace.hpp"
#include "test_helpers.hpp"

using namespace dagex;
namespace g24 = dagex::game24;

TEST_CASE("game state serialization round-trips") {
    auto puzzle = g24::parse_puzzle("1 2 3 4");
    g24::GameState initial = g24::GameState::initial(puzzle);
    CHECK(initial.serialize() == "");
    CHECK(g24::GameState::parse(puzzle, "").remaining.size() == 4);

    auto successors = g24::thought_proposer(initial);
    REQUIRE(!successors.empty());
    for (const auto& s : successors) {
        g24::GameState parsed = g24::GameState::parse(puzzle, s.serialize());
        CHECK(parsed.serialize() == s.serialize());
        CHECK(parsed.remaining == s.remaining);
    }
}

TEST_CASE("parse_puzzle validates shape and range") {
    CHECK(g24::parse_puzzle("13 1 7 2").size() == 4);
    CHECK_THROWS_AS(g24::parse_puzzle("1 2 3"), Error);
    CHECK_THROWS_AS(g24::parse_puzzle("1 2 3 14"), Error);
    CHECK_THROWS_AS(g24::parse_puzzle("1 2 3 0"), Error);
}

TEST_CASE("thought_proposer covers all pair-operation successors") {
    // Distinct numbers: C(4,2)=6 pairs x {+, *, a-b, b-a, a/b, b/a},
    // minus duplicate commutative results already deduplicated.
    auto states = g24::thought_proposer(g24::GameState::initial(g24::parse_puzzle("1 2 3 4")));
    for (const auto& s : states) CHECK(s.remaining.size() == 3);
    CHECK(states.size() >= 30); // 6 pairs x at least 5 distinct ops
    CHECK_THROWS_AS(
        g24::thought_proposer(g24::GameState{
            {Rational(1)}, {}, {Rational(24)}}),
        Error);
}

TEST_CASE("solvable_to_24 matches exhaustive small-case enumeration") {
    // Oracle for two numbers: some op yields exactly 24.
    auto two_solvable = [](int a, int b) {
        Rational ra(a), rb(b);
        std::vector<Rational> results{ra + rb, ra * rb, ra - rb, rb - ra};
        if (b != 0) results.push_back(ra / rb);
        if (a != 0) results.push_back(rb / ra);
        for (const auto& r : results) {
            if (r == Rational(24)) return true;
        }
        return false;
    };
    for (int a = 1; a <= 13; ++a) {
        for (int b = a; b <= 13; ++b) {
            CHECK(g24::solvable_to_24({Rational(a), Rational(b)}) == two_solvable(a, b));
        }
    }
    // Known four-number cases.
    CHECK(g24::solvable_to_24(g24::parse_puzzle("1 2 3 4")));
    CHECK(g24::solvable_to_24(g24::parse_puzzle("3 3 8 8")));
    CHECK_FALSE(g24::solvable_to_24(g24::parse_puzzle("1 1 1 1")));
}

TEST_CASE("state_evaluator is exact and top_k keeps sure states stably") {
    auto puzzle = g24::parse_puzzle("1 2 3 4");
    auto states = g24::thought_proposer(g24::GameState::initial(puzzle));
    std::vector<std::string> labels;
    for (const auto& s : states) {
        std::string label = g24::state_evaluator(s);
        CHECK((label == "sure" || label == "impossible"));
        CHECK((label == "sure") == g24::solvable_to_24(s.remaining));
        labels.push_back(label);
    }
    auto top = g24::top_k_select(states, labels, 5);
    CHECK(top.size() <= 5);
    for (const auto& s : top) CHECK(g24::solvable_to_24(s.remaining));
    CHECK_THROWS_AS(g24::top_k_select(states, {"sure"}, 5), Error);
}

TEST_CASE("solution expressions validate exactly") {
    CHECK(g24::validate_solution("(1*2)*(3*4)", "1 2 3 4"));
    CHECK(g24::validate_solution("8/(3-(8/3))", "3 3 8 8"));
    CHECK_FALSE(g24::validate_solution("(1*2)*(3*4)", "1 2 3 5")); // wrong literals
    CHECK_FALSE(g24::validate_solution("1+2+3+4", "1 2 3 4"));      // equals 10
}

TEST_CASE("deterministic game24 loop solves a puzzle within 2 replans") {
    ToolRegistry registry;
    g24::register_tools(registry);
    RunConfig config;
    config.planner = g24::make_planner_backend();
    config.answerer = g24::make_answerer_backend();
    config.max_replans = 4;
    Orchestrator orchestrator(registry, config);

    RunTrace trace;
    auto outcome = orchestrator.run("2 4 4 7", trace);
    REQUIRE(outcome.finished);
    CHECK(outcome.rounds <= 3);
    CHECK(g24::validate_solution(outcome.answer, "2 4 4 7"));
}

TEST_CASE("unsolvable puzzle exhausts its replan budget") {
    ToolRegistry registry;
    g24::register_tools(registry);
    RunConfig config;
    config.planner = g24::make_planner_backend();
    config.answerer = g24::make_answerer_backend();
    config.max_replans = 4;
    Orchestrator orchestrator(registry, config);

    RunTrace trace;
    auto outcome = orchestrator.run("1 1 1 1", trace);
    CHECK_FALSE(outcome.finished);
    CHECK(outcome.rounds == 5);
}

TEST_CASE("speedup reproduces the closed-form bounds") {
    // Exec-dominated uniform profile: gamma -> N exactly when planning
    // time is zero under the sequential baseline too.
    WorkloadProfile heavy;
    int n = 6;
    heavy.plan_react.assign(n, 0.0);
    heavy.plan_compiler.assign(n, 0.0);
    heavy.exec.assign(n, 2.0);
    // Zero planning makes gamma exactly T_R/T_C = 2n/2 = n.
    CHECK_THROWS_AS(speedup(heavy), Error); // gamma_min undefined at 0 planning

    heavy.plan_react.assign(n, 1e-12);
    heavy.plan_compiler.assign(n, 1e-12);
    SpeedupReport r = speedup(heavy);
    CHECK(r.gamma == doctest::Approx(n).epsilon(1e-6));
    CHECK(r.gamma_max == n);

    // Plan-dominated profile: gamma -> gamma_min = sum(plan_react)/sum(plan_compiler).
    WorkloadProfile plan_heavy;
    plan_heavy.plan_react.assign(n, 3.0);
    plan_heavy.plan_compiler.assign(n, 3.0);
    plan_heavy.exec.assign(n, 1e-12);
    SpeedupReport p = speedup(plan_heavy);
    CHECK(p.gamma_min == 1.0);
    CHECK(p.gamma == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("simulate_trace equals the closed forms on parallel profiles") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dur(0.1, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + trial % 7;
        WorkloadProfile w;
        double e = dur(rng);
        for (int i = 0; i < n; ++i) {
            w.plan_react.push_back(dur(rng));
            w.plan_compiler.push_back(dur(rng));
            w.exec.push_back(e); // uniform exec
        }
        std::ostringstream plan;
        for (int i = 1; i <= n; ++i) plan << "$" << i << " = work(\"" << i << "\")\n";
        plan << "$" << n + 1 << " = join()\n";
        PlanGraph graph = build_graph(parse_plan(plan.str()));

        std::map<TaskId, double> durations;
        for (int i = 1; i <= n; ++i) durations[i] = w.exec[i - 1];
        std::vector<double> emissions;
        double t = 0.0;
        for (int i = 0; i < n; ++i) {
            t += w.plan_compiler[i];
            emissions.push_back(t);
        }

        SimResult batch = simulate_trace(graph, durations, emissions, false, 0);
        CHECK(batch.makespan == compiler_latency(w));
        SimResult streamed = simulate_trace(graph, durations, emissions, true, 0);
        CHECK(streamed.makespan == streamed_latency(w));
    }
}

TEST_CASE("simulated weak scaling: react grows with N, compiler does not") {
    double base_compiler = 0.0;
    double prev_react = 0.0;
    for (int n : {2, 4, 8}) {
        std::ostringstream plan;
        for (int i = 1; i <= n; ++i) plan << "$" << i << " = work(\"" << i << "\")\n";
        plan << "$" << n + 1 << " = join()\n";
        PlanGraph graph = build_graph(parse_plan(plan.str()));
        std::map<TaskId, double> durations;
        for (int i = 1; i <= n; ++i) durations[i] = 0.5;
        std::vector<double> emissions(n, 0.0);

        double react = simulate_trace(graph, durations, emissions, false, 1).makespan;
        double compiler = simulate_trace(graph, durations, emissions, false, 0).makespan;
        CHECK(react == doctest::Approx(0.5 * n));
        if (n == 2) {
            base_compiler = compiler;
        } else {
            CHECK(compiler <= base_compiler * 1.2);
            CHECK(react > prev_react);
        }
        prev_react = react;
    }
}

TEST_CASE("simulate_trace respects dependencies and the cap") {
    PlanGraph graph = build_graph(parse_plan(
        "$1 = work(\"a\")\n$2 = work(\"b\")\n$3 = work(\"$1 $2\")\n$4 = join()\n"));
    std::map<TaskId, double> durations{{1, 1.0}, {2, 2.0}, {3, 1.0}};
    std::vector<double> emissions{0.0, 0.0, 0.0};
    CHECK(simulate_trace(graph, durations, emissions, false, 0).makespan == 3.0);
    CHECK(simulate_trace(graph, durations, emissions, false, 1).makespan == 4.0);
    CHECK_THROWS_AS(simulate_trace(graph, {{1, 1.0}}, emissions, false, 0), Error);
}

TEST_CASE("planner prompt embeds tools, rules, examples, and carry state") {
    ToolRegistry registry;
    g24::register_tools(registry);
    std::string ex1 = testutil::read_file(testutil::data_path("examples/game24_example_1.txt"));
    std::string ex2 = testutil::read_file(testutil::data_path("examples/game24_example_2.txt"));

    std::string prompt =
        assemble_planner_prompt(registry.all(), {ex1, ex2}, "1 2 3 4", std::nullopt);
    CHECK(prompt.find("Available actions:") != std::string::npos);
    CHECK(prompt.find("join(): collects all observations") != std::string::npos);
    CHECK(prompt.find("Ensure the plan maximizes parallelizability.") !=
          std::string::npos);
    CHECK(prompt.find(ex1) != std::string::npos);
    CHECK(prompt.find(ex2) != std::string::npos);
    CHECK(prompt.find("Question: 1 2 3 4\n") != std::string::npos);

    std::string replan = assemble_planner_prompt(registry.all(), {}, "1 2 3 4",
                                                 std::string("[\"1+2=3(left:3 3 4)\"]"));
    CHECK(replan.find("Question: \"1 2 3 4\", state_list: [\"1+2=3(left:3 3 4)\"]") !=
          std::string::npos);
}

TEST_CASE("orchestrator enforces the FINISH/REPLAN protocol") {
    ToolRegistry registry;
    registry.register_tool(make_mock_tool("work", std::chrono::milliseconds(0)));
    RunConfig config;
    config.planner = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"", "$1 = work(\"x\")\n$2 = join()\n", std::chrono::milliseconds(0),
         TokenSplit::Line}});
    config.answerer = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"", "I refuse to follow instructions", std::chrono::milliseconds(0),
         TokenSplit::Line}});
    Orchestrator bad(registry, config);
    RunTrace trace;
    CHECK_THROWS_AS(bad.run("q", trace), Error);

    config.answerer = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"", "FINISH: answer is $1", std::chrono::milliseconds(0), TokenSplit::Line}});
    Orchestrator good(registry, config);
    auto outcome = good.run("q", trace);
    REQUIRE(outcome.finished);
    CHECK(outcome.answer == "answer is work(x)");
}

TEST_CASE("replan rounds are bounded and traced") {
    ToolRegistry registry;
    registry.register_tool(make_mock_tool("work", std::chrono::milliseconds(0)));
    RunConfig config;
    config.max_replans = 2;
    config.planner = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"", "$1 = work(\"x\")\n$2 = join()\n", std::chrono::milliseconds(0),
         TokenSplit::Line}});
    config.answerer = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
        {"", "REPLAN: [\"carry\"]", std::chrono::milliseconds(0), TokenSplit::Line}});
    Orchestrator orchestrator(registry, config);
    RunTrace trace;
    auto outcome = orchestrator.run("q", trace);
    CHECK_FALSE(outcome.finished);
    CHECK(outcome.rounds == 3);
    REQUIRE(outcome.last_carry.has_value());
    CHECK(*outcome.last_carry == "[\"carry\"]");
    int replans = 0;
    for (const auto& e : trace.events()) {
        if (e.event == "replan") ++replans;
    }
    CHECK(replans == 2);
}

TEST_CASE("streamed orchestration produces the same outcome as batch") {
    ToolRegistry registry;
    registry.register_tool(make_mock_tool("work", std::chrono::milliseconds(0)));
    for (bool streaming : {false, true}) {
        RunConfig config;
        config.streaming = streaming;
        config.planner = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
            {"", "$1 = work(\"x\")\n$2 = work(\"$1\")\n$3 = join()\n",
             std::chrono::milliseconds(0), TokenSplit::Line}});
        config.answerer = std::make_shared<ScriptedBackend>(std::vector<ScriptedRule>{
            {"", "FINISH: $2", std::chrono::milliseconds(0), TokenSplit::Line}});
        Orchestrator orchestrator(registry, config);
        RunTrace trace;
        auto outcome = orchestrator.run("q", trace);
        REQUIRE(outcome.finished);
        CHECK(outcome.answer == "work(work(x))");
    }
}

TEST_CASE("trace JSONL round-trips through save and load") {
    RunTrace trace;
    trace.record("dispatch", 1, std::string("work"));
    trace.record("complete", 1, std::string("work"), true);
    trace.record("join", 2, std::string("join"), true);

    std::string path = "trace_roundtrip_test.jsonl";
    trace.save_jsonl(path);
    auto events = RunTrace::load_jsonl(path);
    REQUIRE(events.size() == 3);
    CHECK(events[0].event == "dispatch");
    CHECK(events[0].task_id == 1);
    CHECK_FALSE(events[0].ok.has_value());
    CHECK(events[1].ok == true);
    std::remove(path.c_str());
}
