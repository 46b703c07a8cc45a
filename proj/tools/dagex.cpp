// dagex command-line tool: run queries end-to-end, validate plan files,
// benchmark mock workloads, and drive the latency simulator.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagex/config.hpp"
#include "dagex/executor.hpp"
#include "dagex/latency_model.hpp"
#include "dagex/llm_backend.hpp"
#include "dagex/plan_parser.hpp"
#include "dagex/replan.hpp"
#include "dagex/tools_game24.hpp"

namespace {

using namespace dagex;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    size_t n = xs.size();
    return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

int cmd_run(const std::string& query, const std::string& config_path,
            int stream_flag, int cap_override, int max_replans_override,
            const std::string& trace_override, bool as_json) {
    EngineSetup setup = build_engine_setup(config_path);
    if (stream_flag >= 0) setup.run_config.streaming = stream_flag != 0;
    if (cap_override >= 0) setup.run_config.concurrency_cap = cap_override;
    if (max_replans_override >= 0) setup.run_config.max_replans = max_replans_override;
    if (!trace_override.empty()) setup.trace_path = trace_override;

    Orchestrator orchestrator(setup.registry, setup.run_config);
    RunTrace trace;
    auto outcome = orchestrator.run(query, trace);

    if (!setup.trace_path.empty()) trace.save_jsonl(setup.trace_path);

    if (as_json) {
        json j;
        j["finished"] = outcome.finished;
        j["rounds"] = outcome.rounds;
        if (outcome.finished) j["answer"] = outcome.answer;
        if (outcome.last_carry) j["last_carry"] = *outcome.last_carry;
        std::cout << j.dump() << "\n";
    } else if (outcome.finished) {
        std::cout << outcome.answer << "\n";
    } else {
        std::cout << "ExhaustedRounds after " << outcome.rounds << " rounds";
        if (outcome.last_carry) std::cout << " (carry: " << *outcome.last_carry << ")";
        std::cout << "\n";
    }
    return outcome.finished ? 0 : 2;
}

int cmd_validate_plan(const std::string& plan_path) {
    std::ifstream in(plan_path);
    if (!in) {
        std::cerr << "error: cannot read " << plan_path << "\n";
        return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    PlanGraph graph = build_graph(parse_plan(buf.str()));
    size_t join_edges = graph.tasks.size() - 1;
    std::cout << "ok: " << graph.tasks.size() << " tasks (join = $" << graph.join_id
              << "), " << graph.edges.size() - join_edges
              << " explicit dependencies\n";
    return 0;
}

struct BenchPlan {
    std::string text;              // full plan including the join line
    PlanGraph graph;
    std::map<TaskId, double> durations; // seconds, non-join tasks
};

BenchPlan make_bench_plan(const std::string& shape, int n, double tool_s) {
    std::ostringstream out;
    if (shape == "parallel") {
        for (int i = 1; i <= n; ++i) {
            out << "$" << i << " = work(\"input " << i << "\")\n";
        }
        out << "$" << n + 1 << " = join()\n";
    } else if (shape == "chain") {
        out << "$1 = work(\"input 1\")\n";
        for (int i = 2; i <= n; ++i) {
            out << "$" << i << " = work($" << i - 1 << ")\n";
        }
        out << "$" << n + 1 << " = join()\n";
    } else { // fig2: two parallel lookups feeding one combine step
        out << "$1 = search(\"first company market cap\")\n"
            << "$2 = search(\"second company market cap\")\n"
            << "$3 = math(\"$1 / $2\")\n"
            << "$4 = join()\n";
    }
    BenchPlan plan;
    plan.text = out.str();
    plan.graph = build_graph(parse_plan(plan.text));
    for (const auto& task : plan.graph.tasks) {
        if (!task.is_join()) plan.durations[task.id] = tool_s;
    }
    return plan;
}

ToolRegistry make_bench_registry(std::chrono::milliseconds latency) {
    ToolRegistry registry;
    registry.register_tool(make_mock_tool("work", latency));
    registry.register_tool(make_mock_tool("search", latency));
    registry.register_tool(make_mock_tool("math", latency));
    return registry;
}

// One timed engine run over a fixed plan. The scripted backend models
// plan generation (delay_ms between emitted lines); batch modes wait for
// the full text, streamed mode dispatches per line.
double timed_plan_run(const ToolRegistry& registry, const BenchPlan& plan,
                      int cap, bool streamed, std::chrono::milliseconds plan_delay) {
    ScriptedBackend backend({ScriptedRule{"", plan.text, plan_delay, TokenSplit::Line}});
    CompletionRequest req;
    req.prompt = "bench";

    auto start = Clock::now();
    ExecSession session(registry, cap, nullptr);
    if (streamed) {
        StreamParser parser;
        backend.complete_streaming(req, [&](std::string_view chunk) {
            for (const auto& task : parser.feed(chunk)) session.submit(task);
        });
        for (const auto& task : parser.finish()) session.submit(task);
    } else {
        for (const auto& task : parse_plan(backend.complete(req))) {
            session.submit(task);
        }
    }
    session.finish();
    return ms_since(start);
}

double timed_game24_run(int cap, bool streamed) {
    ToolRegistry registry;
    game24::register_tools(registry);
    RunConfig config;
    config.planner = game24::make_planner_backend();
    config.answerer = game24::make_answerer_backend();
    config.concurrency_cap = cap;
    config.streaming = streamed;
    Orchestrator orchestrator(registry, config);

    RunTrace trace;
    auto start = Clock::now();
    orchestrator.run("2 4 4 7", trace);
    return ms_since(start);
}

int cmd_bench(const std::string& pattern, int trials, double tool_ms,
              double plan_delay_ms, bool as_json) {
    std::string shape;
    int n = 0;
    if (pattern == "fig2") {
        shape = "fig2";
        n = 3;
    } else if (pattern == "game24") {
        shape = "game24";
    } else if (pattern.rfind("parallel-", 0) == 0 || pattern.rfind("chain-", 0) == 0) {
        size_t dash = pattern.find('-');
        shape = pattern.substr(0, dash);
        n = std::stoi(pattern.substr(dash + 1));
        if (n < 1 || n > 64) {
            std::cerr << "error: N must be in [1, 64]\n";
            return 1;
        }
    } else {
        std::cerr << "error: unknown pattern " << pattern
                  << " (expected parallel-N, chain-N, fig2, game24)\n";
        return 1;
    }

    auto delay = std::chrono::milliseconds(static_cast<long>(plan_delay_ms));
    std::vector<double> seq, par, str;
    json predicted;

    if (shape == "game24") {
        for (int t = 0; t < trials; ++t) {
            seq.push_back(timed_game24_run(1, false));
            par.push_back(timed_game24_run(0, false));
            str.push_back(timed_game24_run(0, true));
        }
    } else {
        BenchPlan plan = make_bench_plan(shape, n, tool_ms / 1000.0);
        ToolRegistry registry =
            make_bench_registry(std::chrono::milliseconds(static_cast<long>(tool_ms)));
        for (int t = 0; t < trials; ++t) {
            seq.push_back(timed_plan_run(registry, plan, 1, false, delay));
            par.push_back(timed_plan_run(registry, plan, 0, false, delay));
            str.push_back(timed_plan_run(registry, plan, 0, true, delay));
        }

        // Predictions from the discrete-event simulator over the same
        // DAG. Line i of the plan arrives i * delay after the first;
        // batch modes additionally wait for the join line.
        size_t tasks = plan.durations.size();
        std::vector<double> stream_emit, batch_emit;
        for (size_t i = 0; i < tasks; ++i) {
            stream_emit.push_back(i * plan_delay_ms / 1000.0);
            batch_emit.push_back(tasks * plan_delay_ms / 1000.0);
        }
        predicted["sequential_ms"] =
            simulate_trace(plan.graph, plan.durations, batch_emit, false, 1).makespan *
            1000.0;
        predicted["parallel_ms"] =
            simulate_trace(plan.graph, plan.durations, batch_emit, false, 0).makespan *
            1000.0;
        predicted["streamed_ms"] =
            simulate_trace(plan.graph, plan.durations, stream_emit, true, 0).makespan *
            1000.0;
        if (shape == "parallel") {
            // Closed-form check for the embarrassingly parallel shape.
            WorkloadProfile w;
            w.plan_react.assign(n, plan_delay_ms / 1000.0);
            w.plan_compiler.assign(n, plan_delay_ms / 1000.0);
            w.exec.assign(n, tool_ms / 1000.0);
            if (plan_delay_ms > 0) predicted["gamma"] = speedup(w).gamma;
        }
    }

    double seq_med = median(seq), par_med = median(par), str_med = median(str);
    double speedup_measured = par_med > 0 ? seq_med / par_med : 0.0;

    if (as_json) {
        json j;
        j["pattern"] = pattern;
        j["trials"] = trials;
        j["sequential_ms"] = seq_med;
        j["parallel_ms"] = par_med;
        j["streamed_ms"] = str_med;
        j["speedup"] = speedup_measured;
        if (!predicted.empty()) j["predicted"] = predicted;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "pattern=" << pattern << " trials=" << trials << "\n"
                  << "  sequential_ms=" << seq_med << " parallel_ms=" << par_med
                  << " streamed_ms=" << str_med << " speedup=" << speedup_measured
                  << "\n";
        if (!predicted.empty()) {
            std::cout << "  predicted: " << predicted.dump() << "\n";
        }
    }
    return 0;
}

int cmd_simulate(const std::string& workload_path, const std::string& csv_path) {
    WorkloadProfile w = WorkloadProfile::load_json(workload_path);
    std::cout << speedup_report_json(speedup(w)) << "\n";

    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + csv_path);
        out << "n,t_react,t_compiler,t_streamed\n";
        for (size_t k = 1; k <= w.n(); ++k) {
            WorkloadProfile prefix;
            prefix.plan_react.assign(w.plan_react.begin(), w.plan_react.begin() + k);
            prefix.plan_compiler.assign(w.plan_compiler.begin(),
                                        w.plan_compiler.begin() + k);
            prefix.exec.assign(w.exec.begin(), w.exec.begin() + k);
            out << k << "," << react_latency(prefix) << "," << compiler_latency(prefix)
                << "," << streamed_latency(prefix) << "\n";
        }
    }
    return 0;
}

int cmd_trace_export(const std::string& in_path, const std::string& out_path) {
    auto events = RunTrace::load_jsonl(in_path);
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
    out << "t_ms,event,task_id,tool,ok\n";
    for (const auto& e : events) {
        out << e.t_ms << "," << e.event << ",";
        if (e.task_id) out << *e.task_id;
        out << ",";
        if (e.tool) out << *e.tool;
        out << ",";
        if (e.ok) out << (*e.ok ? "true" : "false");
        out << "\n";
    }
    std::cout << "wrote " << events.size() << " events to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dagex: parallel function-calling orchestration engine"};
    app.require_subcommand(1);

    // run
    std::string query, config_path = "dagex.toml", trace_override;
    int cap_override = -1, max_replans_override = -1;
    int stream_flag = -1; // -1 = from config
    bool run_json = false;
    auto* run = app.add_subcommand("run", "Run a query end-to-end");
    run->add_option("query", query, "The user query")->required();
    run->add_option("--config", config_path, "Config file path");
    run->add_flag_callback("--stream", [&] { stream_flag = 1; },
                           "Stream the plan into the executor");
    run->add_flag_callback("--no-stream", [&] { stream_flag = 0; },
                           "Wait for the full plan before executing");
    run->add_option("--cap", cap_override, "Concurrency cap (0 = unlimited)");
    run->add_option("--max-replans", max_replans_override, "Replan round limit");
    run->add_option("--trace", trace_override, "Trace JSONL output path");
    run->add_flag("--json", run_json, "Print the outcome as JSON");

    // validate-plan
    std::string plan_path;
    auto* validate = app.add_subcommand("validate-plan", "Parse and check a plan file");
    validate->add_option("plan", plan_path, "Plan DSL file")->required();

    // bench
    std::string pattern;
    int trials = 3;
    double tool_ms = 500.0, plan_delay_ms = 0.0;
    bool bench_json = false;
    auto* bench = app.add_subcommand("bench", "Benchmark mock workload patterns");
    bench->add_option("pattern", pattern, "parallel-N | chain-N | fig2 | game24")
        ->required();
    bench->add_option("--trials", trials, "Trials per mode (median reported)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--tool-ms", tool_ms, "Mock tool latency in ms");
    bench->add_option("--plan-delay-ms", plan_delay_ms,
                      "Scripted planner delay between plan lines");
    bench->add_flag("--json", bench_json, "One JSON object per line");

    // simulate
    std::string workload_path, csv_path;
    auto* simulate = app.add_subcommand("simulate", "Analytic latency model report");
    simulate->add_option("workload", workload_path, "Workload profile JSON")->required();
    simulate->add_option("--csv", csv_path, "Write per-N makespans as CSV");

    // trace-export
    std::string trace_in, trace_out;
    auto* export_cmd = app.add_subcommand("trace-export", "Convert a JSONL trace to CSV");
    export_cmd->add_option("trace", trace_in, "Trace JSONL file")->required();
    export_cmd->add_option("out", trace_out, "CSV output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(query, config_path, stream_flag, cap_override,
                           max_replans_override, trace_override, run_json);
        }
        if (validate->parsed()) return cmd_validate_plan(plan_path);
        if (bench->parsed()) {
            return cmd_bench(pattern, trials, tool_ms, plan_delay_ms, bench_json);
        }
        if (simulate->parsed()) return cmd_simulate(workload_path, csv_path);
        if (export_cmd->parsed()) return cmd_trace_export(trace_in, trace_out);
    } catch (const SyntaxError& e) {
        std::cerr << "error: line " << e.line_no() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
