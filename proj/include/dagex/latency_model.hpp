#pragma once

#include <map>
#include <string>
#include <vector>

#include "dagex/plan_ir.hpp"
#include "dagex/trace.hpp"

namespace dagex {

// Per-task timings (seconds) of an N-task workload: planning time per
// task under a ReAct-style loop, planning time per task under one-shot
// compiled planning, and tool execution time per task.
struct WorkloadProfile {
    std::vector<double> plan_react;
    std::vector<double> plan_compiler;
    std::vector<double> exec;

    size_t n() const { return exec.size(); }
    void validate() const;

    static WorkloadProfile load_json(const std::string& path);
};

struct SpeedupReport {
    double t_react = 0.0;
    double t_compiler = 0.0;
    double t_streamed = 0.0;
    double gamma = 0.0;
    double gamma_max = 0.0; // equals N
    double gamma_min = 0.0; // sum(plan_react) / sum(plan_compiler), -> 1
};

// Sequential agent: sum of per-task planning plus execution.
double react_latency(const WorkloadProfile& w);
// One-shot plan, embarrassingly parallel execution: total planning plus
// the longest task.
double compiler_latency(const WorkloadProfile& w);
// Streamed planning: total planning plus the last task's execution.
double streamed_latency(const WorkloadProfile& w);

SpeedupReport speedup(const WorkloadProfile& w);

std::string speedup_report_json(const SpeedupReport& r);

struct SimResult {
    double makespan = 0.0;
    std::vector<TraceEvent> events; // dispatch/complete, t_ms in seconds*1000
};

// Discrete-event cross-check for arbitrary DAGs: a task becomes
// eligible at its plan-emission time (streaming) or the last emission
// time (batch), plus all dependency completions; at most `cap` tasks
// run at once (0 = unlimited); ties dispatch in ascending id order.
// `emission_times` has one entry per non-join task, in task order.
SimResult simulate_trace(const PlanGraph& graph,
                         const std::map<TaskId, double>& tool_durations,
                         const std::vector<double>& emission_times, bool streaming,
                         int cap);

} // namespace dagex
