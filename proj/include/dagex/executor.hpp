#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dagex/task_fetcher.hpp"
#include "dagex/trace.hpp"

namespace dagex {

// Per-task scratch log for intermediate outputs; never shared between
// concurrently running tasks.
struct TaskMemory {
    TaskId task_id = 0;
    std::vector<std::string> log;

    void note(std::string entry) { log.push_back(std::move(entry)); }
};

enum class ArgKind { Text, Number, List, Any };

struct ToolSpec {
    std::string name;
    std::string description; // injected into the planner prompt
    std::vector<std::pair<std::string, ArgKind>> arg_schema;
    std::function<Value(const std::vector<Value>&, TaskMemory&)> run;
    std::chrono::milliseconds timeout{60000};
    // Fixed duration for mock/simulated tools; consumed by bench and
    // the latency simulator.
    std::optional<std::chrono::milliseconds> latency_class;
};

class ToolRegistry {
public:
    void register_tool(ToolSpec spec);
    const ToolSpec* find(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }
    size_t size() const { return tools_.size(); }
    std::vector<const ToolSpec*> all() const;

private:
    std::vector<ToolSpec> tools_;
};

// A mock tool that sleeps for its latency class and echoes its inputs.
ToolSpec make_mock_tool(const std::string& name, std::chrono::milliseconds latency,
                        int arity = 1);

// Runs one task to an Observation. Every fault (unknown tool, schema
// mismatch, timeout, tool exception) becomes a Failure observation.
Observation execute_task(const ToolRegistry& registry, const TaskSpec& task,
                         const std::vector<Value>& concrete_args, TaskMemory& memory);

struct RunResult {
    std::map<TaskId, Observation> observations;
    std::set<TaskId> skipped;
    TaskId join_id = 0;
    // The join's collected summary, one "$id = ..." line per task.
    std::string join_summary;
};

// One plan execution: accepts tasks (all at once or streamed), runs
// every dispatchable task on its own worker under the concurrency cap,
// and resolves the join. submit() may be called while workers run.
class ExecSession {
public:
    // cap == 0 means unlimited.
    ExecSession(const ToolRegistry& registry, int cap, RunTrace* trace);
    ~ExecSession();

    ExecSession(const ExecSession&) = delete;
    ExecSession& operator=(const ExecSession&) = delete;

    void submit(const TaskSpec& task);
    // Blocks until the join resolves. The join line must have been
    // submitted.
    RunResult finish();

private:
    void pump_locked(std::unique_lock<std::mutex>& lock);
    void enqueue_ready_locked(const std::vector<TaskId>& ids);
    void run_worker(TaskSpec task, std::vector<Value> args);
    void resolve_join_locked();

    const ToolRegistry& registry_;
    int cap_;
    RunTrace* trace_;

    std::mutex mutex_;
    std::condition_variable cv_;
    FetchState state_;
    std::deque<TaskId> ready_;
    int running_ = 0;
    std::vector<std::thread> workers_;
    std::string join_summary_;
    bool join_resolved_ = false;
};

// Blocking whole-plan execution.
RunResult run_plan(const ToolRegistry& registry, const PlanGraph& graph, int cap = 0,
                   RunTrace* trace = nullptr);

// Non-blocking variant; invokes the callback with the result on a
// detached thread.
void run_plan_async(const ToolRegistry& registry, PlanGraph graph, int cap,
                    RunTrace* trace, std::function<void(RunResult)> on_done);

} // namespace dagex
