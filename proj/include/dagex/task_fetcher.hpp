#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dagex/plan_ir.hpp"
#include "dagex/value.hpp"

namespace dagex {

// Result of one executed task. ok == false marks a Failure; dependents
// of a failed task are skipped, never executed.
struct Observation {
    TaskId task_id = 0;
    bool ok = true;
    Value value;
    std::string error;

    static Observation success(TaskId id, Value v) {
        return Observation{id, true, std::move(v), {}};
    }
    static Observation failure(TaskId id, std::string err) {
        return Observation{id, false, {}, std::move(err)};
    }
};

// Replaces every $N placeholder with the rendered observation of task N;
// bare refs forward the observation value preserving its kind; lists
// substitute element-wise. Throws MissingObservation on an unsatisfied
// placeholder (internal invariant breach).
std::vector<Value> substitute(const std::vector<ArgValue>& args,
                              const std::map<TaskId, Observation>& observations);

// Completion tracker of the Task Fetching Unit. Supports batch
// construction from a full graph and incremental task arrival for
// streamed planning. Not internally synchronized; the executor guards
// it with one mutex.
class FetchState {
public:
    FetchState() = default;
    explicit FetchState(const PlanGraph& graph);

    // Streaming: registers a task as it is emitted by the planner.
    // Returns the ids that became dispatchable (marked dispatched).
    std::vector<TaskId> add_task(const TaskSpec& task);

    // Batch: dispatches every initially-ready task.
    std::vector<TaskId> initial_dispatch();

    struct DoneResult {
        std::vector<TaskId> newly_ready;
        std::vector<TaskId> newly_skipped;
    };

    // Records an observation for a dispatched task. On failure,
    // transitively skips dependents (the join excepted). Newly ready
    // ids are returned ascending and marked dispatched.
    DoneResult on_task_done(const Observation& obs);

    bool join_seen() const { return join_id_ != 0; }
    TaskId join_id() const { return join_id_; }
    // True once every non-join task is observed or skipped.
    bool join_ready() const;
    bool done() const;

    const std::map<TaskId, Observation>& observations() const { return observations_; }
    const std::set<TaskId>& dispatched() const { return dispatched_; }
    const std::set<TaskId>& skipped() const { return skipped_; }
    const TaskSpec& task(TaskId id) const;

private:
    bool deps_satisfied(TaskId id) const;
    bool should_skip(TaskId id) const;
    void skip_transitively(TaskId id, std::vector<TaskId>& newly_skipped);
    std::vector<TaskId> collect_ready();

    std::map<TaskId, TaskSpec> tasks_;
    std::map<TaskId, std::set<TaskId>> deps_;
    std::map<TaskId, std::set<TaskId>> dependents_;
    std::map<TaskId, Observation> observations_;
    std::set<TaskId> dispatched_;
    std::set<TaskId> skipped_;
    TaskId join_id_ = 0;
};

} // namespace dagex
