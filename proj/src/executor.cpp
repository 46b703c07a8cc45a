#include "dagex/executor.hpp"

#include <future>
#include <sstream>

namespace dagex {

void ToolRegistry::register_tool(ToolSpec spec) {
    if (spec.name == kJoinToolName) {
        throw Error(ErrorCode::ReservedTool, "'join' is reserved");
    }
    if (spec.name.empty()) {
        throw Error(ErrorCode::ConfigError, "tool name empty");
    }
    if (find(spec.name)) {
        throw Error(ErrorCode::DuplicateTool, spec.name);
    }
    tools_.push_back(std::move(spec));
}

const ToolSpec* ToolRegistry::find(const std::string& name) const {
    for (const auto& t : tools_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::vector<const ToolSpec*> ToolRegistry::all() const {
    std::vector<const ToolSpec*> out;
    out.reserve(tools_.size());
    for (const auto& t : tools_) out.push_back(&t);
    return out;
}

ToolSpec make_mock_tool(const std::string& name, std::chrono::milliseconds latency,
                        int arity) {
    ToolSpec spec;
    spec.name = name;
    spec.description = "mock tool '" + name + "' with fixed latency";
    for (int i = 0; i < arity; ++i) {
        spec.arg_schema.emplace_back("arg" + std::to_string(i), ArgKind::Any);
    }
    spec.latency_class = latency;
    spec.run = [name, latency](const std::vector<Value>& args, TaskMemory&) {
        std::this_thread::sleep_for(latency);
        std::string out = name + "(";
        for (size_t i = 0; i < args.size(); ++i) {
            if (i) out += ", ";
            out += args[i].render();
        }
        out += ")";
        return Value::make_text(std::move(out));
    };
    return spec;
}

namespace {

bool kind_matches(ArgKind want, const Value& v) {
    switch (want) {
    case ArgKind::Any: return true;
    case ArgKind::Text: return v.kind == Value::Kind::Text;
    case ArgKind::Number: return v.kind == Value::Kind::Number;
    case ArgKind::List: return v.kind == Value::Kind::List;
    }
    return false;
}

} // namespace

Observation execute_task(const ToolRegistry& registry, const TaskSpec& task,
                         const std::vector<Value>& concrete_args, TaskMemory& memory) {
    const ToolSpec* spec = registry.find(task.tool);
    if (!spec) {
        return Observation::failure(task.id, "UnknownTool: " + task.tool);
    }
    if (concrete_args.size() != spec->arg_schema.size()) {
        return Observation::failure(
            task.id, "ArgSchemaMismatch: " + task.tool + " expects " +
                         std::to_string(spec->arg_schema.size()) + " args, got " +
                         std::to_string(concrete_args.size()));
    }
    for (size_t i = 0; i < concrete_args.size(); ++i) {
        if (!kind_matches(spec->arg_schema[i].second, concrete_args[i])) {
            return Observation::failure(task.id, "ArgSchemaMismatch: " + task.tool +
                                                     " arg '" + spec->arg_schema[i].first +
                                                     "' has wrong kind");
        }
    }

    struct Outcome {
        Observation obs;
        std::vector<std::string> log;
    };
    auto prom = std::make_shared<std::promise<Outcome>>();
    auto fut = prom->get_future();
    auto run = spec->run;
    TaskId id = task.id;
    // The tool runs on its own thread so a hang converts to ToolTimeout;
    // it gets a private TaskMemory since the caller's may go out of scope
    // if the timeout fires first.
    std::thread([prom, run, concrete_args, id] {
        Outcome out;
        TaskMemory mem{id, {}};
        try {
            Value v = run(concrete_args, mem);
            out.obs = Observation::success(id, std::move(v));
        } catch (const Error& e) {
            out.obs = Observation::failure(id, e.what());
        } catch (const std::exception& e) {
            out.obs = Observation::failure(id, std::string("ToolError: ") + e.what());
        }
        out.log = std::move(mem.log);
        try {
            prom->set_value(std::move(out));
        } catch (const std::future_error&) {
        }
    }).detach();

    if (fut.wait_for(spec->timeout) != std::future_status::ready) {
        return Observation::failure(task.id, "ToolTimeout: " + task.tool + " exceeded " +
                                                 std::to_string(spec->timeout.count()) +
                                                 " ms");
    }
    Outcome out = fut.get();
    for (auto& entry : out.log) memory.note(std::move(entry));
    return out.obs;
}

ExecSession::ExecSession(const ToolRegistry& registry, int cap, RunTrace* trace)
    : registry_(registry), cap_(cap), trace_(trace) {}

ExecSession::~ExecSession() {
    for (auto& w : workers_) {
        if (w.joinable()) w.join();
    }
}

void ExecSession::submit(const TaskSpec& task) {
    std::unique_lock lock(mutex_);
    enqueue_ready_locked(state_.add_task(task));
    pump_locked(lock);
}

void ExecSession::enqueue_ready_locked(const std::vector<TaskId>& ids) {
    for (TaskId id : ids) ready_.push_back(id);
}

void ExecSession::pump_locked(std::unique_lock<std::mutex>& lock) {
    while (!ready_.empty()) {
        TaskId id = ready_.front();
        if (id == state_.join_id()) {
            ready_.pop_front();
            resolve_join_locked();
            continue;
        }
        if (cap_ != 0 && running_ >= cap_) break;
        ready_.pop_front();

        const TaskSpec& task = state_.task(id);
        // dispatch safety: every dependency must carry a successful
        // observation at this point
        std::vector<Value> args = substitute(task.args, state_.observations());

        if (trace_) trace_->record("dispatch", id, task.tool, std::nullopt);
        ++running_;
        workers_.emplace_back(&ExecSession::run_worker, this, task, std::move(args));
    }
}

void ExecSession::run_worker(TaskSpec task, std::vector<Value> args) {
    TaskMemory memory{task.id, {}};
    Observation obs = execute_task(registry_, task, args, memory);

    std::unique_lock lock(mutex_);
    if (trace_) trace_->record("complete", task.id, task.tool, obs.ok);
    --running_;
    FetchState::DoneResult r = state_.on_task_done(obs);
    enqueue_ready_locked(r.newly_ready);
    pump_locked(lock);
    cv_.notify_all();
}

void ExecSession::resolve_join_locked() {
    if (join_resolved_) return;
    std::ostringstream summary;
    std::set<TaskId> ids;
    for (const auto& [id, obs] : state_.observations()) ids.insert(id);
    for (TaskId id : state_.skipped()) ids.insert(id);
    for (TaskId id : ids) {
        if (id == state_.join_id()) continue;
        summary << "$" << id << " (" << state_.task(id).tool << ") ";
        if (state_.skipped().count(id)) {
            summary << "skipped\n";
            continue;
        }
        const Observation& obs = state_.observations().at(id);
        if (obs.ok) {
            summary << "= " << obs.value.render() << "\n";
        } else {
            summary << "failed: " << obs.error << "\n";
        }
    }
    join_summary_ = summary.str();
    if (trace_) trace_->record("join", state_.join_id(), kJoinToolName, true);
    state_.on_task_done(
        Observation::success(state_.join_id(), Value::make_text(join_summary_)));
    join_resolved_ = true;
    cv_.notify_all();
}

RunResult ExecSession::finish() {
    RunResult result;
    {
        std::unique_lock lock(mutex_);
        if (!state_.join_seen()) {
            throw Error(ErrorCode::MissingJoin, "finish() before join was submitted");
        }
        cv_.wait(lock, [&] { return join_resolved_; });
        result.observations = state_.observations();
        result.skipped = state_.skipped();
        result.join_id = state_.join_id();
        result.join_summary = join_summary_;
    }
    for (auto& w : workers_) {
        if (w.joinable()) w.join();
    }
    return result;
}

RunResult run_plan(const ToolRegistry& registry, const PlanGraph& graph, int cap,
                   RunTrace* trace) {
    ExecSession session(registry, cap, trace);
    for (const auto& task : graph.tasks) session.submit(task);
    return session.finish();
}

void run_plan_async(const ToolRegistry& registry, PlanGraph graph, int cap,
                    RunTrace* trace, std::function<void(RunResult)> on_done) {
    std::thread([&registry, graph = std::move(graph), cap, trace,
                 on_done = std::move(on_done)] {
        on_done(run_plan(registry, graph, cap, trace));
    }).detach();
}

} // namespace dagex
