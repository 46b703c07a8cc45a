#include "dagex/task_fetcher.hpp"

#include <algorithm>
#include <deque>

namespace dagex {

namespace {

Value substitute_one(const ArgValue& arg, const std::map<TaskId, Observation>& obs) {
    auto lookup = [&](TaskId id) -> const Observation& {
        auto it = obs.find(id);
        if (it == obs.end() || !it->second.ok) {
            throw Error(ErrorCode::MissingObservation,
                        "no successful observation for $" + std::to_string(id));
        }
        return it->second;
    };

    switch (arg.kind) {
    case ArgValue::Kind::Text: {
        if (arg.placeholders.empty()) return Value::make_text(arg.text);
        std::string out;
        const std::string& t = arg.text;
        for (size_t i = 0; i < t.size(); ++i) {
            if (t[i] == '$' && i + 1 < t.size() &&
                isdigit(static_cast<unsigned char>(t[i + 1]))) {
                size_t j = i + 1;
                long id = 0;
                while (j < t.size() && isdigit(static_cast<unsigned char>(t[j]))) {
                    id = id * 10 + (t[j] - '0');
                    ++j;
                }
                out += lookup(static_cast<TaskId>(id)).value.render();
                i = j - 1;
            } else {
                out += t[i];
            }
        }
        return Value::make_text(std::move(out));
    }
    case ArgValue::Kind::Number:
        return Value::make_number(arg.number);
    case ArgValue::Kind::List: {
        std::vector<Value> items;
        items.reserve(arg.items.size());
        for (const auto& it : arg.items) items.push_back(substitute_one(it, obs));
        return Value::make_list(std::move(items));
    }
    case ArgValue::Kind::Ref:
        return lookup(arg.ref).value;
    }
    return {};
}

} // namespace

std::vector<Value> substitute(const std::vector<ArgValue>& args,
                              const std::map<TaskId, Observation>& observations) {
    std::vector<Value> out;
    out.reserve(args.size());
    for (const auto& a : args) out.push_back(substitute_one(a, observations));
    return out;
}

FetchState::FetchState(const PlanGraph& graph) {
    for (const auto& t : graph.tasks) {
        tasks_[t.id] = t;
        deps_[t.id] = {};
        dependents_[t.id] = {};
    }
    for (const auto& [from, to] : graph.edges) {
        deps_[to].insert(from);
        dependents_[from].insert(to);
    }
    join_id_ = graph.join_id;
}

const TaskSpec& FetchState::task(TaskId id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) {
        throw Error(ErrorCode::UnknownTask, "task " + std::to_string(id));
    }
    return it->second;
}

bool FetchState::deps_satisfied(TaskId id) const {
    for (TaskId dep : deps_.at(id)) {
        auto it = observations_.find(dep);
        if (it == observations_.end() || !it->second.ok) return false;
    }
    return true;
}

bool FetchState::should_skip(TaskId id) const {
    for (TaskId dep : deps_.at(id)) {
        if (skipped_.count(dep)) return true;
        auto it = observations_.find(dep);
        if (it != observations_.end() && !it->second.ok) return true;
    }
    return false;
}

bool FetchState::join_ready() const {
    if (join_id_ == 0) return false;
    for (const auto& [id, t] : tasks_) {
        if (id == join_id_) continue;
        if (!observations_.count(id) && !skipped_.count(id)) return false;
    }
    return true;
}

bool FetchState::done() const {
    return join_id_ != 0 && observations_.count(join_id_) != 0;
}

std::vector<TaskId> FetchState::collect_ready() {
    std::vector<TaskId> out;
    for (const auto& [id, t] : tasks_) {
        if (dispatched_.count(id) || skipped_.count(id) || observations_.count(id)) continue;
        if (id == join_id_) {
            if (join_ready()) out.push_back(id);
        } else if (should_skip(id)) {
            continue;
        } else if (deps_satisfied(id)) {
            out.push_back(id);
        }
    }
    std::sort(out.begin(), out.end());
    for (TaskId id : out) dispatched_.insert(id);
    return out;
}

std::vector<TaskId> FetchState::add_task(const TaskSpec& task) {
    if (tasks_.count(task.id)) {
        throw Error(ErrorCode::DuplicateId, "task " + std::to_string(task.id));
    }
    tasks_[task.id] = task;
    dependents_[task.id] = {};
    std::set<TaskId> deps;
    if (task.is_join()) {
        join_id_ = task.id;
        // join collects every observation
        for (const auto& [id, t] : tasks_) {
            if (id != task.id) deps.insert(id);
        }
    } else {
        deps = task.deps();
    }
    for (TaskId dep : deps) {
        if (!tasks_.count(dep)) {
            throw Error(ErrorCode::DanglingReference,
                        "$" + std::to_string(dep) + " referenced by task " +
                            std::to_string(task.id));
        }
        dependents_[dep].insert(task.id);
    }
    deps_[task.id] = std::move(deps);

    if (!task.is_join() && should_skip(task.id)) {
        skipped_.insert(task.id);
        return {};
    }
    return collect_ready();
}

std::vector<TaskId> FetchState::initial_dispatch() {
    return collect_ready();
}

FetchState::DoneResult FetchState::on_task_done(const Observation& obs) {
    if (!tasks_.count(obs.task_id)) {
        throw Error(ErrorCode::UnknownTask, "task " + std::to_string(obs.task_id));
    }
    if (observations_.count(obs.task_id)) {
        throw Error(ErrorCode::DuplicateObservation,
                    "task " + std::to_string(obs.task_id));
    }
    if (!dispatched_.count(obs.task_id)) {
        throw Error(ErrorCode::UnknownTask,
                    "task " + std::to_string(obs.task_id) + " was never dispatched");
    }

    observations_[obs.task_id] = obs;

    DoneResult result;
    if (!obs.ok) {
        skip_transitively(obs.task_id, result.newly_skipped);
        std::sort(result.newly_skipped.begin(), result.newly_skipped.end());
    }
    result.newly_ready = collect_ready();
    return result;
}

void FetchState::skip_transitively(TaskId id, std::vector<TaskId>& newly_skipped) {
    std::deque<TaskId> q{id};
    while (!q.empty()) {
        TaskId cur = q.front();
        q.pop_front();
        for (TaskId dep : dependents_[cur]) {
            if (dep == join_id_) continue; // join always runs
            if (skipped_.count(dep) || observations_.count(dep)) continue;
            skipped_.insert(dep);
            newly_skipped.push_back(dep);
            q.push_back(dep);
        }
    }
}

} // namespace dagex
