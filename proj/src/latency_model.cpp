#include "dagex/latency_model.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace dagex {

using nlohmann::json;

void WorkloadProfile::validate() const {
    if (exec.empty() || plan_react.size() != exec.size() ||
        plan_compiler.size() != exec.size()) {
        throw Error(ErrorCode::ConfigError, "profile lists must share one length N >= 1");
    }
    for (const auto* list : {&plan_react, &plan_compiler, &exec}) {
        for (double v : *list) {
            if (v < 0) throw Error(ErrorCode::ConfigError, "durations must be >= 0");
        }
    }
}

WorkloadProfile WorkloadProfile::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    json j;
    in >> j;
    WorkloadProfile w;
    w.plan_react = j.at("plan_react").get<std::vector<double>>();
    w.plan_compiler = j.at("plan_compiler").get<std::vector<double>>();
    w.exec = j.at("exec").get<std::vector<double>>();
    if (j.contains("n") && j["n"].get<size_t>() != w.exec.size()) {
        throw Error(ErrorCode::ConfigError, "'n' disagrees with list lengths");
    }
    w.validate();
    return w;
}

double react_latency(const WorkloadProfile& w) {
    w.validate();
    double total = 0.0;
    for (size_t i = 0; i < w.n(); ++i) total += w.plan_react[i] + w.exec[i];
    return total;
}

double compiler_latency(const WorkloadProfile& w) {
    w.validate();
    double total = 0.0;
    for (double p : w.plan_compiler) total += p;
    return total + *std::max_element(w.exec.begin(), w.exec.end());
}

double streamed_latency(const WorkloadProfile& w) {
    w.validate();
    double total = 0.0;
    for (double p : w.plan_compiler) total += p;
    return total + w.exec.back();
}

SpeedupReport speedup(const WorkloadProfile& w) {
    SpeedupReport r;
    r.t_react = react_latency(w);
    r.t_compiler = compiler_latency(w);
    r.t_streamed = streamed_latency(w);
    if (r.t_compiler <= 0.0) {
        throw Error(ErrorCode::ZeroDenominator, "compiler latency is zero");
    }
    r.gamma = r.t_react / r.t_compiler;
    r.gamma_max = static_cast<double>(w.n());
    double plan_r = 0.0, plan_c = 0.0;
    for (double p : w.plan_react) plan_r += p;
    for (double p : w.plan_compiler) plan_c += p;
    if (plan_c <= 0.0) {
        throw Error(ErrorCode::ZeroDenominator, "compiler planning time is zero");
    }
    r.gamma_min = plan_r / plan_c;
    return r;
}

std::string speedup_report_json(const SpeedupReport& r) {
    json j;
    j["t_react"] = r.t_react;
    j["t_compiler"] = r.t_compiler;
    j["t_streamed"] = r.t_streamed;
    j["gamma"] = r.gamma;
    j["gamma_max"] = r.gamma_max;
    j["gamma_min"] = r.gamma_min;
    return j.dump();
}

SimResult simulate_trace(const PlanGraph& graph,
                         const std::map<TaskId, double>& tool_durations,
                         const std::vector<double>& emission_times, bool streaming,
                         int cap) {
    std::vector<TaskId> work_ids;
    for (const auto& t : graph.tasks) {
        if (!t.is_join()) work_ids.push_back(t.id);
    }
    if (emission_times.size() != work_ids.size()) {
        throw Error(ErrorCode::ConfigError, "one emission time per non-join task");
    }

    std::map<TaskId, double> emission;
    double last_emission = 0.0;
    for (size_t i = 0; i < work_ids.size(); ++i) {
        emission[work_ids[i]] = emission_times[i];
        last_emission = std::max(last_emission, emission_times[i]);
    }

    std::map<TaskId, double> duration;
    for (TaskId id : work_ids) {
        auto it = tool_durations.find(id);
        if (it == tool_durations.end()) {
            throw Error(ErrorCode::MissingDuration, "task " + std::to_string(id));
        }
        duration[id] = it->second;
    }

    SimResult result;
    std::map<TaskId, double> completion;
    std::set<TaskId> started;
    // (completion time, id) of running tasks
    std::set<std::pair<double, TaskId>> running;

    double t = last_emission;
    if (streaming && !emission_times.empty()) {
        t = *std::min_element(emission_times.begin(), emission_times.end());
    }

    while (completion.size() < work_ids.size()) {
        // finish everything due at or before t
        while (!running.empty() && running.begin()->first <= t) {
            auto [done_t, id] = *running.begin();
            running.erase(running.begin());
            completion[id] = done_t;
            result.events.push_back(
                TraceEvent{done_t * 1000.0, "complete", id,
                           graph.find(id)->tool, true});
        }

        // dispatch eligible tasks in id order while slots are free
        bool dispatched_any = true;
        while (dispatched_any) {
            dispatched_any = false;
            if (cap != 0 && static_cast<int>(running.size()) >= cap) break;
            for (TaskId id : work_ids) {
                if (started.count(id)) continue;
                double eligible = streaming ? emission[id] : last_emission;
                if (eligible > t) continue;
                bool deps_done = true;
                for (TaskId dep : graph.deps_of(id)) {
                    if (!completion.count(dep) || completion[dep] > t) {
                        deps_done = false;
                        break;
                    }
                }
                if (!deps_done) continue;
                started.insert(id);
                running.emplace(t + duration[id], id);
                result.events.push_back(
                    TraceEvent{t * 1000.0, "dispatch", id, graph.find(id)->tool,
                               std::nullopt});
                dispatched_any = true;
                break;
            }
        }

        if (completion.size() == work_ids.size()) break;

        // advance to the next completion or emission
        double next = std::numeric_limits<double>::infinity();
        if (!running.empty()) next = running.begin()->first;
        if (streaming) {
            for (TaskId id : work_ids) {
                if (!started.count(id) && emission[id] > t) {
                    next = std::min(next, emission[id]);
                }
            }
        }
        if (!std::isfinite(next)) {
            throw Error(ErrorCode::ConfigError, "simulation stalled (bad graph?)");
        }
        t = next;
    }

    double makespan = last_emission;
    for (const auto& [id, done] : completion) makespan = std::max(makespan, done);
    result.makespan = makespan;
    result.events.push_back(TraceEvent{makespan * 1000.0, "join", graph.join_id,
                                       std::string(kJoinToolName), true});
    return result;
}

} // namespace dagex
