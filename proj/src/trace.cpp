#include "dagex/trace.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dagex/errors.hpp"

namespace dagex {

using nlohmann::json;

void RunTrace::reset() {
    std::lock_guard lock(mutex_);
    start_ = std::chrono::steady_clock::now();
    events_.clear();
}

double RunTrace::now_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
}

void RunTrace::record(std::string event, std::optional<int> task_id,
                      std::optional<std::string> tool, std::optional<bool> ok) {
    record_at(now_ms(), std::move(event), task_id, std::move(tool), ok);
}

void RunTrace::record_at(double t_ms, std::string event, std::optional<int> task_id,
                         std::optional<std::string> tool, std::optional<bool> ok) {
    std::lock_guard lock(mutex_);
    events_.push_back(TraceEvent{t_ms, std::move(event), task_id, std::move(tool), ok});
}

std::vector<TraceEvent> RunTrace::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

void RunTrace::write_jsonl(std::ostream& out) const {
    for (const auto& e : events()) {
        json j;
        j["t_ms"] = e.t_ms;
        j["event"] = e.event;
        j["task_id"] = e.task_id ? json(*e.task_id) : json(nullptr);
        j["tool"] = e.tool ? json(*e.tool) : json(nullptr);
        j["ok"] = e.ok ? json(*e.ok) : json(nullptr);
        out << j.dump() << "\n";
    }
}

void RunTrace::save_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    write_jsonl(out);
}

std::vector<TraceEvent> RunTrace::load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::vector<TraceEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        TraceEvent e;
        e.t_ms = j.at("t_ms").get<double>();
        e.event = j.at("event").get<std::string>();
        if (!j.at("task_id").is_null()) e.task_id = j["task_id"].get<int>();
        if (!j.at("tool").is_null()) e.tool = j["tool"].get<std::string>();
        if (!j.at("ok").is_null()) e.ok = j["ok"].get<bool>();
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace dagex
