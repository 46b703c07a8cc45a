#pragma once

#include <chrono>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace dagex {

struct TraceEvent {
    double t_ms = 0.0;
    std::string event; // dispatch | complete | plan_token | join | replan
    std::optional<int> task_id;
    std::optional<std::string> tool;
    std::optional<bool> ok;
};

// Timestamped event log of one run. Thread-safe recording; timestamps
// are monotonic milliseconds from construction (or reset()).
class RunTrace {
public:
    RunTrace() : start_(std::chrono::steady_clock::now()) {}

    void reset();
    double now_ms() const;

    void record(std::string event,
                std::optional<int> task_id = std::nullopt,
                std::optional<std::string> tool = std::nullopt,
                std::optional<bool> ok = std::nullopt);
    // For the simulator: append an event with an explicit timestamp.
    void record_at(double t_ms, std::string event,
                   std::optional<int> task_id = std::nullopt,
                   std::optional<std::string> tool = std::nullopt,
                   std::optional<bool> ok = std::nullopt);

    std::vector<TraceEvent> events() const;

    void write_jsonl(std::ostream& out) const;
    void save_jsonl(const std::string& path) const;
    static std::vector<TraceEvent> load_jsonl(const std::string& path);

private:
    std::chrono::steady_clock::time_point start_;
    mutable std::mutex mutex_;
    std::vector<TraceEvent> events_;
};

} // namespace dagex
