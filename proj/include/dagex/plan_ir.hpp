#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dagex/errors.hpp"

namespace dagex {

// Task ids are positive and strictly increasing in emission order.
using TaskId = int;

inline constexpr const char* kJoinToolName = "join";

// One argument in a task line. Text templates may embed $N placeholders;
// Ref is a bare $N that forwards the referenced observation as-is.
struct ArgValue {
    enum class Kind { Text, Number, List, Ref };

    Kind kind = Kind::Text;
    std::string text;                  // Text: template
    std::vector<TaskId> placeholders;  // Text: every $N embedded in the template
    double number = 0.0;               // Number
    std::vector<ArgValue> items;       // List
    TaskId ref = 0;                    // Ref

    static ArgValue make_text(std::string tmpl);
    static ArgValue make_number(double n);
    static ArgValue make_list(std::vector<ArgValue> vs);
    static ArgValue make_ref(TaskId id);

    void collect_refs(std::set<TaskId>& out) const;

    // Canonical plan-DSL source form (quoted/escaped string, $N, [...]).
    std::string render_source() const;

    bool operator==(const ArgValue& o) const;
};

// Every "$N" (longest digit run) occurring in a text template, in order
// of appearance, duplicates preserved.
std::vector<TaskId> extract_placeholders(const std::string& tmpl);

struct TaskSpec {
    TaskId id = 0;
    std::string tool;
    std::vector<ArgValue> args;
    std::optional<std::string> thought;

    bool is_join() const { return tool == kJoinToolName; }
    std::set<TaskId> deps() const;

    // Canonical "$N = tool(arg, ...)" line (no trailing newline).
    std::string render() const;

    bool operator==(const TaskSpec& o) const;
};

// Validated DAG of tasks. Edges run producer -> consumer; the join task
// implicitly depends on every other task.
struct PlanGraph {
    std::vector<TaskSpec> tasks;
    std::set<std::pair<TaskId, TaskId>> edges;
    TaskId join_id = 0;

    const TaskSpec* find(TaskId id) const;
    bool contains(TaskId id) const { return find(id) != nullptr; }
    std::vector<TaskId> deps_of(TaskId id) const;
    std::vector<TaskId> dependents_of(TaskId id) const;
};

// Validates ids, references, and join placement; derives edges from
// placeholders plus the implicit all-tasks -> join edges. Independently
// re-checks acyclicity with a topological sort.
PlanGraph build_graph(const std::vector<TaskSpec>& tasks);

// All ids whose every dependency is completed and which are not yet
// completed themselves, ascending.
std::vector<TaskId> ready_set(const PlanGraph& graph, const std::set<TaskId>& completed);

} // namespace dagex
