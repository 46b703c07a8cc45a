#include "dagex/plan_ir.hpp"

#include <algorithm>
#include <deque>

#include "dagex/value.hpp"

namespace dagex {

std::string Value::render() const {
    switch (kind) {
    case Kind::Text:
        return text;
    case Kind::Number:
        return shortest_double(number);
    case Kind::List: {
        std::string out = "[";
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) out += ", ";
            out += items[i].render();
        }
        out += "]";
        return out;
    }
    }
    return {};
}

bool Value::operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::Text: return text == o.text;
    case Kind::Number: return number == o.number;
    case Kind::List: return items == o.items;
    }
    return false;
}

ArgValue ArgValue::make_text(std::string tmpl) {
    ArgValue a;
    a.kind = Kind::Text;
    a.placeholders = extract_placeholders(tmpl);
    a.text = std::move(tmpl);
    return a;
}

ArgValue ArgValue::make_number(double n) {
    ArgValue a;
    a.kind = Kind::Number;
    a.number = n;
    return a;
}

ArgValue ArgValue::make_list(std::vector<ArgValue> vs) {
    ArgValue a;
    a.kind = Kind::List;
    a.items = std::move(vs);
    return a;
}

ArgValue ArgValue::make_ref(TaskId id) {
    ArgValue a;
    a.kind = Kind::Ref;
    a.ref = id;
    return a;
}

void ArgValue::collect_refs(std::set<TaskId>& out) const {
    switch (kind) {
    case Kind::Text:
        out.insert(placeholders.begin(), placeholders.end());
        break;
    case Kind::Number:
        break;
    case Kind::List:
        for (const auto& it : items) it.collect_refs(out);
        break;
    case Kind::Ref:
        out.insert(ref);
        break;
    }
}

std::string ArgValue::render_source() const {
    switch (kind) {
    case Kind::Text: {
        std::string out = "\"";
        for (char c : text) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return out;
    }
    case Kind::Number:
        return shortest_double(number);
    case Kind::List: {
        std::string out = "[";
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) out += ", ";
            out += items[i].render_source();
        }
        out += "]";
        return out;
    }
    case Kind::Ref:
        return "$" + std::to_string(ref);
    }
    return {};
}

bool ArgValue::operator==(const ArgValue& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::Text: return text == o.text;
    case Kind::Number: return number == o.number;
    case Kind::List: return items == o.items;
    case Kind::Ref: return ref == o.ref;
    }
    return false;
}

std::vector<TaskId> extract_placeholders(const std::string& tmpl) {
    std::vector<TaskId> out;
    for (size_t i = 0; i + 1 < tmpl.size(); ++i) {
        if (tmpl[i] != '$' || !isdigit(static_cast<unsigned char>(tmpl[i + 1]))) continue;
        size_t j = i + 1;
        long id = 0;
        while (j < tmpl.size() && isdigit(static_cast<unsigned char>(tmpl[j]))) {
            id = id * 10 + (tmpl[j] - '0');
            ++j;
        }
        out.push_back(static_cast<TaskId>(id));
        i = j - 1;
    }
    return out;
}

std::set<TaskId> TaskSpec::deps() const {
    std::set<TaskId> out;
    for (const auto& a : args) a.collect_refs(out);
    return out;
}

std::string TaskSpec::render() const {
    std::string out = "$" + std::to_string(id) + " = " + tool + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i].render_source();
    }
    out += ")";
    return out;
}

bool TaskSpec::operator==(const TaskSpec& o) const {
    return id == o.id && tool == o.tool && args == o.args && thought == o.thought;
}

const TaskSpec* PlanGraph::find(TaskId id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

std::vector<TaskId> PlanGraph::deps_of(TaskId id) const {
    std::vector<TaskId> out;
    for (const auto& [from, to] : edges) {
        if (to == id) out.push_back(from);
    }
    return out;
}

std::vector<TaskId> PlanGraph::dependents_of(TaskId id) const {
    std::vector<TaskId> out;
    for (const auto& [from, to] : edges) {
        if (from == id) out.push_back(to);
    }
    return out;
}

PlanGraph build_graph(const std::vector<TaskSpec>& tasks) {
    if (tasks.empty()) {
        throw Error(ErrorCode::MissingJoin, "empty plan");
    }

    PlanGraph g;
    g.tasks = tasks;

    std::set<TaskId> ids;
    TaskId prev = 0;
    TaskId join_id = 0;
    for (const auto& t : tasks) {
        if (t.id < 1) {
            throw Error(ErrorCode::NonMonotonicId, "task id must be >= 1");
        }
        if (ids.count(t.id)) {
            throw Error(ErrorCode::DuplicateId, "task id " + std::to_string(t.id));
        }
        if (t.id <= prev) {
            throw Error(ErrorCode::NonMonotonicId,
                        "task id " + std::to_string(t.id) + " after " + std::to_string(prev));
        }
        if (join_id != 0) {
            throw Error(ErrorCode::MultipleJoin, "task after join");
        }
        ids.insert(t.id);
        prev = t.id;
        if (t.is_join()) join_id = t.id;
    }
    if (join_id == 0) {
        throw Error(ErrorCode::MissingJoin, "plan has no join task");
    }
    g.join_id = join_id;

    for (const auto& t : tasks) {
        for (TaskId dep : t.deps()) {
            if (dep >= t.id) {
                throw Error(ErrorCode::ForwardReference,
                            "$" + std::to_string(dep) + " referenced by task " +
                                std::to_string(t.id));
            }
            if (!ids.count(dep)) {
                throw Error(ErrorCode::DanglingReference,
                            "$" + std::to_string(dep) + " referenced by task " +
                                std::to_string(t.id));
            }
            g.edges.emplace(dep, t.id);
        }
        if (!t.is_join()) {
            // join collects every observation
            g.edges.emplace(t.id, join_id);
        }
    }

    // Independent acyclicity check via Kahn's algorithm.
    std::map<TaskId, int> indegree;
    for (const auto& t : tasks) indegree[t.id] = 0;
    for (const auto& [from, to] : g.edges) indegree[to]++;
    std::deque<TaskId> q;
    for (const auto& [id, d] : indegree) {
        if (d == 0) q.push_back(id);
    }
    size_t visited = 0;
    while (!q.empty()) {
        TaskId id = q.front();
        q.pop_front();
        ++visited;
        for (TaskId dep : g.dependents_of(id)) {
            if (--indegree[dep] == 0) q.push_back(dep);
        }
    }
    if (visited != tasks.size()) {
        throw Error(ErrorCode::ForwardReference, "cycle detected");
    }

    return g;
}

std::vector<TaskId> ready_set(const PlanGraph& graph, const std::set<TaskId>& completed) {
    std::vector<TaskId> out;
    for (const auto& t : graph.tasks) {
        if (completed.count(t.id)) continue;
        bool ready = true;
        for (TaskId dep : graph.deps_of(t.id)) {
            if (!completed.count(dep)) {
                ready = false;
                break;
            }
        }
        if (ready) out.push_back(t.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace dagex
