#pragma once

// Shared test utilities: random plan generation, an independent
// longest-path oracle, and a shunting-yard arithmetic oracle.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dagex/plan_ir.hpp"
#include "dagex/rational.hpp"

namespace testutil {

// A random valid plan: `n` work tasks with random backward references
// plus a join. Tools are drawn from `tools`; each task takes one text
// argument that embeds its dependencies as $N placeholders.
inline std::string random_plan(std::mt19937& rng, int max_tasks,
                               const std::vector<std::string>& tools) {
    std::uniform_int_distribution<int> n_dist(1, max_tasks);
    int n = n_dist(rng);
    std::ostringstream out;
    for (int i = 1; i <= n; ++i) {
        std::set<int> deps;
        if (i > 1) {
            std::uniform_int_distribution<int> k_dist(0, std::min(3, i - 1));
            int k = k_dist(rng);
            std::uniform_int_distribution<int> dep_dist(1, i - 1);
            while (static_cast<int>(deps.size()) < k) deps.insert(dep_dist(rng));
        }
        std::uniform_int_distribution<size_t> tool_dist(0, tools.size() - 1);
        out << "$" << i << " = " << tools[tool_dist(rng)] << "(\"task " << i;
        for (int d : deps) out << " $" << d;
        out << "\")\n";
    }
    out << "$" << n + 1 << " = join()\n";
    return out.str();
}

// Brute-force longest path (in tasks) through the dependency DAG,
// ignoring the join. Equals the number of parallel unit-duration rounds
// an ideal scheduler needs.
inline int critical_path_length(const dagex::PlanGraph& graph) {
    std::map<dagex::TaskId, int> depth;
    int longest = 0;
    for (const auto& task : graph.tasks) { // ids ascend, deps precede
        if (task.is_join()) continue;
        int d = 1;
        for (dagex::TaskId dep : graph.deps_of(task.id)) {
            d = std::max(d, depth[dep] + 1);
        }
        depth[task.id] = d;
        longest = std::max(longest, d);
    }
    return longest;
}

// Splits `text` into random chunks; every partition is equally likely
// to cut at any position.
inline std::vector<std::string> random_chunks(std::mt19937& rng,
                                              const std::string& text) {
    std::vector<std::string> chunks;
    size_t pos = 0;
    while (pos < text.size()) {
        std::uniform_int_distribution<size_t> len_dist(1, text.size() - pos);
        size_t len = len_dist(rng);
        chunks.push_back(text.substr(pos, len));
        pos += len;
    }
    return chunks;
}

// Independent arithmetic oracle: shunting-yard over exact rationals.
// Supports + - * / and parentheses; no unary minus (oracle inputs are
// kept positive).
inline dagex::Rational shunting_yard(const std::string& expr) {
    using dagex::Rational;
    auto precedence = [](char op) { return (op == '+' || op == '-') ? 1 : 2; };
    std::vector<Rational> values;
    std::vector<char> ops;

    auto apply = [&] {
        char op = ops.back();
        ops.pop_back();
        Rational b = values.back();
        values.pop_back();
        Rational a = values.back();
        values.pop_back();
        switch (op) {
            case '+': values.push_back(a + b); break;
            case '-': values.push_back(a - b); break;
            case '*': values.push_back(a * b); break;
            default: values.push_back(a / b); break;
        }
    };

    size_t i = 0;
    while (i < expr.size()) {
        char c = expr[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t j = i;
            while (j < expr.size() &&
                   (std::isdigit(static_cast<unsigned char>(expr[j])) ||
                    expr[j] == '.')) {
                ++j;
            }
            values.push_back(Rational::parse(expr.substr(i, j - i)));
            i = j;
        } else if (c == '(') {
            ops.push_back(c);
            ++i;
        } else if (c == ')') {
            while (!ops.empty() && ops.back() != '(') apply();
            ops.pop_back();
            ++i;
        } else {
            while (!ops.empty() && ops.back() != '(' &&
                   precedence(ops.back()) >= precedence(c)) {
                apply();
            }
            ops.push_back(c);
            ++i;
        }
    }
    while (!ops.empty()) apply();
    return values.back();
}

inline std::string data_path(const std::string& rel) {
    return std::string(DAGEX_DATA_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace testutil
