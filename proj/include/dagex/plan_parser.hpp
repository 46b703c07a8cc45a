#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dagex/plan_ir.hpp"

namespace dagex {

// Incremental line parser for the plan DSL. Feed arbitrary chunks; each
// completed task line is emitted as soon as its newline arrives. A plan
// ends at the join line; task lines after it are rejected, blank lines
// and "###" separators are ignored.
class StreamParser {
public:
    // Returns the tasks completed by this chunk, in emission order.
    std::vector<TaskSpec> feed(std::string_view chunk);

    // Flushes a trailing unterminated line; throws SyntaxError if no
    // join was seen.
    std::vector<TaskSpec> finish();

    bool finished() const { return finished_; }
    int emitted() const { return emitted_; }

private:
    std::optional<TaskSpec> consume_line(const std::string& line);

    std::string buffer_;
    std::optional<std::string> pending_thought_;
    int line_no_ = 0;
    int emitted_ = 0;
    TaskId last_id_ = 0;
    bool finished_ = false;
};

// Batch parse: equivalent to feeding the whole text through a
// StreamParser and collecting emissions.
std::vector<TaskSpec> parse_plan(const std::string& text);

} // namespace dagex
