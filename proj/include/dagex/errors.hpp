#pragma once

#include <stdexcept>
#include <string>

namespace dagex {

enum class ErrorCode {
    // plan construction
    DuplicateId,
    NonMonotonicId,
    ForwardReference,
    DanglingReference,
    MissingJoin,
    MultipleJoin,
    // parsing
    SyntaxError,
    // fetching / execution
    DuplicateObservation,
    UnknownTask,
    MissingObservation,
    DuplicateTool,
    ReservedTool,
    UnknownTool,
    ArgSchemaMismatch,
    ToolTimeout,
    ToolError,
    // backends
    ScriptMiss,
    BackendUnavailable,
    RateLimited,
    ProtocolError,
    // tools
    NotFound,
    ParseError,
    DivisionByZero,
    LengthMismatch,
    TerminalState,
    // latency model
    MissingDuration,
    ZeroDenominator,
    // misc
    ConfigError,
    IoError,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NonMonotonicId: return "NonMonotonicId";
    case ErrorCode::ForwardReference: return "ForwardReference";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::MissingJoin: return "MissingJoin";
    case ErrorCode::MultipleJoin: return "MultipleJoin";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateObservation: return "DuplicateObservation";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::MissingObservation: return "MissingObservation";
    case ErrorCode::DuplicateTool: return "DuplicateTool";
    case ErrorCode::ReservedTool: return "ReservedTool";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::ArgSchemaMismatch: return "ArgSchemaMismatch";
    case ErrorCode::ToolTimeout: return "ToolTimeout";
    case ErrorCode::ToolError: return "ToolError";
    case ErrorCode::ScriptMiss: return "ScriptMiss";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TerminalState: return "TerminalState";
    case ErrorCode::MissingDuration: return "MissingDuration";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Parse error with the offending line attached verbatim.
class SyntaxError : public Error {
public:
    SyntaxError(int line_no, std::string line, const std::string& reason)
        : Error(ErrorCode::SyntaxError,
                "line " + std::to_string(line_no) + ": " + reason + " [" + line + "]"),
          line_no_(line_no),
          line_(std::move(line)) {}

    int line_no() const { return line_no_; }
    const std::string& line() const { return line_; }

private:
    int line_no_;
    std::string line_;
};

} // namespace dagex
