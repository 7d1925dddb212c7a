// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace angvel {

/// Input failed a precondition or schema check. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed text input; carries the 1-based line number of the offending row.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Query outside the support of a trajectory or scenario.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Non-finite intermediate values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A processing stage failed; `stage()` names it for the CLI.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace angvel
