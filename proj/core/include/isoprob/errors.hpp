#pragma once

#include <stdexcept>
#include <string>

namespace isoprob {

// Invalid configuration or argument values (bad theta range, non-PD covariance, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input files. line() is 1-based; 0 means "not line-specific".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Failures of the estimation pipeline (training breakdown, empty class after
// support-vector filtering, non-finite scores).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace isoprob
