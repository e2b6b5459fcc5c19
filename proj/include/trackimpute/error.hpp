#pragma once

#include <stdexcept>
#include <string>

namespace trackimpute {

/// Malformed input file contents.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Inputs that parse but violate a model or configuration constraint.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A draw whose stored latents do not reproduce its positions, or a broken chain.
class InconsistentDrawError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failures that arise while simulating (e.g. rejection sampling that cannot succeed).
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trackimpute
