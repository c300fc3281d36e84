#pragma once

#include <stdexcept>
#include <string>

namespace stefan_relax {

/// Invalid argument to a constructor or factory (bad mesh extents, sizes that do not match).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the domain of a graph.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A graph or operator does not have the structure an algorithm relies on,
/// e.g. a resolvent that finds no solution because the graph has a gap.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_change)
        : std::runtime_error(what), last_change_(last_change) {}
    double last_change() const noexcept { return last_change_; }

private:
    double last_change_;
};

/// A post-condition or invariant assertion failed in strict verification mode.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration text could not be accepted.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& key, int line, const std::string& message)
        : std::runtime_error(format(key, line, message)), key_(key), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& message) {
        std::string out = "config";
        if (line > 0) out += " line " + std::to_string(line);
        if (!key.empty()) out += " key '" + key + "'";
        return out + ": " + message;
    }
    std::string key_;
    int line_;
};

}  // namespace stefan_relax
