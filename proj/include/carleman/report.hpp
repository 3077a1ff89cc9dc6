#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace carleman {

/// Outcome of a finite-range condition check (M.2, M.2*, doubling, inclusion, ...).
/// `constants` carries the named constants of the defining inequality; when
/// `holds` is true they satisfy it on the entire checked range.
struct ConditionReport {
    std::string condition;
    bool holds = false;
    std::map<std::string, double> constants;
    long checked_range = 0;
    std::optional<std::pair<long, long>> first_violation;
    double max_slack = 0.0;  // worst (signed) violation of the inequality; <= 0 when holds
    std::vector<std::string> notes;

    std::string to_json() const;
};

/// Thrown when an operation's stated precondition is not met.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation would exceed the floating-point exponent budget.
struct NumericGuardError : std::runtime_error {
    double suggested_h = 0.0;
    explicit NumericGuardError(const std::string& what, double suggested = 0.0)
        : std::runtime_error(what), suggested_h(suggested) {}
};

/// n log-spaced points in [lo, hi], lo > 0.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace carleman
