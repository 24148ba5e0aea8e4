#pragma once

#include <stdexcept>
#include <string>

namespace dephasing {

/// Raised on precondition violations (negative rates, out-of-range
/// dimensions, infeasible energies, ...).
class invalid_argument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Probe coefficients that do not sum to one. Never silently rescaled.
class normalization_error : public invalid_argument {
public:
    normalization_error(const std::string& what, double deviation)
        : invalid_argument(what), deviation_(deviation) {}

    double deviation() const noexcept { return deviation_; }

private:
    double deviation_;
};

/// A numerical procedure failed to reach its tolerance.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Closed-form expression is singular at this parameter point; callers are
/// expected to switch to a numeric route.
class degenerate_case : public numeric_error {
public:
    using numeric_error::numeric_error;
};

} // namespace dephasing
