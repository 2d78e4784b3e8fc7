#pragma once

#include <stdexcept>
#include <string>

namespace hhimerge {

// Input outside the mathematical domain of a formula (share at a pole,
// non-positive price, infeasible bound set, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed or inconsistent input (unknown firm, mismatched lengths,
// shares that do not add up).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A scalar solve that did not reach tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace hhimerge
