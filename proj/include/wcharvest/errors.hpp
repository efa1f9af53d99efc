#pragma once

#include <stdexcept>
#include <string>

namespace wcharvest {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed user input (model specs, table files, CLI values).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method (quadrature, root finder, Newton system, barrier
/// solver) did not reach its tolerance within budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton system whose Jacobian stayed numerically singular.
class SingularJacobianError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// Root finder could not find a sign change after bracket expansion.
class NoSignChangeError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// A divergence is +infinity because one density does not dominate the other.
class InfiniteDivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wcharvest
