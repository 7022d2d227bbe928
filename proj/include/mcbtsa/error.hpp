#pragma once

#include <stdexcept>
#include <string>

namespace mcbtsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data or configuration violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An aggregation does not partition the horizon it is applied to.
class InvalidAggregationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A clustering target cannot be met, e.g. fewer groups than protected gaps allow.
class InfeasibleTargetError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Optimality gap requested with a zero upper bound.
class UndefinedGapError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Fixed capacities exceed the investment budget.
class BudgetViolatedError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class IterationLimitError : public SolverError {
public:
    using SolverError::SolverError;
};

class NumericalFailureError : public SolverError {
public:
    using SolverError::SolverError;
};

/// An LP finished infeasible or unbounded where an optimum was required.
class NotOptimalError : public SolverError {
public:
    using SolverError::SolverError;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mcbtsa
