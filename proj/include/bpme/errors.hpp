#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bpme {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed chains, distributions, model files, configs.
struct ValidationError : Error {
    using Error::Error;
};

/// A transition-matrix row does not sum to 1 (or has an out-of-range entry).
struct NotStochasticError : ValidationError {
    int row;
    NotStochasticError(int r, const std::string& msg) : ValidationError(msg), row(r) {}
};

/// The digraph of positive transition probabilities is not strongly connected.
struct NotIrreducibleError : ValidationError {
    std::vector<int> offending_states;  // states cut off from state 0
    NotIrreducibleError(std::vector<int> s, const std::string& msg)
        : ValidationError(msg), offending_states(std::move(s)) {}
};

/// Offspring weights empty, all zero, or negative.
struct EmptyOrNegativeError : ValidationError {
    using ValidationError::ValidationError;
};

struct DimensionMismatchError : ValidationError {
    using ValidationError::ValidationError;
};

/// A trajectory was requested from an inadmissible initial total state.
struct InvalidInitError : ValidationError {
    using ValidationError::ValidationError;
};

/// An operation was applied to a trajectory of the wrong mode.
struct WrongModeError : ValidationError {
    using ValidationError::ValidationError;
};

/// A matrix violates the substochastic contract (entries in [0,1], row sums <= 1).
struct NotSubstochasticError : ValidationError {
    int row;
    NotSubstochasticError(int r, const std::string& msg) : ValidationError(msg), row(r) {}
};

/// Numeric failures discovered while computing, as opposed to bad inputs.
struct NumericError : Error {
    using Error::Error;
};

/// A fixed-point or eigen iteration did not reach its tolerance.
struct NotConvergedError : NumericError {
    using NumericError::NumericError;
};

/// A linear solve failed where theory guarantees a unique solution.
struct SingularBeyondExpectedError : NumericError {
    using NumericError::NumericError;
};

/// sigma^2_M <= 0: the population CLT does not apply.
struct DegenerateVarianceError : NumericError {
    using NumericError::NumericError;
};

/// Power iteration is directionless on a reducible nonnegative matrix.
struct ReducibleError : NumericError {
    using NumericError::NumericError;
};

struct ZeroMatrixError : NumericError {
    using NumericError::NumericError;
};

}  // namespace bpme
