#pragma once

#include <stdexcept>
#include <string>

namespace brjuno {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Division by an interval containing zero.
struct DivisionByZeroInterval : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// A digit does not index any branch of the map.
struct InvalidDigit : Error {
    using Error::Error;
};

/// Fixed-point validation could not certify self-inclusion.
struct NoContraction : Error {
    using Error::Error;
};

/// An interval argument meets more than one branch; the caller must split it.
struct BranchStraddle : Error {
    using Error::Error;
};

/// delta_G(N) enclosure does not certify positivity.
struct NonPositiveDelta : Error {
    using Error::Error;
};

/// A digit stream ran out of digits before an operation finished.
struct InsufficientDigits : Error {
    using Error::Error;
};

/// Two-sided enclosure requested without a digit bound.
struct UpperBoundUnavailable : Error {
    using Error::Error;
};

/// A search or certification exceeded its configured budget.
struct SearchBudgetExceeded : Error {
    using Error::Error;
};

/// The target value cannot be certified above the infimum by the required gap.
struct InfimumViolated : Error {
    using Error::Error;
};

/// The approximation oracle emitted a decreasing value.
struct OracleNotMonotone : Error {
    using Error::Error;
};

/// A head term grew beyond the configured overflow budget.
struct DivergentHead : Error {
    using Error::Error;
};

/// Input text could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace brjuno
