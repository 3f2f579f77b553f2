#pragma once

#include <stdexcept>
#include <string>

namespace fsir {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the operation's contract (k out of range, S > n, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input data is malformed or violates a model requirement.
class DataError : public Error {
public:
    using Error::Error;
};

/// Vector detectably outside the range of a Gram/covariance matrix.
class MembershipError : public DataError {
public:
    using DataError::DataError;
};

/// A slice received no observations, so p_s = 0.
class EmptySliceError : public DataError {
public:
    using DataError::DataError;
};

/// Kernel evaluated outside its domain (tabulated kernels off-grid, negative times).
class DomainError : public DataError {
public:
    using DataError::DataError;
};

/// Eigensolver failure, indefinite Gram matrices, vanishing denominators.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace fsir
