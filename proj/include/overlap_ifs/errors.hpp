#pragma once

#include <stdexcept>
#include <string>

namespace overlap_ifs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A domain type was constructed with values that break its invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// A word uses a symbol outside the system's alphabet.
class AlphabetError : public Error {
public:
    using Error::Error;
};

/// An enumeration would exceed its configured work budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// A numeric argument is outside the mathematical domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The operation does not support the given system (e.g. wrong alphabet size).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A lift step was requested on an exhausted symbol window.
class ExhaustedError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or system definition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Too many Monte Carlo samples had a zero certified chain count.
class FlaggedSampleError : public Error {
public:
    using Error::Error;
};

}  // namespace overlap_ifs
