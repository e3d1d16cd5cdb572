#pragma once

#include <stdexcept>
#include <string>

namespace ellipvol {

// Base class for every error the library raises on purpose. Callers that
// want a single catch site can catch this; the CLI maps subtypes to exit
// codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A Gram matrix (or a perpendicular length) fell below the rank threshold.
// Under the sampling model this event has probability zero, so it signals
// a degenerate input or a bug rather than bad luck.
class RankDeficientError : public Error {
public:
    using Error::Error;
};

// The inner i-by-i system of a projection was numerically singular.
class SingularInnerError : public Error {
public:
    using Error::Error;
};

class NotSymmetricError : public Error {
public:
    using Error::Error;
};

class NotPositiveError : public Error {
public:
    using Error::Error;
};

// sigma_n^2 <= 0: the asymptotic variance formula broke down (p too small).
class NonPositiveVarianceError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class TooFewSamplesError : public Error {
public:
    using Error::Error;
};

// |det M| below threshold in a linear-image volume.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Two evaluation routes that must agree did not, or an iteration failed to
// converge. Always a bug, never a model event.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace ellipvol
