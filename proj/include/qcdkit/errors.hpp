#pragma once

#include <stdexcept>
#include <string>

namespace qcd {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A distribution parameter violates its invariants (non-positive variance,
/// weights that do not sum to one, ...).
class InvalidDistribution : public Error {
public:
    using Error::Error;
};

/// Fitting input carries no usable spread (all points identical).
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// Fewer data points than the fit requires.
class TooFewPoints : public Error {
public:
    using Error::Error;
};

/// A detector step was requested on a state that already alarmed.
class SteppedAfterAlarm : public Error {
public:
    using Error::Error;
};

/// A sliding window has zero spread, so a z-score is undefined.
class ZeroSpread : public Error {
public:
    using Error::Error;
};

/// Too many trials ran out of horizon before alarming.
class HorizonTooShort : public Error {
public:
    using Error::Error;
};

/// Threshold calibration cannot reach the requested target.
class CalibrationUnreachable : public Error {
public:
    using Error::Error;
};

/// A file row could not be parsed; the message names the row.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A file header is missing a required column; the message names it.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A parsed number is NaN or infinite.
class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// A configuration object is incomplete or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace qcd
