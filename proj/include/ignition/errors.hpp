#pragma once

#include <stdexcept>
#include <string>

namespace ignition {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A model failed one of the standing hypotheses.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Traveling-wave shooting did not bracket a speed.
class SolverError : public Error {
public:
    using Error::Error;
};

/// The moving window is too small for the front being evolved.
class WindowError : public Error {
public:
    using Error::Error;
};

/// A level set requested by the front tracker does not exist.
class NoCrossingError : public Error {
public:
    using Error::Error;
};

/// The interface is too flat for the speed formula.
class DegenerateInterfaceError : public Error {
public:
    using Error::Error;
};

/// A trace ended before the hitting-time construction closed a segment.
class IncompleteTraceError : public Error {
public:
    IncompleteTraceError(const std::string& what, double last_covered_time)
        : Error(what), last_covered_time_(last_covered_time) {}
    double last_covered_time() const noexcept { return last_covered_time_; }

private:
    double last_covered_time_;
};

/// Initial data cannot be sandwiched between shifted references.
class SandwichError : public Error {
public:
    SandwichError(const std::string& what, double worst_offset)
        : Error(what), worst_offset_(worst_offset) {}
    double worst_offset() const noexcept { return worst_offset_; }

private:
    double worst_offset_;
};

/// Bad argument to a numerical routine (precondition violation).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The squeezing constants cannot be derived from the reference front.
class DerivationError : public Error {
public:
    using Error::Error;
};

/// A shift search found no admissible value inside its scan range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while persisting results.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ignition
