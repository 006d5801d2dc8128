#pragma once

#include <stdexcept>
#include <string>

namespace posture {

// Root of the library's error hierarchy. Everything thrown on purpose
// derives from this; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration values: bad fractions, counts, flags.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data: CSV schema/parse/label problems,
// empty inputs where rows are required.
class DataError : public Error {
public:
    using Error::Error;
};

// Arguments outside an operation's mathematical domain (all-zero count
// vectors, empty vote lists, mismatched vector lengths).
class DomainError : public Error {
public:
    using Error::Error;
};

// Model persistence problems: corrupt files, unknown format versions.
class ModelIoError : public Error {
public:
    using Error::Error;
};

// Failures while fitting models.
class TrainError : public Error {
public:
    using Error::Error;
};

// Invalid inputs at prediction time (non-finite features, arity mismatch).
class PredictError : public Error {
public:
    using Error::Error;
};

}  // namespace posture
