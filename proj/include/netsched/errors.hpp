#pragma once

#include <stdexcept>
#include <string>

namespace netsched {

// Base type for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Telemetry or dataset values that break an invariant (negative rate,
// missing peer, non-finite sample, infeasible placement).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed or unreadable files: bad JSON/CSV, unknown format versions.
class ParseError : public Error {
public:
    using Error::Error;
};

// Feature-schema incompatibilities between datasets, models and builders.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Endpoint failures while fetching telemetry over HTTP.
class NetworkError : public Error {
public:
    using Error::Error;
};

} // namespace netsched
