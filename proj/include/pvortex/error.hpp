#pragma once

#include <stdexcept>
#include <string>

namespace pvortex {

// Every failure raised by the library derives from Error. The C API maps each
// subclass onto one pv_status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A state that is not valid for its domain: coincident vortices, or a vortex
// on/below the wall of the half-plane.
class DomainViolation : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition (wrong N, zero strength, bad bracket).
class UsageError : public Error {
public:
    using Error::Error;
};

// Finite-difference step too large for the configuration being probed.
class OracleInvalid : public Error {
public:
    using Error::Error;
};

// A computation ran but could not produce a trustworthy answer
// (search failed, too few samples, unresolved regime).
class DiagnosticError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Structured config/manifest rejected; the message names the field path.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace pvortex
