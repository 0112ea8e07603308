#pragma once

#include <stdexcept>
#include <string>

namespace stk {

// Error categories shared by every module. Callers that only care about
// "something went wrong" can catch stk::Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed data: non-finite entries, shape mismatch, non-orthonormal basis.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A parameter outside its admissible range (k > s, Ky Fan index too large, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

// An iterative routine failed to converge or bracket.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

// Function evaluated outside its domain, e.g. the resolvent for |z| <= ||E||.
class DomainError : public Error {
public:
    using Error::Error;
};

// Configuration or I/O problems reported by the harness.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace stk
