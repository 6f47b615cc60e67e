#pragma once

#include <stdexcept>
#include <string>

namespace semicap {

// Base for all library errors. Precondition violations on plain arguments
// (bad indices, wrong dimensions) use the more specific types below.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// The requested enumeration would exceed the configured size guard.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

// A constraint set, LP, or measure family has no feasible point.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Raised by report builders when a checked inequality fails beyond tolerance.
class InequalityViolation : public Error {
public:
    using Error::Error;
};

} // namespace semicap
