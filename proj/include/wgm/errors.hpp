// errors.hpp: exception types shared by the wgm library

#pragma once

#include <stdexcept>
#include <string>

namespace wgm {

// Base for every failure raised by the library. Numerical failures that a
// sweep should record rather than propagate are all derived from this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

// |eps1| and |eps2| differ, so the closed-form exceptional angles do not apply.
class AmplitudeMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateDrive : public Error {
public:
    using Error::Error;
};

class VanishingPopulation : public Error {
public:
    using Error::Error;
};

class NonUniqueSteadyState : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class SingularAmplitudeSystem : public Error {
public:
    using Error::Error;
};

class NotAtExceptionalPoint : public Error {
public:
    using Error::Error;
};

class TruncationCapExceeded : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace wgm
