#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ikf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidSchedule : public Error {
public:
    using Error::Error;
};

/// A recursion step produced an H that is not numerically positive definite.
class SingularUpdate : public Error {
public:
    SingularUpdate(std::size_t step, const std::string& detail)
        : Error("singular update at step " + std::to_string(step) + ": " + detail), step_(step) {}

    /// 1-based index of the offending step.
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// A normal-equations system (batch or closed form) is singular.
class SingularSystem : public Error {
public:
    using Error::Error;
};

class EstimationFailed : public Error {
public:
    using Error::Error;
};

/// Too many Monte Carlo iterations failed.
class DataQualityError : public Error {
public:
    using Error::Error;
};

}  // namespace ikf
