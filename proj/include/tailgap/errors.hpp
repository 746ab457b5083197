#pragma once

#include <stdexcept>
#include <string>

namespace tailgap {

/// Bad caller input: malformed parameters, out-of-range probabilities, bad files.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the support or admissible range of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base of failures that come from the numbers themselves rather than the input shape.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfiniteMeanError : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateTailError : public NumericError {
public:
    using NumericError::NumericError;
};

class EstimationError : public NumericError {
public:
    using NumericError::NumericError;
};

class TruncationError : public NumericError {
public:
    TruncationError(const std::string& what, double achieved_bound)
        : NumericError(what), achieved_bound_(achieved_bound) {}

    double achieved_bound() const noexcept { return achieved_bound_; }

private:
    double achieved_bound_;
};

}  // namespace tailgap
