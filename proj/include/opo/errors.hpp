#pragma once

#include <stdexcept>
#include <string>

namespace opo {

/// Invalid physical or scaled parameters (non-positive rates, negative drive...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A closed-form result was requested outside its domain of validity (mu >= 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// API misuse: mismatched state shape, unpaired input to a paired estimator, ...
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Root finding / minimization failed; the message carries the diagnostics.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An estimator refused its input (window too short, missing noise sums, ...).
class EstimatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace opo
