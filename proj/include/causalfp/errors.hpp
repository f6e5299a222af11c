#pragma once

#include <stdexcept>
#include <string>

namespace causalfp {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad inputs: missing files, dimension mismatches, domain violations.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failures: singular systems, indefinite matrices, optimizer
/// breakdown. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularBlockError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotPositiveDefiniteError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateVarianceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateSamplesError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateContrastError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InfeasibleThresholdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Carries the best point found when no optimizer start converged.
class OptimizerFailureError : public NumericalError {
public:
    OptimizerFailureError(const std::string& msg, double sigma, double omega, double loglik)
        : NumericalError(msg), best_sigma(sigma), best_omega(omega), best_loglik(loglik) {}

    double best_sigma;
    double best_omega;
    double best_loglik;
};

}  // namespace causalfp
