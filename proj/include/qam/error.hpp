#pragma once

#include <stdexcept>
#include <string>

namespace qam {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical or shape precondition failures (CLI exit code 2).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File-system and format failures (CLI exit code 1).
class IoError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ZeroOrNonFiniteArgument : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularGramMatrix : public SingularMatrix {
public:
    using SingularMatrix::SingularMatrix;
};

class SingularCMatrix : public SingularMatrix {
public:
    using SingularMatrix::SingularMatrix;
};

class OverflowInExcitation : public NumericalError {
public:
    OverflowInExcitation(double lambda, double argument)
        : NumericalError("excitation overflow at lambda=" + std::to_string(lambda) +
                         " argument=" + std::to_string(argument)),
          lambda_(lambda),
          argument_(argument) {}

    double lambda() const noexcept { return lambda_; }
    double argument() const noexcept { return argument_; }

private:
    double lambda_;
    double argument_;
};

class NonConvergence : public NumericalError {
public:
    NonConvergence(const std::string& what, double residual)
        : NumericalError(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class InvalidArgument : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class KindMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class IntensityOutOfRange : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class IndexOutOfRange : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class MalformedFile : public IoError {
public:
    using IoError::IoError;
};

}  // namespace qam
