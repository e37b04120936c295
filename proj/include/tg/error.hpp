#pragma once

#include <stdexcept>
#include <string>

namespace tg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Basis with Im(omega2/omega1) <= 0 or zero area.
class InvalidBasis : public Error {
public:
    using Error::Error;
};

/// Evaluation requested at (or numerically at) a logarithmic singularity.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// A grid or sampling is too coarse for the requested result.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Singular quadrature or extrapolation failed to converge.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Adaptive ODE integration could not make progress.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// Root bracketing failed.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid input configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An invariant that the mathematics guarantees was violated; signals a numerics bug.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace tg
