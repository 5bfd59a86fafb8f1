#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bergmanlab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument: dimension mismatch, point outside the ball, bad sizes.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A value left the range representable at working precision.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// The spectrum of a positive operator has no usable gap above its numerical kernel.
class NoSpectralGap : public Error {
public:
    using Error::Error;
};

/// Restriction to the quotient lost rank, so no bounded right inverse exists at this truncation.
class IllConditionedRestriction : public Error {
public:
    using Error::Error;
};

/// A deterministic quadrature rule failed its polynomial exactness contract.
class QuadratureExactnessError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Hermitian inner product, linear in the first slot: <z, w> = sum z_i conj(w_i).
inline Complex inner(const CVector& z, const CVector& w) { return w.dot(z); }

} // namespace bergmanlab
