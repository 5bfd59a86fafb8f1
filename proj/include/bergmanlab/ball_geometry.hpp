#pragma once

#include "bergmanlab/types.hpp"

#include <cstddef>

namespace bergmanlab {

/// Points with |z| >= 1 - kBoundaryGuard are rejected by every geometry routine.
inline constexpr double kBoundaryGuard = 1e-14;

/// A point of the open unit ball of C^n.
class BallPoint {
public:
    BallPoint() = default;
    explicit BallPoint(CVector coords);
    BallPoint(std::initializer_list<Complex> coords);

    static BallPoint origin(std::size_t n) { return BallPoint(CVector::Zero(static_cast<Eigen::Index>(n))); }

    const CVector& coords() const { return coords_; }
    std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
    double norm2() const { return coords_.squaredNorm(); }
    double norm() const { return coords_.norm(); }
    Complex operator[](std::size_t i) const { return coords_(static_cast<Eigen::Index>(i)); }

private:
    CVector coords_;
};

/// Throws DomainError unless |z| < 1 - kBoundaryGuard and z is finite and nonempty.
void check_in_ball(const CVector& z, const char* what);
void check_same_dim(const BallPoint& a, const BallPoint& b, const char* what);

/// Ellipsoidal description of a hyperbolic ball D(z, r).
struct HyperbolicBallShape {
    CVector center;        // c = (1 - s^2) z / (1 - s^2 |z|^2)
    CVector radial_axis;   // z / |z|, or e_1 when z = 0
    double radius_parallel = 0.0;  // s * rho
    double radius_perp = 0.0;      // s * sqrt(rho)
    double s = 0.0;                // tanh r
    double rho = 0.0;              // (1 - |z|^2) / (1 - s^2 |z|^2)
    bool centered_at_origin = false;

    /// Left side of the ellipsoid inequality; w is inside iff the value is < 1.
    double level(const CVector& w) const;
    bool contains(const CVector& w) const { return level(w) < 1.0; }
};

/// The involutive automorphism phi_a of the ball with phi_a(0) = a.
/// phi_0 is taken to be -identity (P_0 = 0, Q_0 = I).
BallPoint mobius_map(const BallPoint& a, const BallPoint& w);

/// rho(z, w) = |phi_z(w)|.
double pseudo_hyperbolic_distance(const BallPoint& z, const BallPoint& w);

/// beta(z, w) = atanh(rho(z, w)); throws OverflowError when rho rounds to 1.
double hyperbolic_distance(const BallPoint& z, const BallPoint& w);

/// Real Jacobian of phi_z at w: (1 - |z|^2)^{n+1} / |1 - <w, z>|^{2(n+1)}.
double mobius_jacobian(const BallPoint& z, const BallPoint& w);

HyperbolicBallShape hyperbolic_ball(const BallPoint& z, double r);

/// Normalized volume of D(z, r): s^{2n} rho^{n+1}.
double hyperbolic_ball_volume(const BallPoint& z, double r);

namespace detail {

// Unchecked kernels used in inner loops; callers guarantee the preconditions.
CVector mobius_map(const CVector& a, const CVector& w);

/// 1 - rho(z, w)^2 = (1 - |z|^2)(1 - |w|^2) / |1 - <z, w>|^2.
inline double one_minus_rho2(const CVector& z, const CVector& w)
{
    return (1.0 - z.squaredNorm()) * (1.0 - w.squaredNorm()) / std::norm(1.0 - inner(z, w));
}

} // namespace detail

} // namespace bergmanlab
