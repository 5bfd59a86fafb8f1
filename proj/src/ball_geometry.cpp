#include "bergmanlab/ball_geometry.hpp"

#include <cmath>
#include <string>

namespace bergmanlab {

void check_in_ball(const CVector& z, const char* what)
{
    if (z.size() == 0)
        throw DomainError(std::string(what) + ": empty point");
    if (!z.allFinite())
        throw DomainError(std::string(what) + ": non-finite coordinates");
    if (z.norm() >= 1.0 - kBoundaryGuard)
        throw DomainError(std::string(what) + ": point not strictly inside the ball (|z| = " +
                          std::to_string(z.norm()) + ")");
}

void check_same_dim(const BallPoint& a, const BallPoint& b, const char* what)
{
    if (a.dim() != b.dim())
        throw DomainError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
}

BallPoint::BallPoint(CVector coords) : coords_(std::move(coords)) { check_in_ball(coords_, "BallPoint"); }

BallPoint::BallPoint(std::initializer_list<Complex> coords) : coords_(static_cast<Eigen::Index>(coords.size()))
{
    Eigen::Index i = 0;
    for (const auto& c : coords)
        coords_(i++) = c;
    check_in_ball(coords_, "BallPoint");
}

namespace detail {

CVector mobius_map(const CVector& a, const CVector& w)
{
    const double a2 = a.squaredNorm();
    if (a2 == 0.0)
        return -w;
    const Complex wa = inner(w, a);
    const CVector pw = (wa / a2) * a;
    const CVector qw = w - pw;
    return (a - pw - std::sqrt(1.0 - a2) * qw) / (1.0 - wa);
}

} // namespace detail

BallPoint mobius_map(const BallPoint& a, const BallPoint& w)
{
    check_same_dim(a, w, "mobius_map");
    return BallPoint(detail::mobius_map(a.coords(), w.coords()));
}

double pseudo_hyperbolic_distance(const BallPoint& z, const BallPoint& w)
{
    check_same_dim(z, w, "pseudo_hyperbolic_distance");
    return detail::mobius_map(z.coords(), w.coords()).norm();
}

double hyperbolic_distance(const BallPoint& z, const BallPoint& w)
{
    const double rho = pseudo_hyperbolic_distance(z, w);
    if (!(rho < 1.0))
        throw OverflowError("hyperbolic_distance: pseudo-hyperbolic distance rounds to 1; points too close to the "
                            "boundary for double precision");
    return std::atanh(rho);
}

double mobius_jacobian(const BallPoint& z, const BallPoint& w)
{
    check_same_dim(z, w, "mobius_jacobian");
    const double p = static_cast<double>(z.dim()) + 1.0;
    return std::pow(1.0 - z.norm2(), p) / std::pow(std::norm(1.0 - inner(w.coords(), z.coords())), p);
}

double HyperbolicBallShape::level(const CVector& w) const
{
    if (centered_at_origin)
        return w.squaredNorm() / (s * s);
    const Complex along = inner(w, radial_axis);
    const CVector pw = along * radial_axis;
    const double par = (pw - center).squaredNorm();
    const double perp = (w - pw).squaredNorm();
    return par / (radius_parallel * radius_parallel) + perp / (radius_perp * radius_perp);
}

HyperbolicBallShape hyperbolic_ball(const BallPoint& z, double r)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError("hyperbolic_ball: radius must be positive and finite");
    HyperbolicBallShape shape;
    const double s = std::tanh(r);
    const double z2 = z.norm2();
    const double denom = 1.0 - s * s * z2;
    shape.s = s;
    shape.rho = (1.0 - z2) / denom;
    shape.center = ((1.0 - s * s) / denom) * z.coords();
    shape.radius_parallel = s * shape.rho;
    shape.radius_perp = s * std::sqrt(shape.rho);
    shape.centered_at_origin = (z2 == 0.0);
    shape.radial_axis = CVector::Zero(z.coords().size());
    if (shape.centered_at_origin)
        shape.radial_axis(0) = 1.0;
    else
        shape.radial_axis = z.coords() / std::sqrt(z2);
    return shape;
}

double hyperbolic_ball_volume(const BallPoint& z, double r)
{
    const auto shape = hyperbolic_ball(z, r);
    const double n = static_cast<double>(z.dim());
    return std::pow(shape.s, 2.0 * n) * std::pow(shape.rho, n + 1.0);
}

} // namespace bergmanlab
