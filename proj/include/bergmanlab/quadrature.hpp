#pragma once

#include "bergmanlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bergmanlab {

/// One-dimensional rule: sum_k weights[k] g(nodes[k]) ~ integral of g against the rule's weight.
struct GaussRule {
    RVector nodes;
    RVector weights;
};

/// Gauss-Jacobi rule on [0, 1] for the weight (1 - u)^a, a > -1 (Golub-Welsch).
GaussRule gauss_jacobi_unit(int order, double a);

/// Gauss-Legendre rule on [lo, hi].
GaussRule gauss_legendre(int order, double lo, double hi);

struct QuadratureScheme {
    enum class Kind { Product, Graded, MonteCarlo };

    Kind kind = Kind::Product;
    /// Product: Gauss order per stick-breaking radial factor. Graded: Gauss order per dyadic shell.
    int radial_order = 0;
    /// Trapezoid points per angle (Graded: the minimum per shell).
    int angular_order = 0;
    /// Graded: number of dyadic shells 1 - 2^{-k} resolved near the sphere.
    int shells = 10;
    /// Graded: shell k uses max(angular_order, ceil(angular_growth * 2^k)) angles.
    double angular_growth = 16.0;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    /// When >= 0, deterministic rules must reproduce every moment z^a conj(z)^b with |a|,|b| <= 2*exact_degree.
    int exact_degree = -1;

    /// Smallest product rule exact for a degree-D basis (radial D+1, angular 2D+1).
    static QuadratureScheme for_degree(int degree);
};

std::string to_string(QuadratureScheme::Kind kind);
QuadratureScheme::Kind quadrature_kind_from_string(const std::string& name);

/// Quadrature on the unit ball of C^dim for normalized volume measure.
struct BallRule {
    int dim = 0;
    CMatrix nodes;  // dim x size, one node per column
    RVector weights;
    bool monte_carlo = false;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
    /// Rule for the ball of the given radius (normalized so the unit ball has mass 1).
    BallRule scaled(double radius) const;
};

/// Closed-form monomial moment over B_n: int |z^alpha|^2 dv = n! alpha! / (n + |alpha|)!.
double ball_moment(const std::vector<int>& alpha);

BallRule ball_quadrature(int n, const QuadratureScheme& scheme);

struct ExactnessReport {
    bool ok = true;
    double worst_error = 0.0;
    std::string worst_moment;
};

/// Checks the moment contract for |alpha|, |beta| <= 2 * degree.
ExactnessReport check_exactness(const BallRule& rule, const QuadratureScheme& scheme, int degree, double tol = 1e-10);

/// Integral with a Monte Carlo standard error (zero for deterministic rules).
struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
};

template <class F>
Estimate integrate(const BallRule& rule, F&& f)
{
    Estimate e;
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double v = f(rule.nodes.col(static_cast<Eigen::Index>(k)));
        sum += rule.weights(static_cast<Eigen::Index>(k)) * v;
        sum2 += v * v;
    }
    e.value = sum;
    if (rule.monte_carlo && rule.size() > 1) {
        const double n = static_cast<double>(rule.size());
        const double mean = sum2 / n;
        e.standard_error = std::sqrt(std::max(0.0, mean - sum * sum) / (n - 1.0));
    }
    return e;
}

} // namespace bergmanlab
