#pragma once

#include "bergmanlab/measures.hpp"
#include "bergmanlab/quadrature.hpp"

#include <utility>
#include <variant>
#include <vector>

namespace bergmanlab {

/// Holomorphic polynomial sum_k c_k w^{alpha_k} in nvars variables.
struct Polynomial {
    struct Term {
        std::vector<int> exponents;
        Complex coeff;
    };

    int nvars = 0;
    std::vector<Term> terms;

    Polynomial() = default;
    explicit Polynomial(int vars) : nvars(vars) {}

    Polynomial& add(std::vector<int> exponents, Complex coeff);
    Complex operator()(const CVector& w) const;
    /// Holomorphic gradient (d/dw_1, ..., d/dw_nvars).
    CVector gradient(const CVector& w) const;
    int degree() const;
};

/// {c + frame * eta : eta in C^d} intersected with the ball. frame is n x d with orthonormal columns.
struct AffineSlice {
    CVector basepoint;
    CMatrix frame;

    int n() const { return static_cast<int>(basepoint.size()); }
    int d() const { return static_cast<int>(frame.cols()); }
    /// Point of the slice closest to the origin.
    CVector center() const;
    /// Radius sqrt(1 - |center|^2) of the d-ball cut out by the slice.
    double radius() const;
    CVector point(const CVector& eta) const { return center() + frame * eta; }
};

/// {U (w', F(w')) : w' in B_d} intersected with the ball; F = (F_{d+1}, ..., F_n), U unitary (identity by default).
struct PolynomialGraph {
    int n = 0;
    int d = 0;
    std::vector<Polynomial> components;
    CMatrix frame;

    PolynomialGraph() = default;
    PolynomialGraph(int n_, int d_, std::vector<Polynomial> comps, CMatrix u = CMatrix());

    CVector point(const CVector& param) const;
    /// (n - d) x d Jacobian of F at param.
    CMatrix jacobian(const CVector& param) const;
    /// n x d derivative of the embedding param -> point.
    CMatrix embedding_derivative(const CVector& param) const;
    /// Parameter of a point on the graph (first d frame coordinates).
    CVector parameter_of(const CVector& w) const;
    /// max_j |w_j - F_j(w')| in frame coordinates.
    double residual(const CVector& w) const;
};

struct FinitePoints {
    std::vector<BallPoint> points;
};

using VarietySpec = std::variant<AffineSlice, PolynomialGraph, FinitePoints>;

int variety_dim(const VarietySpec& v);
int ambient_dim(const VarietySpec& v);

/// Induced volume density det(I + J_F^* J_F) at a parameter point; 1 for affine slices.
double volume_density(const VarietySpec& v, const CVector& param);

/// The measure (1 - |w|^2)^{n-d} dv_d on {w in V : |w| >= s}, plus atoms (1 - |z_i|^2)^{n+1} at the
/// configured singular points.
struct VarietyMeasure {
    MeasureSpec measure;
    int d = 0;
    double s = 0.0;
    std::vector<BallPoint> atom_points;
    /// Parameter-space quadrature mass of graph nodes dropped because they left the ball.
    double dropped_mass = 0.0;
    /// Parameter point of every node, in node order.
    std::vector<CVector> parameters;
};

VarietyMeasure variety_quadrature(const VarietySpec& v, double s, const QuadratureScheme& scheme,
                                  const std::vector<BallPoint>& singular_points = {});

/// Point of the graph with |w| = target_norm along the parameter ray t * direction, t in (0, 1).
BallPoint graph_point_with_norm(const PolynomialGraph& g, const CVector& direction, double target_norm);

/// Unitary frame adapted to z: column 0 is z/|z|, columns 0..d-1 parameterize the graph near z.
struct AdaptedFrame {
    CMatrix basis;         // n x n unitary
    CMatrix slope;         // (n - d) x d, J^z = J_{a''} J_{a'}^{-1}
    CVector z_tangent;     // a'(z)
    CVector z;
    int d = 0;
};

AdaptedFrame adapted_frame(const PolynomialGraph& g, const BallPoint& z);

/// Default neighborhood radius for tangent_flatten: 0.2 (1 - |z|).
inline double default_flatten_radius(const BallPoint& z) { return 0.2 * (1.0 - z.norm()); }

/// p_z(w): keeps the first d adapted coordinates of w and replaces the rest by the tangent-plane values.
/// neighborhood <= 0 selects default_flatten_radius(z).
BallPoint tangent_flatten(const PolynomialGraph& g, const BallPoint& z, const BallPoint& w, double neighborhood = 0.0);
CVector tangent_flatten(const AdaptedFrame& frame, const CVector& w);

struct FlatteningDefects {
    double ratio_defect = 0.0;
    double metric_defect = 0.0;
    std::size_t samples = 0;
    /// Sampled w whose image left the ball (excluded from the maxima).
    std::size_t outside_ball = 0;
};

/// Defects of p_z over graph points w in D(z, R), sampled by a parameter-space rule around z'.
FlatteningDefects flattening_defects(const VarietySpec& v, const BallPoint& z, double R,
                                     const QuadratureScheme& sampler = QuadratureScheme::for_degree(24));

struct MeanValueCheck {
    Complex lhs;
    Complex rhs;
    double c_r = 0.0;
    double slice_radius = 0.0;
};

/// Both sides of int_{slice cap D(z,R)} f (1 - |w|^2)^{n-d} / (1 - <z, w>)^{n+1} dv = r^{-2} C_R f(z).
/// lhs pulls the integral back to D_d(0, R) through the slice chart and phi_xi.
MeanValueCheck affine_mean_value_check(const AffineSlice& slice, const Polynomial& f, const BallPoint& z, double R,
                                       const QuadratureScheme& scheme = QuadratureScheme::for_degree(40));

} // namespace bergmanlab
