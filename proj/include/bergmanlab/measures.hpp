#pragma once

#include "bergmanlab/ball_geometry.hpp"
#include "bergmanlab/bergman_space.hpp"
#include "bergmanlab/operator_matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bergmanlab {

struct WeightedPoint {
    BallPoint point;
    double weight = 0.0;
};

/// Finite positive measure on the ball: point atoms plus weighted quadrature nodes
/// approximating an absolutely continuous part.
///
/// Nodes that come from a d-dimensional variety can carry their d-volume weight (quadrature
/// weight times the induced volume density, without any (1 - |w|^2) factor); kernel-mass
/// estimates that need dv_d read it from there.
class MeasureSpec {
public:
    MeasureSpec() = default;
    explicit MeasureSpec(std::size_t n) : n_(n) {}

    void add_atom(const BallPoint& p, double weight);
    void add_node(const BallPoint& p, double weight);
    void add_variety_node(const BallPoint& p, double weight, double volume_weight);

    std::size_t dim() const { return n_; }
    const std::vector<WeightedPoint>& atoms() const { return atoms_; }
    const std::vector<WeightedPoint>& nodes() const { return nodes_; }
    std::size_t support_size() const { return atoms_.size() + nodes_.size(); }
    bool empty() const { return support_size() == 0; }
    double total_mass() const { return total_mass_; }

    /// Present when every node carries a d-volume weight.
    std::optional<int> variety_dim() const { return variety_dim_; }
    void set_variety_dim(int d) { variety_dim_ = d; }
    const std::vector<double>& volume_weights() const { return volume_weights_; }

    /// Support points as columns (atoms first, then nodes) and the matching weights.
    CMatrix support_matrix() const;
    RVector weight_vector() const;

    /// Same support, every weight multiplied by factor > 0.
    MeasureSpec scaled(double factor) const;

    /// FNV-1a digest of dimension, support and weights.
    std::uint64_t fingerprint() const;

private:
    void check(const BallPoint& p, double weight, const char* what);

    std::size_t n_ = 0;
    std::vector<WeightedPoint> atoms_;
    std::vector<WeightedPoint> nodes_;
    std::vector<double> volume_weights_;
    std::optional<int> variety_dim_;
    double total_mass_ = 0.0;
};

/// Normalized volume of B_n represented by a quadrature rule.
MeasureSpec volume_measure(const BallRule& rule);

/// Estimates of three equivalent Carleson conditions on a finite grid (lower bounds for the sups).
struct CarlesonReport {
    double berezin_sup = 0.0;
    double ratio_sup = 0.0;
    double ratio_radius = 0.0;
    double toeplitz_norm = 0.0;
    int degree = 0;
    std::string grid_description;
};

/// int (1 - |z|^2)^{n+1} / |1 - <w, z>|^{2(n+1)} dmu(w) = int |k_z|^2 dmu.
double berezin_transform(const MeasureSpec& mu, const BallPoint& z);
double berezin_sup(const MeasureSpec& mu, const std::vector<BallPoint>& grid);

/// mu(D(z, r)) / v_n(D(z, r)), membership through the ellipsoid description.
double ball_ratio(const MeasureSpec& mu, double r, const BallPoint& z);
double ball_ratio_sup(const MeasureSpec& mu, double r, const std::vector<BallPoint>& grid);

/// Points (1 - 2^{-k}) u for k = 1..max_shell and each unit direction u.
std::vector<BallPoint> radial_shell_grid(const std::vector<CVector>& directions, int max_shell);

/// Matrix of T_mu in the orthonormal basis: (T)_{alpha beta} = int e_beta conj(e_alpha) dmu.
OperatorMatrix toeplitz_from_measure(const MeasureSpec& mu, const MultiIndexBasis& basis);

CarlesonReport carleson_report(const MeasureSpec& mu, const std::vector<BallPoint>& grid, double r,
                               const MultiIndexBasis& basis);

/// Kernel integrals use nested Gauss-Kronrod panels graded toward the singularity.
struct KernelIntegralOptions {
    /// Relative error estimate above which the result is flagged.
    double warn_tol = 1e-6;
};

struct KernelIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
    bool precision_warning = false;
};

/// I_c(z) = int_S dsigma(zeta) / |1 - <z, zeta>|^{n + c} over the normalized sphere of C^n.
KernelIntegral eval_I_c(const BallPoint& z, double c, const KernelIntegralOptions& opts = {});

/// J_{c,t}(z) = int_B (1 - |w|^2)^t / |1 - <z, w>|^{n + 1 + t + c} dv(w), t > -1.
KernelIntegral eval_J_ct(const BallPoint& z, double c, double t, const KernelIntegralOptions& opts = {});

/// sup over the grid (points of B_d) of int_{r < |w| < 1} (1 - |w|^2)^t / |1 - <z, w>|^{d+1} dv_d(w).
double tail_kernel_mass(double t, double r, const std::vector<BallPoint>& grid, const KernelIntegralOptions& opts = {});
KernelIntegral tail_kernel_integral(double t, double r, const BallPoint& z, const KernelIntegralOptions& opts = {});

/// Sum over variety nodes outside D(z, exclusion_r) of
/// (1 - |z|^2)^{(n-d)/2} (1 - |w|^2)^{(n-d)/2} / |1 - <z, w>|^{n+1} dv_d(w).
/// exclusion_r = 0 keeps every node.
double offdiag_kernel_mass(const MeasureSpec& variety_measure, const BallPoint& z, double exclusion_r);

} // namespace bergmanlab
