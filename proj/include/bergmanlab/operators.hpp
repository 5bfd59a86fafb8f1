#pragma once

#include "bergmanlab/bergman_space.hpp"
#include "bergmanlab/measures.hpp"
#include "bergmanlab/operator_matrix.hpp"
#include "bergmanlab/varieties.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bergmanlab {

inline constexpr double kDefaultKernelTol = 1e-6;
inline constexpr double kDefaultMinGapRatio = 10.0;

struct SpectralReport {
    /// Eigenvalues (Hermitian input) or singular values, descending.
    RVector values;
    bool singular_values = false;
    /// Number of values above the split; the gap lies between values[gap_index - 1] and values[gap_index].
    std::size_t gap_index = 0;
    double gap_ratio = 0.0;
    double threshold = 0.0;
    std::size_t kernel_dimension = 0;
    std::map<double, double> schatten_partial_sums;
    int degree = 0;
};

/// Rows are support points (atoms first), columns basis elements: sqrt(weight_j) e_alpha(point_j).
OperatorMatrix restriction_matrix(const MultiIndexBasis& basis, const MeasureSpec& mu);

struct SpectralProjection {
    OperatorMatrix Q;
    OperatorMatrix P;
    SpectralReport report;
    /// Orthonormal eigenvectors spanning range(Q), as columns.
    CMatrix range_basis;
};

/// Q = spectral projection of T onto eigenvalues above kernel_tol * lambda_max, P = I - Q.
/// Throws NoSpectralGap when (smallest kept) / (largest discarded) < min_gap_ratio.
SpectralProjection spectral_projection(const OperatorMatrix& T, double kernel_tol = kDefaultKernelTol,
                                       double min_gap_ratio = kDefaultMinGapRatio);

struct Extension {
    OperatorMatrix E;
    double norm = 0.0;
    /// Smallest singular value of R restricted to range(Q).
    double sigma_min = 0.0;
    std::size_t rank = 0;
};

/// E = (R restricted to range Q)^+; singular values below pinv_tol * sigma_max are dropped and any drop
/// below dim range(Q) raises IllConditionedRestriction.
Extension extension_operator(const OperatorMatrix& R, const OperatorMatrix& Q, double pinv_tol = kDefaultKernelTol);

/// Matrix of multiplication by z_i, (M_i)_{beta alpha} = <z_i e_alpha, e_beta>, with the degree-D columns
/// zeroed so the image stays inside the truncation.
OperatorMatrix multiplier_matrix(int i, const MultiIndexBasis& basis);

/// S_i = Q M_i Q.
OperatorMatrix compressed_multiplier(int i, const OperatorMatrix& Q, const MultiIndexBasis& basis);

/// AB - BA.
OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B);

/// Block of an operator on the Bergman basis over indices of total degree <= degree.
OperatorMatrix degree_block(const OperatorMatrix& A, const MultiIndexBasis& basis, int degree);

/// Singular values of A with sum sigma_k^p for every requested p.
SpectralReport schatten_partial_sums(const OperatorMatrix& A, const std::vector<double>& exponents);

struct SchattenKernelIntegral {
    double integral = 0.0;
    double bound_integral = 0.0;
};

/// integral = sum_{z,w} |z_i - w_i|^{p/2} |z_j - w_j|^{p/2} |K_w(z)|^2 mu(z) mu(w);
/// bound_integral = sum over nodes of (1 - |z|^2)^{p/2 - d - 1} dv_d(z).
SchattenKernelIntegral schatten_kernel_integral(const VarietyMeasure& mu, int i, int j, double p,
                                                bool with_double_sum = true);

enum class KernelMode { ClosedForm, Truncated };

/// T_hat on the weighted sample space: sqrt(w_j w_k) K_{p_k}(p_j), closed form or truncated to degree 2D.
OperatorMatrix sample_space_toeplitz(const MeasureSpec& mu, const MultiIndexBasis& basis, KernelMode mode);

/// [Z_i, T_hat] with Z_i the diagonal of i-th coordinates.
OperatorMatrix sample_space_commutator(const MeasureSpec& mu, const MultiIndexBasis& basis, int i,
                                       KernelMode mode = KernelMode::ClosedForm);

struct GramCriterion {
    double residual = 0.0;
    RVector best_diagonal;
    /// G_{ij} = <k_{a_j}, k_{a_i}>.
    CMatrix gram;
};

/// min over nonnegative diagonal D of ||G - G D G^*||_F: projected gradient from `restarts` seeded starts
/// followed by exact coordinate minimization.
GramCriterion gram_criterion(const std::vector<BallPoint>& points, int restarts = 20, std::uint64_t seed = 1);

/// Largest c with T^3 >= c T: the square of the smallest eigenvalue kept by spectral_projection.
double toeplitz_cubed_bound(const OperatorMatrix& T, double kernel_tol = kDefaultKernelTol,
                            double min_gap_ratio = kDefaultMinGapRatio);

/// Matrix Market array file (complex general) with the domain and codomain tags in header comments.
void write_matrix_market(std::ostream& out, const OperatorMatrix& A);
void write_matrix_market(const std::string& path, const OperatorMatrix& A);

} // namespace bergmanlab
