#pragma once

#include "bergmanlab/ball_geometry.hpp"
#include "bergmanlab/quadrature.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace bergmanlab {

/// Exponent tuple of the monomial z^alpha.
struct MultiIndex {
    std::vector<int> exponents;

    int degree() const;
    std::size_t dim() const { return exponents.size(); }
    auto operator<=>(const MultiIndex&) const = default;
};

/// Largest basis the library will assemble (dense eigensolves are O(N^3)).
inline constexpr std::size_t kDefaultBasisCap = 20000;

/// Orthonormal monomial basis e_alpha = z^alpha / ||z^alpha|| of polynomials of degree <= D
/// in the Bergman space of B_n, in graded lexicographic order.
class MultiIndexBasis {
public:
    MultiIndexBasis(int n, int max_degree, std::size_t cap = kDefaultBasisCap);

    int dim() const { return n_; }
    int max_degree() const { return degree_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const RVector& norm_constants() const { return norms_; }
    const MultiIndex& index(std::size_t k) const { return indices_[k]; }
    double norm_constant(std::size_t k) const { return norms_(static_cast<Eigen::Index>(k)); }

    /// Position of alpha in the basis, if present.
    std::optional<std::size_t> position(const MultiIndex& alpha) const;

    /// Row vector (e_alpha(z))_alpha.
    CVector evaluate_all(const CVector& z) const;
    /// points: dim x count; returns count x size with entry (j, alpha) = e_alpha(point_j).
    CMatrix evaluate_matrix(const CMatrix& points) const;

    /// Indices with total degree <= degree, as positions.
    std::vector<std::size_t> positions_up_to(int degree) const;

    bool operator==(const MultiIndexBasis& other) const { return n_ == other.n_ && degree_ == other.degree_; }

private:
    int n_;
    int degree_;
    std::vector<MultiIndex> indices_;
    RVector norms_;
    std::map<MultiIndex, std::size_t> lookup_;
};

MultiIndexBasis build_basis(int n, int max_degree, std::size_t cap = kDefaultBasisCap);

/// binomial(n + D, n); saturates at SIZE_MAX.
std::size_t basis_size(int n, int max_degree);

/// Bergman norm ||z^alpha|| = sqrt(n! alpha! / (n + |alpha|)!) under normalized volume.
double monomial_norm(const MultiIndex& alpha);

/// K_z(w) = (1 - <w, z>)^{-(n+1)}.
Complex bergman_kernel(const BallPoint& z, const BallPoint& w);

/// k_z(w) = K_z(w) (1 - |z|^2)^{(n+1)/2}.
Complex normalized_kernel(const BallPoint& z, const BallPoint& w);

/// sum_alpha coeffs_alpha e_alpha(z).
Complex evaluate(const MultiIndexBasis& basis, const CVector& coeffs, const BallPoint& z);

/// Coefficients of the degree-D truncation of K_{z0}: conj(e_alpha(z0)).
CVector truncated_kernel_coefficients(const MultiIndexBasis& basis, const BallPoint& z0);

/// Bergman inner product of two coefficient vectors in the orthonormal basis.
Complex coefficient_inner(const CVector& f, const CVector& g);

/// Quadrature Gram matrix (int e_beta conj(e_alpha) dv)_{alpha beta}.
CMatrix quadrature_gram(const MultiIndexBasis& basis, const BallRule& rule);

namespace detail {
inline Complex ipow(Complex x, int p)
{
    Complex r = 1.0;
    for (; p > 0; p >>= 1, x *= x)
        if (p & 1)
            r *= x;
    return r;
}

inline Complex kernel(const CVector& z, const CVector& w, int n)
{
    return 1.0 / ipow(1.0 - inner(w, z), n + 1);
}
} // namespace detail

} // namespace bergmanlab
