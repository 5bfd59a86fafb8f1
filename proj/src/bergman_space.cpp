#include "bergmanlab/bergman_space.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace bergmanlab {

namespace {

// Degree-k exponent tuples in descending lexicographic order: (k,0,...), (k-1,1,...), ..., (0,...,k).
void append_degree(int n, int k, std::vector<MultiIndex>& out)
{
    std::vector<int> current(static_cast<std::size_t>(n), 0);
    auto fill = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n - 1) {
            current[static_cast<std::size_t>(pos)] = remaining;
            out.push_back(MultiIndex{current});
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            current[static_cast<std::size_t>(pos)] = e;
            self(self, pos + 1, remaining - e);
        }
    };
    fill(fill, 0, k);
}

} // namespace

int MultiIndex::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

std::size_t basis_size(int n, int max_degree)
{
    // binomial(n + D, n) computed incrementally; each partial product is itself a binomial coefficient.
    std::size_t value = 1;
    for (int k = 1; k <= n; ++k) {
        const auto num = static_cast<std::size_t>(max_degree + k);
        if (value > std::numeric_limits<std::size_t>::max() / num)
            return std::numeric_limits<std::size_t>::max();
        value = value * num / static_cast<std::size_t>(k);
    }
    return value;
}

double monomial_norm(const MultiIndex& alpha) { return std::sqrt(ball_moment(alpha.exponents)); }

MultiIndexBasis::MultiIndexBasis(int n, int max_degree, std::size_t cap) : n_(n), degree_(max_degree)
{
    if (n < 1)
        throw DomainError("build_basis: n must be >= 1");
    if (max_degree < 0)
        throw DomainError("build_basis: degree must be >= 0");
    const std::size_t count = basis_size(n, max_degree);
    if (count > cap)
        throw DomainError("build_basis: basis size " + std::to_string(count) + " exceeds cap " + std::to_string(cap));
    indices_.reserve(count);
    for (int k = 0; k <= max_degree; ++k)
        append_degree(n, k, indices_);
    norms_.resize(static_cast<Eigen::Index>(indices_.size()));
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        norms_(static_cast<Eigen::Index>(k)) = monomial_norm(indices_[k]);
        lookup_.emplace(indices_[k], k);
    }
}

std::optional<std::size_t> MultiIndexBasis::position(const MultiIndex& alpha) const
{
    auto it = lookup_.find(alpha);
    if (it == lookup_.end())
        return std::nullopt;
    return it->second;
}

CVector MultiIndexBasis::evaluate_all(const CVector& z) const
{
    if (z.size() != n_)
        throw DomainError("MultiIndexBasis::evaluate_all: dimension mismatch");
    CMatrix powers(n_, degree_ + 1);
    for (int i = 0; i < n_; ++i) {
        powers(i, 0) = 1.0;
        for (int e = 1; e <= degree_; ++e)
            powers(i, e) = powers(i, e - 1) * z(i);
    }
    CVector out(static_cast<Eigen::Index>(indices_.size()));
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        Complex v = 1.0;
        const auto& ex = indices_[k].exponents;
        for (int i = 0; i < n_; ++i)
            v *= powers(i, ex[static_cast<std::size_t>(i)]);
        out(static_cast<Eigen::Index>(k)) = v / norms_(static_cast<Eigen::Index>(k));
    }
    return out;
}

CMatrix MultiIndexBasis::evaluate_matrix(const CMatrix& points) const
{
    if (points.rows() != n_)
        throw DomainError("MultiIndexBasis::evaluate_matrix: dimension mismatch");
    CMatrix out(points.cols(), static_cast<Eigen::Index>(indices_.size()));
    for (Eigen::Index j = 0; j < points.cols(); ++j)
        out.row(j) = evaluate_all(points.col(j)).transpose();
    return out;
}

std::vector<std::size_t> MultiIndexBasis::positions_up_to(int degree) const
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < indices_.size(); ++k)
        if (indices_[k].degree() <= degree)
            out.push_back(k);
    return out;
}

MultiIndexBasis build_basis(int n, int max_degree, std::size_t cap) { return MultiIndexBasis(n, max_degree, cap); }

Complex bergman_kernel(const BallPoint& z, const BallPoint& w)
{
    check_same_dim(z, w, "bergman_kernel");
    return detail::kernel(z.coords(), w.coords(), static_cast<int>(z.dim()));
}

Complex normalized_kernel(const BallPoint& z, const BallPoint& w)
{
    const double half = 0.5 * (static_cast<double>(z.dim()) + 1.0);
    return bergman_kernel(z, w) * std::pow(1.0 - z.norm2(), half);
}

Complex evaluate(const MultiIndexBasis& basis, const CVector& coeffs, const BallPoint& z)
{
    if (static_cast<std::size_t>(coeffs.size()) != basis.size())
        throw DomainError("evaluate: coefficient vector has length " + std::to_string(coeffs.size()) +
                          ", basis has " + std::to_string(basis.size()));
    return (basis.evaluate_all(z.coords()).array() * coeffs.array()).sum();
}

CVector truncated_kernel_coefficients(const MultiIndexBasis& basis, const BallPoint& z0)
{
    return basis.evaluate_all(z0.coords()).conjugate();
}

Complex coefficient_inner(const CVector& f, const CVector& g)
{
    if (f.size() != g.size())
        throw DomainError("coefficient_inner: length mismatch");
    return g.dot(f);
}

CMatrix quadrature_gram(const MultiIndexBasis& basis, const BallRule& rule)
{
    if (rule.dim != basis.dim())
        throw DomainError("quadrature_gram: rule and basis dimensions differ");
    const CMatrix values = basis.evaluate_matrix(rule.nodes);
    return values.adjoint() * (rule.weights.cast<Complex>().asDiagonal() * values);
}

} // namespace bergmanlab
