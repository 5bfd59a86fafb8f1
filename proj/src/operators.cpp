#include "bergmanlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

namespace bergmanlab {

namespace {

RVector descending(const RVector& ascending) { return ascending.reverse(); }

SpaceTag block_tag(const MultiIndexBasis& basis, int degree)
{
    SpaceTag tag;
    tag.kind = SpaceTag::Kind::Bergman;
    tag.n = basis.dim();
    tag.degree = degree;
    tag.dim = basis_size(basis.dim(), degree);
    return tag;
}

} // namespace

OperatorMatrix restriction_matrix(const MultiIndexBasis& basis, const MeasureSpec& mu)
{
    if (mu.empty())
        throw DomainError("restriction_matrix: empty measure");
    if (mu.dim() != static_cast<std::size_t>(basis.dim()))
        throw DomainError("restriction_matrix: measure and basis dimensions differ");
    const CMatrix points = mu.support_matrix();
    const RVector w = mu.weight_vector();
    CMatrix r = basis.evaluate_matrix(points);
    for (Eigen::Index j = 0; j < r.rows(); ++j)
        r.row(j) *= std::sqrt(w(j));
    return OperatorMatrix(std::move(r), SpaceTag::bergman(basis), SpaceTag::sample(mu));
}

SpectralProjection spectral_projection(const OperatorMatrix& T, double kernel_tol, double min_gap_ratio)
{
    if (!T.hermitian())
        throw DomainError("spectral_projection: operator is not flagged Hermitian");
    if (!(kernel_tol > 0.0) || !(min_gap_ratio > 0.0))
        throw DomainError("spectral_projection: tolerances must be positive");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(T.entries());
    if (solver.info() != Eigen::Success)
        throw NoSpectralGap("spectral_projection: eigensolver failed");
    const RVector values = descending(solver.eigenvalues());
    const CMatrix vectors = solver.eigenvectors().rowwise().reverse();
    const auto size = values.size();

    SpectralReport rep;
    rep.values = values;
    rep.degree = T.domain().degree;
    if (size == 0 || !(values(0) > 0.0))
        throw NoSpectralGap("spectral_projection: operator has no positive eigenvalue");
    rep.threshold = kernel_tol * values(0);
    Eigen::Index kept = 0;
    while (kept < size && values(kept) > rep.threshold)
        ++kept;
    rep.gap_index = static_cast<std::size_t>(kept);
    rep.kernel_dimension = static_cast<std::size_t>(size - kept);
    const double smallest_kept = values(kept - 1);
    const double largest_dropped = kept < size ? values(kept) : 0.0;
    rep.gap_ratio = largest_dropped > 0.0 ? smallest_kept / largest_dropped : std::numeric_limits<double>::infinity();
    if (rep.gap_ratio < min_gap_ratio)
        throw NoSpectralGap("spectral_projection: gap ratio " + std::to_string(rep.gap_ratio) + " below " +
                            std::to_string(min_gap_ratio) + " at threshold " + std::to_string(rep.threshold));

    CMatrix range = vectors.leftCols(kept);
    CMatrix q = range * range.adjoint();
    CMatrix p = CMatrix::Identity(size, size) - q;
    const SpaceTag& tag = T.domain();
    return SpectralProjection{OperatorMatrix::on(std::move(q), tag, true), OperatorMatrix::on(std::move(p), tag, true),
                              std::move(rep), std::move(range)};
}

Extension extension_operator(const OperatorMatrix& R, const OperatorMatrix& Q, double pinv_tol)
{
    if (!(R.domain() == Q.domain()) || !(Q.domain() == Q.codomain()))
        throw DomainError("extension_operator: R and Q act on different spaces");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(Q.entries());
    std::vector<Eigen::Index> cols;
    for (Eigen::Index k = solver.eigenvalues().size() - 1; k >= 0; --k)
        if (solver.eigenvalues()(k) > 0.5)
            cols.push_back(k);
    const auto q = static_cast<Eigen::Index>(cols.size());
    if (q == 0)
        throw IllConditionedRestriction("extension_operator: Q has empty range");
    CMatrix vq(Q.rows(), q);
    for (Eigen::Index k = 0; k < q; ++k)
        vq.col(k) = solver.eigenvectors().col(cols[static_cast<std::size_t>(k)]);

    const CMatrix rv = R.entries() * vq;
    Eigen::BDCSVD<CMatrix> svd(rv, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sigma = svd.singularValues();
    const double cut = pinv_tol * (sigma.size() ? sigma(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > cut)
        ++rank;
    if (rank < q)
        throw IllConditionedRestriction("extension_operator: restriction to range(Q) has rank " +
                                        std::to_string(rank) + " < " + std::to_string(q));
    const RVector inv = sigma.head(rank).cwiseInverse();
    CMatrix e = vq * svd.matrixV().leftCols(rank) * inv.asDiagonal() * svd.matrixU().leftCols(rank).adjoint();

    Extension out{OperatorMatrix(std::move(e), R.codomain(), R.domain()), 0.0, sigma(rank - 1),
                  static_cast<std::size_t>(rank)};
    out.norm = 1.0 / out.sigma_min;
    return out;
}

OperatorMatrix multiplier_matrix(int i, const MultiIndexBasis& basis)
{
    const int n = basis.dim();
    if (i < 0 || i >= n)
        throw DomainError("multiplier_matrix: coordinate index out of range");
    const auto size = static_cast<Eigen::Index>(basis.size());
    CMatrix m = CMatrix::Zero(size, size);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        const MultiIndex& alpha = basis.index(a);
        const int deg = alpha.degree();
        if (deg >= basis.max_degree())
            continue;
        MultiIndex beta = alpha;
        ++beta.exponents[static_cast<std::size_t>(i)];
        const auto b = basis.position(beta);
        const double ai = alpha.exponents[static_cast<std::size_t>(i)];
        m(static_cast<Eigen::Index>(*b), static_cast<Eigen::Index>(a)) = std::sqrt((ai + 1.0) / (n + deg + 1.0));
    }
    return OperatorMatrix::on(std::move(m), SpaceTag::bergman(basis));
}

OperatorMatrix compressed_multiplier(int i, const OperatorMatrix& Q, const MultiIndexBasis& basis)
{
    const OperatorMatrix m = multiplier_matrix(i, basis);
    return Q * m * Q;
}

OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B) { return A * B - B * A; }

OperatorMatrix degree_block(const OperatorMatrix& A, const MultiIndexBasis& basis, int degree)
{
    const SpaceTag tag = SpaceTag::bergman(basis);
    if (!(A.domain() == tag) || !(A.codomain() == tag))
        throw DomainError("degree_block: operator does not act on " + tag.describe());
    if (degree < 0 || degree > basis.max_degree())
        throw DomainError("degree_block: degree out of range");
    const std::vector<std::size_t> idx = basis.positions_up_to(degree);
    const auto k = static_cast<Eigen::Index>(idx.size());
    CMatrix block(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            block(r, c) = A.entries()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                                      static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    return OperatorMatrix::on(std::move(block), block_tag(basis, degree), A.hermitian());
}

SpectralReport schatten_partial_sums(const OperatorMatrix& A, const std::vector<double>& exponents)
{
    for (double p : exponents)
        if (!(p > 0.0))
            throw DomainError("schatten_partial_sums: exponents must be positive");
    SpectralReport rep;
    rep.singular_values = true;
    rep.degree = A.domain().degree;
    Eigen::BDCSVD<CMatrix> svd(A.entries());
    rep.values = svd.singularValues();
    rep.gap_index = static_cast<std::size_t>(rep.values.size());
    for (double p : exponents) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < rep.values.size(); ++k)
            sum += std::pow(rep.values(k), p);
        rep.schatten_partial_sums[p] = sum;
    }
    return rep;
}

SchattenKernelIntegral schatten_kernel_integral(const VarietyMeasure& mu, int i, int j, double p, bool with_double_sum)
{
    if (!(p > 0.0))
        throw DomainError("schatten_kernel_integral: p must be positive");
    const int n = static_cast<int>(mu.measure.dim());
    if (i < 0 || i >= n || j < 0 || j >= n)
        throw DomainError("schatten_kernel_integral: coordinate index out of range");
    SchattenKernelIntegral out;
    if (with_double_sum) {
        const CMatrix pts = mu.measure.support_matrix();
        const RVector w = mu.measure.weight_vector();
        const Eigen::Index m = pts.cols();
        for (Eigen::Index a = 0; a < m; ++a) {
            double row = 0.0;
            for (Eigen::Index b = 0; b < m; ++b) {
                const double g = std::pow(std::abs(pts(i, a) - pts(i, b)), 0.5 * p) *
                                 std::pow(std::abs(pts(j, a) - pts(j, b)), 0.5 * p);
                if (g == 0.0)
                    continue;
                const double k2 = std::norm(detail::kernel(pts.col(a), pts.col(b), n));
                row += g * k2 * w(b);
            }
            out.integral += row * w(a);
        }
    }
    if (mu.d > 0) {
        const double e = 0.5 * p - mu.d - 1.0;
        const auto& nodes = mu.measure.nodes();
        const auto& vw = mu.measure.volume_weights();
        for (std::size_t k = 0; k < nodes.size(); ++k)
            out.bound_integral += std::pow(1.0 - nodes[k].point.norm2(), e) * vw[k];
    }
    return out;
}

OperatorMatrix sample_space_toeplitz(const MeasureSpec& mu, const MultiIndexBasis& basis, KernelMode mode)
{
    if (mu.empty())
        throw DomainError("sample_space_toeplitz: empty measure");
    const int n = static_cast<int>(mu.dim());
    if (n != basis.dim())
        throw DomainError("sample_space_toeplitz: measure and basis dimensions differ");
    const CMatrix pts = mu.support_matrix();
    const RVector sw = mu.weight_vector().cwiseSqrt();
    const Eigen::Index m = pts.cols();
    CMatrix t(m, m);
    if (mode == KernelMode::ClosedForm) {
        for (Eigen::Index k = 0; k < m; ++k)
            for (Eigen::Index j = 0; j < m; ++j)
                t(j, k) = sw(j) * sw(k) * detail::kernel(pts.col(k), pts.col(j), n);
    } else {
        const MultiIndexBasis wide(n, 2 * basis.max_degree());
        CMatrix v = wide.evaluate_matrix(pts);
        for (Eigen::Index j = 0; j < m; ++j)
            v.row(j) *= sw(j);
        t = v * v.adjoint();
    }
    return OperatorMatrix::on(std::move(t), SpaceTag::sample(mu), true);
}

OperatorMatrix sample_space_commutator(const MeasureSpec& mu, const MultiIndexBasis& basis, int i, KernelMode mode)
{
    if (i < 0 || i >= basis.dim())
        throw DomainError("sample_space_commutator: coordinate index out of range");
    const OperatorMatrix t = sample_space_toeplitz(mu, basis, mode);
    const CMatrix pts = mu.support_matrix();
    const CMatrix z = pts.row(i).transpose().asDiagonal();
    const OperatorMatrix zi = OperatorMatrix::on(z, t.domain());
    return commutator(zi, t);
}

GramCriterion gram_criterion(const std::vector<BallPoint>& points, int restarts, std::uint64_t seed)
{
    if (points.empty())
        throw DomainError("gram_criterion: need at least one point");
    const auto m = static_cast<Eigen::Index>(points.size());
    const int n = static_cast<int>(points.front().dim());
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            check_same_dim(points[a], points[b], "gram_criterion");
            if ((points[a].coords() - points[b].coords()).norm() < 1e-12)
                throw DomainError("gram_criterion: coincident points");
        }

    GramCriterion out;
    out.gram.resize(m, m);
    RVector c(m);
    for (Eigen::Index a = 0; a < m; ++a)
        c(a) = std::pow(1.0 - points[static_cast<std::size_t>(a)].norm2(), 0.5 * (n + 1));
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            out.gram(a, b) = c(a) * c(b) *
                             detail::kernel(points[static_cast<std::size_t>(b)].coords(),
                                            points[static_cast<std::size_t>(a)].coords(), n);
    const CMatrix& g = out.gram;

    // ||G - sum_k d_k g_k g_k^*||_F^2 = ||G||^2 - 2 b.d + d.H d with H_kl = |g_k^* g_l|^2, b_k = Re g_k^* G g_k.
    RMatrix h(m, m);
    RVector bvec(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        bvec(k) = (g.col(k).adjoint() * g * g.col(k)).value().real();
        for (Eigen::Index l = 0; l < m; ++l)
            h(k, l) = std::norm(g.col(k).dot(g.col(l)));
    }
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<RMatrix>(h).eigenvalues().maxCoeff();
    const double step = 1.0 / lipschitz;

    auto residual = [&](const RVector& d) {
        CMatrix approx = CMatrix::Zero(m, m);
        for (Eigen::Index k = 0; k < m; ++k)
            approx += d(k) * g.col(k) * g.col(k).adjoint();
        return (g - approx).norm();
    };

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    double best = std::numeric_limits<double>::infinity();
    RVector best_d = RVector::Zero(m);
    const int starts = std::max(1, restarts);
    for (int s = 0; s < starts; ++s) {
        RVector d(m);
        for (Eigen::Index k = 0; k < m; ++k)
            d(k) = s == 0 ? 1.0 : unif(gen);
        for (int it = 0; it < 20000; ++it) {
            const RVector next = (d - step * 2.0 * (h * d - bvec)).cwiseMax(0.0);
            const double change = (next - d).lpNorm<Eigen::Infinity>();
            d = next;
            if (change < 1e-15)
                break;
        }
        for (int sweep = 0; sweep < 500; ++sweep) {
            double change = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                if (!(h(k, k) > 0.0))
                    continue;
                const double rest = h.row(k).dot(d) - h(k, k) * d(k);
                const double v = std::max(0.0, (bvec(k) - rest) / h(k, k));
                change = std::max(change, std::abs(v - d(k)));
                d(k) = v;
            }
            if (change < 1e-16)
                break;
        }
        const double r = residual(d);
        if (r < best) {
            best = r;
            best_d = d;
        }
    }
    out.residual = best;
    out.best_diagonal = best_d;
    return out;
}

double toeplitz_cubed_bound(const OperatorMatrix& T, double kernel_tol, double min_gap_ratio)
{
    const SpectralProjection sp = spectral_projection(T, kernel_tol, min_gap_ratio);
    const double smallest = sp.report.values(static_cast<Eigen::Index>(sp.report.gap_index) - 1);
    return smallest * smallest;
}

void write_matrix_market(std::ostream& out, const OperatorMatrix& A)
{
    out << "%%MatrixMarket matrix array complex general\n";
    out << "% domain: " << A.domain().describe() << "\n";
    out << "% codomain: " << A.codomain().describe() << "\n";
    out << "% hermitian: " << (A.hermitian() ? "yes" : "no") << "\n";
    out << A.rows() << " " << A.cols() << "\n";
    char buf[96];
    for (Eigen::Index c = 0; c < A.cols(); ++c)
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            const Complex v = A.entries()(r, c);
            std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", v.real(), v.imag());
            out << buf;
        }
}

void write_matrix_market(const std::string& path, const OperatorMatrix& A)
{
    std::ofstream f(path);
    if (!f)
        throw Error("write_matrix_market: cannot open " + path);
    write_matrix_market(f, A);
}

} // namespace bergmanlab
