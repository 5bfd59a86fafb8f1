#include "bergmanlab/operators.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <random>
#include <sstream>

using namespace bergmanlab;

namespace {

MeasureSpec hyperplane(int D)
{
    AffineSlice s;
    s.basepoint = CVector::Zero(2);
    s.frame = CMatrix::Identity(2, 1);
    return variety_quadrature(s, 0.0, QuadratureScheme::for_degree(D + 1)).measure.scaled(2.0);
}

CMatrix pattern(const MultiIndexBasis& b)
{
    CMatrix q = CMatrix::Zero(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t k = 0; k < b.size(); ++k)
        if (b.index(k).exponents[1] == 0)
            q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
    return q;
}

CVector random_vector(Eigen::Index size, std::mt19937_64& gen)
{
    std::normal_distribution<double> g;
    CVector f(size);
    for (Eigen::Index k = 0; k < size; ++k) {
        const double re = g(gen);
        const double im = g(gen);
        f(k) = Complex(re, im);
    }
    return f;
}

MeasureSpec random_atoms(int count, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    MeasureSpec mu(2);
    for (int k = 0; k < count; ++k) {
        const BallPoint p(CVector(0.8 * oracle::uniform_ball(2, gen)));
        mu.add_atom(p, std::pow(1 - p.norm2(), 3));
    }
    return mu;
}

} // namespace

TEST_CASE("restriction matrix")
{
    const MultiIndexBasis b(2, 4);
    MeasureSpec unit(2);
    unit.add_atom(BallPoint::origin(2), 1.0);
    const OperatorMatrix r0 = restriction_matrix(b, unit);
    REQUIRE(r0.rows() == 1);
    CHECK(std::abs(r0.entries()(0, 0) - 1.0) < 1e-15);
    CHECK(r0.entries().rightCols(r0.cols() - 1).cwiseAbs().maxCoeff() == 0.0);

    const MeasureSpec mu = random_atoms(7, 3);
    const OperatorMatrix R = restriction_matrix(b, mu);
    std::mt19937_64 gen(1);
    const CVector f = random_vector(R.cols(), gen);
    double direct = 0.0;
    for (const auto& a : mu.atoms())
        direct += a.weight * std::norm(evaluate(b, f, a.point));
    CHECK((R.entries() * f).squaredNorm() == doctest::Approx(direct).epsilon(1e-12));
    CHECK(max_abs((R.adjoint() * R).entries() - toeplitz_from_measure(mu, b).entries()) < 1e-10);
}

TEST_CASE("operator tags are enforced")
{
    const MultiIndexBasis b4(2, 4), b5(2, 5);
    const OperatorMatrix a = OperatorMatrix::on(CMatrix::Identity(15, 15), SpaceTag::bergman(b4));
    const OperatorMatrix c = OperatorMatrix::on(CMatrix::Identity(21, 21), SpaceTag::bergman(b5));
    CHECK_THROWS_AS(a * c, DomainError);
    CHECK_THROWS_AS(a + c, DomainError);
    CHECK_THROWS_AS(OperatorMatrix::on(CMatrix::Identity(14, 14), SpaceTag::bergman(b4)), DomainError);
    CMatrix nh = CMatrix::Identity(15, 15);
    nh(0, 1) = 1.0;
    CHECK_THROWS_AS(OperatorMatrix::on(nh, SpaceTag::bergman(b4), true), DomainError);
}

TEST_CASE("spectral projection of simple operators")
{
    const MultiIndexBasis b(2, 3);
    const SpaceTag tag = SpaceTag::bergman(b);
    const auto N = static_cast<Eigen::Index>(b.size());
    const SpectralProjection id = spectral_projection(OperatorMatrix::on(CMatrix::Identity(N, N), tag, true));
    CHECK(max_abs(id.Q.entries() - CMatrix::Identity(N, N)) < 1e-14);
    CHECK(max_abs(id.P.entries()) < 1e-14);

    MeasureSpec atom(2);
    const BallPoint a{0.3, Complex(0.0, 0.2)};
    atom.add_atom(a, std::pow(1 - a.norm2(), 3));
    const OperatorMatrix T = toeplitz_from_measure(atom, b);
    const SpectralProjection sp = spectral_projection(T);
    const CVector k = truncated_kernel_coefficients(b, a).normalized();
    CHECK(max_abs(sp.Q.entries() - k * k.adjoint()) < 1e-10);
    CHECK(sp.report.kernel_dimension == b.size() - 1);

    RVector geometric(N);
    for (Eigen::Index i = 0; i < N; ++i)
        geometric(i) = std::pow(0.2, static_cast<double>(i));
    CHECK_THROWS_AS(spectral_projection(OperatorMatrix::on(geometric.cast<Complex>().asDiagonal(), tag, true)),
                    NoSpectralGap);
}

TEST_CASE("hyperplane measure gives the monomial projection")
{
    const int D = 8;
    const MultiIndexBasis b(2, D);
    const OperatorMatrix T = toeplitz_from_measure(hyperplane(D), b);
    CHECK(max_abs(T.entries() - pattern(b)) < 1e-6);
    const SpectralProjection sp = spectral_projection(T);
    CHECK(max_abs(sp.Q.entries() - pattern(b)) < 1e-6);
    const auto N = static_cast<Eigen::Index>(b.size());
    const CMatrix& Q = sp.Q.entries();
    const CMatrix& P = sp.P.entries();
    CHECK(max_abs(Q * Q - Q) < 1e-10);
    CHECK(max_abs(P + Q - CMatrix::Identity(N, N)) < 1e-10);
    CHECK(max_abs(P * Q) < 1e-10);
    const double lmax = sp.report.values(0);
    CHECK((T.entries() * P).norm() <= kDefaultKernelTol * lmax * (1 + 1e-6));
    CHECK(sp.report.gap_ratio > 1e4);
    CHECK(toeplitz_cubed_bound(T) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("toeplitz cubed bound")
{
    const MultiIndexBasis b(1, 2);
    const SpaceTag tag = SpaceTag::bergman(b);
    CMatrix proj = CMatrix::Zero(3, 3);
    proj(1, 1) = 1.0;
    CHECK(toeplitz_cubed_bound(OperatorMatrix::on(proj, tag, true)) == doctest::Approx(1.0));
    RVector d(3);
    d << 0.0, 0.5, 1.0;
    CHECK(toeplitz_cubed_bound(OperatorMatrix::on(d.cast<Complex>().asDiagonal(), tag, true)) == doctest::Approx(0.25));

    // atomic measures: T^3 >= c T with c the squared smallest nonzero eigenvalue
    const MeasureSpec mu = random_atoms(4, 12);
    for (int D : {3, 5, 7}) {
        const OperatorMatrix T = toeplitz_from_measure(mu, MultiIndexBasis(2, D));
        const double c = toeplitz_cubed_bound(T);
        const CMatrix diff = T.entries() * T.entries() * T.entries() - c * T.entries();
        CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (diff + diff.adjoint())).eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("extension operator")
{
    const MultiIndexBasis b(2, 4);
    MeasureSpec atom(2);
    const BallPoint a{Complex(0.2, 0.1), 0.3};
    const double w = std::pow(1 - a.norm2(), 3);
    atom.add_atom(a, w);
    const OperatorMatrix R = restriction_matrix(b, atom);
    const SpectralProjection sp = spectral_projection(toeplitz_from_measure(atom, b));
    const Extension ext = extension_operator(R, sp.Q);
    const CVector ka = truncated_kernel_coefficients(b, a);
    CHECK(max_abs(ext.E.entries().col(0) - ka / (std::sqrt(w) * ka.squaredNorm())) < 1e-10);
    CHECK(std::abs((R * ext.E).entries()(0, 0) - 1.0) < 1e-10);

    for (int D : {6, 8}) {
        const MultiIndexBasis bb(2, D);
        const MeasureSpec rho = hyperplane(D);
        const OperatorMatrix RR = restriction_matrix(bb, rho);
        const SpectralProjection s = spectral_projection(toeplitz_from_measure(rho, bb));
        const Extension e = extension_operator(RR, s.Q);
        const CMatrix re = (RR * e.E).entries();
        CHECK(max_abs(re - re.adjoint()) < 1e-8);
        CHECK(max_abs(re * re - re) < 1e-8);
        std::mt19937_64 gen(static_cast<std::uint64_t>(D));
        const CVector f = s.Q.entries() * random_vector(s.Q.cols(), gen);
        CHECK(((e.E * RR).entries() * f - f).norm() < 1e-8 * f.norm());
        CHECK(e.norm == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("multipliers and compressions")
{
    const MultiIndexBasis b(2, 5);
    const OperatorMatrix M = multiplier_matrix(0, b);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const MultiIndex& al = b.index(k);
        if (al.degree() == 5)
            continue;
        MultiIndex up = al;
        up.exponents[0] += 1;
        const auto row = static_cast<Eigen::Index>(*b.position(up));
        const double expect = std::sqrt((al.exponents[0] + 1.0) / (2 + al.degree() + 1.0));
        CHECK(std::abs(M.entries()(row, static_cast<Eigen::Index>(k)) - expect) < 1e-14);
    }
    const auto N = static_cast<Eigen::Index>(b.size());
    const OperatorMatrix I = OperatorMatrix::on(CMatrix::Identity(N, N), SpaceTag::bergman(b), true);
    CHECK(max_abs(compressed_multiplier(0, I, b).entries() - M.entries()) == 0.0);

    // hyperplane quotient: S_1 acts on (k, 0) as the weighted shift with weights sqrt((k+1)/(k+3))
    const OperatorMatrix T = toeplitz_from_measure(hyperplane(5), b);
    const SpectralProjection sp = spectral_projection(T);
    const OperatorMatrix S = compressed_multiplier(0, sp.Q, b);
    for (int k = 0; k < 5; ++k) {
        const auto from = static_cast<Eigen::Index>(*b.position({{k, 0}}));
        const auto to = static_cast<Eigen::Index>(*b.position({{k + 1, 0}}));
        CHECK(std::abs(S.entries()(to, from) - oracle::weighted_shift_weight(k, 1)) < 1e-8);
    }
    CVector one = CVector::Zero(N);
    one(0) = 1.0;
    CHECK(((S.entries() * one) - sp.Q.entries() * (M.entries() * one)).norm() < 1e-14);
    CHECK(max_abs(commutator(S, S).entries()) == 0.0);
}

TEST_CASE("commutators of shifts")
{
    const int D = 10;
    const MultiIndexBasis b(1, D);
    const OperatorMatrix S = multiplier_matrix(0, b);
    const OperatorMatrix c = degree_block(S.adjoint() * S - S * S.adjoint(), b, D - 1);
    for (int k = 0; k < D; ++k) {
        const double wk = (k + 1.0) / (k + 2.0);
        const double wprev = k == 0 ? 0.0 : k / (k + 1.0);
        CHECK(std::abs(c.entries()(k, k) - (wk - wprev)) < 1e-14);
        CHECK(c.entries()(k, k).real() > 0.0);
    }

    const MultiIndexBasis b2(2, 12);
    const SpectralProjection sp = spectral_projection(toeplitz_from_measure(hyperplane(12), b2));
    const OperatorMatrix S2 = compressed_multiplier(0, sp.Q, b2);
    const SpectralReport rep = schatten_partial_sums(degree_block(S2.adjoint() * S2 - S2 * S2.adjoint(), b2, 11), {3.0});
    std::vector<double> expect = oracle::hyperplane_commutator_values(2, 12);
    std::sort(expect.rbegin(), expect.rend());
    for (std::size_t k = 0; k < expect.size(); ++k)
        CHECK(std::abs(rep.values(static_cast<Eigen::Index>(k)) - expect[k]) < 1e-8);
}

TEST_CASE("schatten partial sums")
{
    const MultiIndexBasis b(1, 4);
    CMatrix r1 = CMatrix::Zero(5, 5);
    r1(0, 0) = 2.0;
    const SpectralReport rep = schatten_partial_sums(OperatorMatrix::on(r1, SpaceTag::bergman(b)), {1.0, 3.0});
    CHECK(rep.schatten_partial_sums.at(3.0) == doctest::Approx(8.0));
    CHECK(rep.schatten_partial_sums.at(1.0) == doctest::Approx(2.0));

    const MultiIndexBasis big(1, 999);
    RVector d(1000);
    for (Eigen::Index k = 0; k < d.size(); ++k)
        d(k) = 1.0 / std::pow(static_cast<double>(k + 1), 2);
    const double s = schatten_partial_sums(OperatorMatrix::on(d.cast<Complex>().asDiagonal(), SpaceTag::bergman(big)), {1.0})
                         .schatten_partial_sums.at(1.0);
    CHECK(s == doctest::Approx(M_PI * M_PI / 6 - 1.0 / 1000).epsilon(1e-6));
}

TEST_CASE("schatten kernel integrals")
{
    AffineSlice sl;
    sl.basepoint = CVector::Zero(2);
    sl.frame = CMatrix::Identity(2, 1);
    FinitePoints fp;
    fp.points = {BallPoint{0.3, 0.1}};
    const VarietyMeasure single = variety_quadrature(fp, 0.0, QuadratureScheme::for_degree(2));
    CHECK(schatten_kernel_integral(single, 0, 0, 3.0).integral == 0.0);
    const MultiIndexBasis b(2, 3);
    CHECK(max_abs(sample_space_commutator(single.measure, b, 0).entries()) == 0.0);

    auto graded = [&](int shells) {
        QuadratureScheme q;
        q.kind = QuadratureScheme::Kind::Graded;
        q.radial_order = 8;
        q.angular_order = 16;
        q.angular_growth = 0.0;
        q.shells = shells;
        return variety_quadrature(sl, 0.0, q);
    };
    const double a12 = schatten_kernel_integral(graded(12), 0, 0, 3.0, false).bound_integral;
    const double a14 = schatten_kernel_integral(graded(14), 0, 0, 3.0, false).bound_integral;
    CHECK(std::abs(a14 - a12) < 0.02 * a12);
    const double b10 = schatten_kernel_integral(graded(10), 0, 0, 2.0, false).bound_integral;
    const double b12 = schatten_kernel_integral(graded(12), 0, 0, 2.0, false).bound_integral;
    CHECK(b12 - b10 == doctest::Approx(2 * std::log(2.0)).epsilon(0.05));

    // closed-form and truncated kernels agree on atoms well inside the ball
    MeasureSpec inner_atoms(2);
    for (int k = 0; k < 5; ++k)
        inner_atoms.add_atom(BallPoint{std::polar(0.4, 1.3 * k), Complex(0.1 * k - 0.2, 0.0)}, 0.2);
    const CMatrix closed = sample_space_toeplitz(inner_atoms, MultiIndexBasis(2, 10), KernelMode::ClosedForm).entries();
    const CMatrix trunc = sample_space_toeplitz(inner_atoms, MultiIndexBasis(2, 10), KernelMode::Truncated).entries();
    CHECK(max_abs(closed - closed.adjoint()) < 1e-14);
    CHECK(max_abs(closed - trunc) < 1e-8 * max_abs(closed));
}

TEST_CASE("gram criterion")
{
    const GramCriterion one = gram_criterion({BallPoint{0.4, Complex(0.1, 0.3)}});
    CHECK(one.residual < 1e-12);
    CHECK(one.best_diagonal(0) == doctest::Approx(1.0));

    const GramCriterion two = gram_criterion({BallPoint::origin(2), BallPoint{0.5, 0.0}});
    CHECK(two.residual > 0.2);
    CHECK(two.best_diagonal.minCoeff() >= 0.0);

    double prev = 1e300;
    for (double x : {0.5, 0.9, 0.99}) {
        const double r = gram_criterion({BallPoint{-x, 0.0}, BallPoint{x, 0.0}}).residual;
        CHECK(r < prev);
        prev = r;
    }
    CHECK_THROWS_AS(gram_criterion({BallPoint{0.1, 0.0}, BallPoint{0.1, 0.0}}), DomainError);
}

TEST_CASE("matrix market export")
{
    const MultiIndexBasis b(2, 1);
    CMatrix m = CMatrix::Identity(3, 3);
    m(1, 2) = Complex(0.5, -0.25);
    std::ostringstream out;
    write_matrix_market(out, OperatorMatrix::on(m, SpaceTag::bergman(b)));
    const std::string s = out.str();
    CHECK(s.rfind("%%MatrixMarket matrix array complex general", 0) == 0);
    CHECK(s.find("% domain") != std::string::npos);
    CHECK(s.find("3 3") != std::string::npos);
    CHECK(s.find("0.5 -0.25") != std::string::npos);
}
