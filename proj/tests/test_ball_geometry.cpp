#include "bergmanlab/ball_geometry.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <random>

using namespace bergmanlab;

namespace {

BallPoint random_point(int n, double max_norm, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u;
    CVector v = oracle::uniform_ball(n, gen);
    return BallPoint(CVector(v / v.norm() * max_norm * u(gen)));
}

} // namespace

TEST_CASE("mobius_map fixed values")
{
    const BallPoint a{Complex(0.3, 0.1), Complex(-0.2, 0.4)};
    CHECK((mobius_map(a, BallPoint::origin(2)).coords() - a.coords()).norm() < 1e-15);
    CHECK(mobius_map(a, a).norm() < 1e-15);
    const BallPoint w{Complex(0.1, -0.5), Complex(0.2, 0.2)};
    CHECK((mobius_map(BallPoint::origin(2), w).coords() + w.coords()).norm() == 0.0);
}

TEST_CASE("mobius_map matches the projection formula and is an involution")
{
    std::mt19937_64 gen(7);
    for (int n : {1, 2, 3}) {
        for (int k = 0; k < 200; ++k) {
            const BallPoint a = random_point(n, 0.95, gen);
            const BallPoint w = random_point(n, 0.95, gen);
            const CVector fw = mobius_map(a, w).coords();
            CHECK((fw - oracle::mobius(a.coords(), w.coords())).norm() < 1e-12);
            CHECK((mobius_map(a, BallPoint(fw)).coords() - w.coords()).norm() < 1e-10);
        }
    }
}

TEST_CASE("identity for 1 - |phi_a(z)|^2")
{
    std::mt19937_64 gen(11);
    for (int k = 0; k < 500; ++k) {
        const BallPoint a = random_point(3, 0.95, gen);
        const BallPoint z = random_point(3, 0.95, gen);
        const double lhs = 1.0 - mobius_map(a, z).norm2();
        const double rhs = (1.0 - a.norm2()) * (1.0 - z.norm2()) / std::norm(1.0 - inner(z.coords(), a.coords()));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
    }
}

TEST_CASE("pseudo-hyperbolic and hyperbolic distances")
{
    const BallPoint z{Complex(0.2, 0.1), Complex(0.0, -0.3)};
    const BallPoint w{Complex(-0.4, 0.2), Complex(0.1, 0.1)};
    CHECK(pseudo_hyperbolic_distance(z, z) < 1e-15);
    CHECK(pseudo_hyperbolic_distance(BallPoint::origin(2), w) == doctest::Approx(w.norm()).epsilon(1e-15));
    CHECK(pseudo_hyperbolic_distance(z, w) == doctest::Approx(pseudo_hyperbolic_distance(w, z)).epsilon(1e-14));
    CHECK(hyperbolic_distance(z, z) < 1e-15);
    CHECK(hyperbolic_distance(BallPoint::origin(2), BallPoint{0.5, 0.0}) == doctest::Approx(0.549306144334).epsilon(1e-11));
    CHECK(std::tanh(hyperbolic_distance(z, w)) == doctest::Approx(pseudo_hyperbolic_distance(z, w)).epsilon(1e-14));

    std::mt19937_64 gen(3);
    for (int k = 0; k < 300; ++k) {
        const BallPoint a = random_point(2, 0.95, gen);
        const BallPoint p = random_point(2, 0.95, gen);
        const BallPoint q = random_point(2, 0.95, gen);
        const double rho = pseudo_hyperbolic_distance(p, q);
        CHECK(std::abs(pseudo_hyperbolic_distance(mobius_map(a, p), mobius_map(a, q)) - rho) < 1e-12);
        CHECK(std::abs(hyperbolic_distance(mobius_map(a, p), mobius_map(a, q)) - hyperbolic_distance(p, q)) < 1e-10);
        CHECK(rho == doctest::Approx(std::sqrt(1.0 - oracle::one_minus_rho2(p.coords(), q.coords()))).epsilon(1e-12));
    }
}

TEST_CASE("distance inputs on or outside the sphere are rejected")
{
    CHECK_THROWS_AS(BallPoint({1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(pseudo_hyperbolic_distance(BallPoint{0.1}, BallPoint{0.1, 0.0}), DomainError);
}

TEST_CASE("mobius_jacobian")
{
    const BallPoint w{Complex(0.3, 0.3), Complex(0.1, -0.2)};
    CHECK(mobius_jacobian(BallPoint::origin(2), w) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mobius_jacobian(w, w) == doctest::Approx(std::pow(1.0 - w.norm2(), -3)).epsilon(1e-13));

    // Change of variables: int g(phi_z(w)) J(z, w) dv(w) = int g dv, by a radial-angular Monte-Carlo-free grid in n = 1.
    const BallPoint z{Complex(0.4, 0.2)};
    auto g = [](const CVector& p) { return 1.0 + std::norm(p(0)) + p(0).real(); };
    double lhs = 0.0, rhs = 0.0;
    const int nr = 400, nt = 400;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) / nr;
        for (int j = 0; j < nt; ++j) {
            const double th = 2.0 * M_PI * (j + 0.5) / nt;
            const BallPoint p{std::polar(r, th)};
            const double wgt = 2.0 * r / (nr * nt);
            lhs += wgt * g(mobius_map(z, p).coords()) * mobius_jacobian(z, p);
            rhs += wgt * g(p.coords());
        }
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
}

TEST_CASE("hyperbolic ball ellipsoid")
{
    const double s = std::tanh(1.0);
    const HyperbolicBallShape at0 = hyperbolic_ball(BallPoint::origin(2), 1.0);
    CHECK(at0.center.norm() == 0.0);
    CHECK(at0.radius_parallel == doctest::Approx(s));
    CHECK(at0.radius_perp == doctest::Approx(s));

    const HyperbolicBallShape one = hyperbolic_ball(BallPoint{0.5}, 1.0);
    CHECK(one.center(0).real() == doctest::Approx(0.5 * (1 - s * s) / (1 - 0.25 * s * s)).epsilon(1e-14));
    CHECK(one.rho == doctest::Approx(0.75 / (1 - 0.25 * s * s)).epsilon(1e-14));

    CHECK(hyperbolic_ball_volume(BallPoint::origin(3), 1.0) == doctest::Approx(std::pow(s, 6)).epsilon(1e-14));
}

TEST_CASE("ellipsoid membership agrees with the metric")
{
    std::mt19937_64 gen(5);
    const double s = std::tanh(1.0);
    int compared = 0, agree = 0;
    for (int k = 0; k < 10000; ++k) {
        const BallPoint z = random_point(2, 0.9, gen);
        const HyperbolicBallShape shape = hyperbolic_ball(z, 1.0);
        const CVector w = oracle::uniform_ball(2, gen);
        const double rho2 = 1.0 - oracle::one_minus_rho2(z.coords(), w);
        if (std::abs(rho2 - s * s) < 1e-9 || std::abs(shape.level(w) - 1.0) < 1e-9)
            continue;
        ++compared;
        agree += shape.contains(w) == (rho2 < s * s);
    }
    CHECK(compared > 9900);
    CHECK(agree == compared);
}

TEST_CASE("hyperbolic ball volume against Monte Carlo")
{
    for (double x : {0.0, 0.5, 0.8}) {
        const BallPoint z{Complex(x, 0.0), Complex(0.0, 0.0)};
        const double mc = oracle::hyperbolic_ball_volume_mc(z.coords(), 1.0, 1000000, 17);
        CHECK(hyperbolic_ball_volume(z, 1.0) == doctest::Approx(mc).epsilon(0.01));
    }
    // comparable with (1 - |z|^2)^{n+1} as |z| -> 1
    for (double x : {0.9, 0.99, 0.999}) {
        const BallPoint z{x, 0.0};
        const double q = hyperbolic_ball_volume(z, 1.0) / std::pow(1 - x * x, 3);
        CHECK(q > 0.01);
        CHECK(q < 100.0);
    }
}
