#include "bergmanlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace bergmanlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Beta(1, b) density b (1 - u)^{b - 1} on [0, 1]; the rule's weights sum to 1.
GaussRule beta_one_rule(int order, int b)
{
    GaussRule rule = gauss_jacobi_unit(order, static_cast<double>(b - 1));
    rule.weights *= static_cast<double>(b);
    return rule;
}

RVector uniform_angles(int count)
{
    RVector theta(count);
    for (int j = 0; j < count; ++j)
        theta(j) = kTwoPi * static_cast<double>(j) / static_cast<double>(count);
    return theta;
}

// Odometer over a mixed-radix counter; returns false after the last state.
bool advance(std::vector<int>& counter, const std::vector<int>& radix)
{
    for (std::size_t i = 0; i < counter.size(); ++i) {
        if (++counter[i] < radix[i])
            return true;
        counter[i] = 0;
    }
    return false;
}

struct SphereRule {
    CMatrix nodes;
    RVector weights;
};

// Normalized surface measure on the unit sphere of C^n: (|zeta_1|^2, ..., |zeta_n|^2) is uniform on the
// simplex, sampled by stick-breaking, with independent uniform phases.
SphereRule sphere_rule(int n, int radial_order, int angular_order)
{
    std::vector<GaussRule> sticks;
    for (int k = 1; k < n; ++k)
        sticks.push_back(beta_one_rule(radial_order, n - k));
    const RVector theta = uniform_angles(angular_order);

    std::vector<int> radix;
    for (int k = 1; k < n; ++k)
        radix.push_back(radial_order);
    for (int k = 0; k < n; ++k)
        radix.push_back(angular_order);

    std::size_t count = 1;
    for (int r : radix)
        count *= static_cast<std::size_t>(r);

    SphereRule out;
    out.nodes.resize(n, static_cast<Eigen::Index>(count));
    out.weights.resize(static_cast<Eigen::Index>(count));
    std::vector<int> counter(radix.size(), 0);
    const double angle_weight = std::pow(1.0 / angular_order, n);
    std::size_t col = 0;
    do {
        double remaining = 1.0;
        double w = angle_weight;
        for (int k = 0; k < n; ++k) {
            double t;
            if (k < n - 1) {
                const double u = sticks[static_cast<std::size_t>(k)].nodes(counter[static_cast<std::size_t>(k)]);
                w *= sticks[static_cast<std::size_t>(k)].weights(counter[static_cast<std::size_t>(k)]);
                t = remaining * u;
                remaining *= 1.0 - u;
            } else {
                t = remaining;
            }
            const double phase = theta(counter[static_cast<std::size_t>(n - 1 + k)]);
            out.nodes(k, static_cast<Eigen::Index>(col)) = std::polar(std::sqrt(t), phase);
        }
        out.weights(static_cast<Eigen::Index>(col)) = w;
        ++col;
    } while (advance(counter, radix));
    return out;
}

BallRule product_rule(int n, int radial_order, int angular_order)
{
    std::vector<GaussRule> sticks;
    for (int k = 1; k <= n; ++k)
        sticks.push_back(beta_one_rule(radial_order, n + 1 - k));
    const RVector theta = uniform_angles(angular_order);

    std::vector<int> radix(static_cast<std::size_t>(n), radial_order);
    radix.insert(radix.end(), static_cast<std::size_t>(n), angular_order);
    std::size_t count = 1;
    for (int r : radix)
        count *= static_cast<std::size_t>(r);

    BallRule rule;
    rule.dim = n;
    rule.nodes.resize(n, static_cast<Eigen::Index>(count));
    rule.weights.resize(static_cast<Eigen::Index>(count));
    const double angle_weight = std::pow(1.0 / angular_order, n);
    std::vector<int> counter(radix.size(), 0);
    std::size_t col = 0;
    do {
        double remaining = 1.0;
        double w = angle_weight;
        for (int k = 0; k < n; ++k) {
            const auto& stick = sticks[static_cast<std::size_t>(k)];
            const double u = stick.nodes(counter[static_cast<std::size_t>(k)]);
            w *= stick.weights(counter[static_cast<std::size_t>(k)]);
            const double t = remaining * u;
            remaining *= 1.0 - u;
            const double phase = theta(counter[static_cast<std::size_t>(n + k)]);
            rule.nodes(k, static_cast<Eigen::Index>(col)) = std::polar(std::sqrt(t), phase);
        }
        rule.weights(static_cast<Eigen::Index>(col)) = w;
        ++col;
    } while (advance(counter, radix));
    return rule;
}

// Polar rule with Gauss-Legendre radial panels on [0, 1/2], [1 - 2^{-k}, 1 - 2^{-k-1}], ..., [1 - 2^{-K}, 1)
// and angular resolution that grows toward the sphere.
BallRule graded_rule(int n, const QuadratureScheme& scheme)
{
    std::vector<double> edges{0.0};
    for (int k = 1; k <= scheme.shells; ++k)
        edges.push_back(1.0 - std::ldexp(1.0, -k));
    edges.push_back(1.0);

    std::vector<CMatrix> node_blocks;
    std::vector<RVector> weight_blocks;
    Eigen::Index total = 0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const int level = static_cast<int>(p) + 1;
        const int angles = std::max(scheme.angular_order,
                                    static_cast<int>(std::ceil(scheme.angular_growth * std::ldexp(1.0, level))));
        const SphereRule sphere = sphere_rule(n, scheme.radial_order, angles);
        const GaussRule radial = gauss_legendre(scheme.radial_order, edges[p], edges[p + 1]);
        CMatrix nodes(n, radial.nodes.size() * sphere.weights.size());
        RVector weights(nodes.cols());
        Eigen::Index col = 0;
        for (Eigen::Index i = 0; i < radial.nodes.size(); ++i) {
            const double r = radial.nodes(i);
            const double density = 2.0 * n * std::pow(r, 2 * n - 1) * radial.weights(i);
            for (Eigen::Index j = 0; j < sphere.weights.size(); ++j) {
                nodes.col(col) = r * sphere.nodes.col(j);
                weights(col) = density * sphere.weights(j);
                ++col;
            }
        }
        total += col;
        node_blocks.push_back(std::move(nodes));
        weight_blocks.push_back(std::move(weights));
    }

    BallRule rule;
    rule.dim = n;
    rule.nodes.resize(n, total);
    rule.weights.resize(total);
    Eigen::Index offset = 0;
    for (std::size_t b = 0; b < node_blocks.size(); ++b) {
        const Eigen::Index c = node_blocks[b].cols();
        rule.nodes.middleCols(offset, c) = node_blocks[b];
        rule.weights.segment(offset, c) = weight_blocks[b];
        offset += c;
    }
    return rule;
}

BallRule monte_carlo_rule(int n, std::size_t samples, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    BallRule rule;
    rule.dim = n;
    rule.monte_carlo = true;
    rule.nodes.resize(n, static_cast<Eigen::Index>(samples));
    rule.weights = RVector::Constant(static_cast<Eigen::Index>(samples), 1.0 / static_cast<double>(samples));
    for (std::size_t s = 0; s < samples; ++s) {
        CVector g(n);
        for (int k = 0; k < n; ++k) {
            const double re = gauss(gen);
            const double im = gauss(gen);
            g(k) = Complex(re, im);
        }
        const double radius = std::pow(unif(gen), 1.0 / (2.0 * n));
        rule.nodes.col(static_cast<Eigen::Index>(s)) = (radius / g.norm()) * g;
    }
    return rule;
}

double beta_one_moment(int p, int b)
{
    // int_0^1 u^p b (1 - u)^{b - 1} du = p! b! / (p + b)!
    double v = 1.0;
    for (int j = 1; j <= p; ++j)
        v *= static_cast<double>(j) / static_cast<double>(b + j);
    return v;
}

} // namespace

GaussRule gauss_jacobi_unit(int order, double a)
{
    if (order < 1)
        throw DomainError("gauss_jacobi_unit: order must be >= 1");
    if (!(a > -1.0))
        throw DomainError("gauss_jacobi_unit: exponent must exceed -1");
    const double b = 0.0;
    RVector diag(order);
    RVector sub(std::max(order - 1, 1));
    for (int k = 0; k < order; ++k) {
        const double s = 2.0 * k + a + b;
        diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < order; ++k) {
        const double kk = static_cast<double>(k);
        const double s = 2.0 * kk + a + b;
        const double beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s * s * (s + 1.0) * (s - 1.0));
        sub(k - 1) = std::sqrt(beta);
    }
    const double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                std::lgamma(a + b + 2.0));

    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    if (order == 1) {
        rule.nodes(0) = diag(0);
        rule.weights(0) = mu0;
    } else {
        Eigen::SelfAdjointEigenSolver<RMatrix> solver;
        solver.computeFromTridiagonal(diag, sub.head(order - 1), Eigen::ComputeEigenvectors);
        rule.nodes = solver.eigenvalues();
        for (int k = 0; k < order; ++k) {
            const double v = solver.eigenvectors()(0, k);
            rule.weights(k) = mu0 * v * v;
        }
    }
    // [-1, 1] -> [0, 1]: u = (1 + x) / 2, (1 - u)^a = 2^{-a} (1 - x)^a, du = dx / 2.
    rule.nodes = (rule.nodes.array() + 1.0) * 0.5;
    rule.weights *= std::pow(2.0, -a - 1.0);
    return rule;
}

GaussRule gauss_legendre(int order, double lo, double hi)
{
    GaussRule rule = gauss_jacobi_unit(order, 0.0);
    rule.nodes = lo + (hi - lo) * rule.nodes.array();
    rule.weights *= (hi - lo);
    return rule;
}

QuadratureScheme QuadratureScheme::for_degree(int degree)
{
    QuadratureScheme s;
    s.kind = Kind::Product;
    s.radial_order = std::max(1, degree + 1);
    s.angular_order = 2 * std::max(0, degree) + 1;
    s.exact_degree = degree;
    return s;
}

std::string to_string(QuadratureScheme::Kind kind)
{
    switch (kind) {
    case QuadratureScheme::Kind::Product: return "product";
    case QuadratureScheme::Kind::Graded: return "graded";
    case QuadratureScheme::Kind::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

QuadratureScheme::Kind quadrature_kind_from_string(const std::string& name)
{
    if (name == "product")
        return QuadratureScheme::Kind::Product;
    if (name == "graded")
        return QuadratureScheme::Kind::Graded;
    if (name == "monte_carlo")
        return QuadratureScheme::Kind::MonteCarlo;
    throw ConfigError("unknown quadrature kind '" + name + "' (expected product, graded or monte_carlo)");
}

BallRule BallRule::scaled(double radius) const
{
    BallRule out = *this;
    out.nodes *= radius;
    out.weights *= std::pow(radius, 2 * dim);
    return out;
}

double ball_moment(const std::vector<int>& alpha)
{
    double v = 1.0;
    int count = static_cast<int>(alpha.size());
    for (int a : alpha)
        for (int j = 1; j <= a; ++j)
            v *= static_cast<double>(j) / static_cast<double>(++count);
    return v;
}

BallRule ball_quadrature(int n, const QuadratureScheme& scheme)
{
    if (n < 1)
        throw DomainError("ball_quadrature: dimension must be >= 1");
    BallRule rule;
    switch (scheme.kind) {
    case QuadratureScheme::Kind::Product:
        if (scheme.radial_order < 1 || scheme.angular_order < 1)
            throw DomainError("ball_quadrature: product rule needs positive radial and angular orders");
        rule = product_rule(n, scheme.radial_order, scheme.angular_order);
        break;
    case QuadratureScheme::Kind::Graded:
        if (scheme.radial_order < 1 || scheme.angular_order < 1 || scheme.shells < 0)
            throw DomainError("ball_quadrature: graded rule needs positive orders and shells >= 0");
        rule = graded_rule(n, scheme);
        break;
    case QuadratureScheme::Kind::MonteCarlo:
        if (scheme.samples < 1)
            throw DomainError("ball_quadrature: Monte Carlo needs at least one sample");
        rule = monte_carlo_rule(n, scheme.samples, scheme.seed);
        break;
    }
    if (scheme.exact_degree >= 0 && !rule.monte_carlo) {
        const auto report = check_exactness(rule, scheme, scheme.exact_degree);
        if (!report.ok) {
            std::ostringstream msg;
            msg << "ball_quadrature: rule is not exact to degree " << 2 * scheme.exact_degree
                << "; worst violated moment " << report.worst_moment << " (error " << report.worst_error << ")";
            throw QuadratureExactnessError(msg.str());
        }
    }
    return rule;
}

ExactnessReport check_exactness(const BallRule& rule, const QuadratureScheme& scheme, int degree, double tol)
{
    ExactnessReport report;
    if (rule.monte_carlo) {
        report.worst_moment = "monte-carlo rule: no exactness contract";
        return report;
    }
    const int n = rule.dim;
    const int top = 2 * degree;
    auto record = [&](double err, const std::string& label) {
        if (err > report.worst_error) {
            report.worst_error = err;
            report.worst_moment = label;
        }
    };

    // Product rules factor, so the one-dimensional factors carry the whole contract.
    if (scheme.kind == QuadratureScheme::Kind::Product) {
        for (int k = 1; k <= n; ++k) {
            const int b = n + 1 - k;
            const GaussRule stick = beta_one_rule(scheme.radial_order, b);
            for (int p = 0; p <= top; ++p) {
                const double approx = stick.weights.dot(stick.nodes.array().pow(p).matrix());
                const double err = std::abs(approx - beta_one_moment(p, b));
                std::ostringstream label;
                label << "|z_" << k << "|^" << 2 * p << " (radial factor " << k << ")";
                record(err, label.str());
            }
        }
        const int m = scheme.angular_order;
        for (int q = 1; q <= top; ++q) {
            Complex s = 0.0;
            for (int j = 0; j < m; ++j)
                s += std::polar(1.0, kTwoPi * q * j / m);
            std::ostringstream label;
            label << "z_k^" << q << " (angular frequency " << q << ")";
            record(std::abs(s) / m, label.str());
        }
    }

    // Direct checks on the assembled rule: pure radial moments and single-coordinate phases.
    for (int k = 0; k < n; ++k) {
        std::vector<double> radial(static_cast<std::size_t>(top + 1), 0.0);
        std::vector<Complex> phase(static_cast<std::size_t>(top + 1), 0.0);
        for (Eigen::Index c = 0; c < rule.nodes.cols(); ++c) {
            const Complex z = rule.nodes(k, c);
            const double m2 = std::norm(z);
            double rp = rule.weights(c);
            Complex zp = rule.weights(c);
            for (int p = 0; p <= top; ++p) {
                radial[static_cast<std::size_t>(p)] += rp;
                phase[static_cast<std::size_t>(p)] += zp;
                rp *= m2;
                zp *= z;
            }
        }
        for (int p = 0; p <= top; ++p) {
            std::vector<int> alpha(static_cast<std::size_t>(n), 0);
            alpha[static_cast<std::size_t>(k)] = p;
            std::ostringstream label;
            label << "|z_" << k + 1 << "|^" << 2 * p;
            record(std::abs(radial[static_cast<std::size_t>(p)] - ball_moment(alpha)), label.str());
        }
        for (int q = 1; q <= top; ++q) {
            std::ostringstream label;
            label << "z_" << k + 1 << "^" << q;
            record(std::abs(phase[static_cast<std::size_t>(q)]), label.str());
        }
    }
    report.ok = report.worst_error <= tol;
    return report;
}

} // namespace bergmanlab
