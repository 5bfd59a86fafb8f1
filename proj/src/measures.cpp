#include "bergmanlab/measures.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

namespace bergmanlab {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

// Panels [0, h], [h, 2h], [2h, 4h], ... up to hi, each integrated by a fixed Gauss-Kronrod pair; the sum of
// the pairs' differences is the error estimate. Suited to integrands whose only feature is a peak or an
// integrable endpoint singularity of width ~h at the left end.
template <class F>
KernelIntegral graded_panels(F&& f, double h, double hi)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    KernelIntegral out;
    double lo = 0.0;
    double width = std::min(h, hi);
    while (lo < hi) {
        const double up = (hi - lo) < 1.5 * width ? hi : lo + width;
        double err = 0.0;
        out.value += GK::integrate(f, lo, up, 0, 0.0, &err);
        out.error_estimate += err;
        lo = up;
        width = lo;
    }
    return out;
}

void flag(KernelIntegral& r, const KernelIntegralOptions& opts, bool inner_warning)
{
    r.precision_warning =
        inner_warning || !std::isfinite(r.value) || !(r.error_estimate <= opts.warn_tol * std::abs(r.value));
}

// (1/2pi) int_0^{2pi} |1 - y e^{i theta}|^{-power} dtheta for 0 <= y < 1.
KernelIntegral circle_mean(double y, double power, const KernelIntegralOptions& opts)
{
    if (y == 0.0)
        return KernelIntegral{1.0, 0.0, false};
    auto f = [=](double theta) {
        const double h = std::sin(0.5 * theta);
        return std::pow((1.0 - y) * (1.0 - y) + 4.0 * y * h * h, -0.5 * power);
    };
    KernelIntegral r = graded_panels(f, 0.25 * (1.0 - y), std::numbers::pi);
    r.value /= std::numbers::pi;
    r.error_estimate /= std::numbers::pi;
    flag(r, opts, false);
    return r;
}

// Sphere average of |1 - <z, zeta>|^{-power} for |z| = x in C^n. After rotating z to x e_1,
// |zeta_1|^2 = 1 - s has density (n - 1) s^{n - 2} and the phase of zeta_1 is uniform.
KernelIntegral sphere_mean(int n, double x, double power, const KernelIntegralOptions& opts)
{
    if (n == 1 || x == 0.0)
        return circle_mean(x, power, opts);
    bool warn = false;
    double inner_rel = 0.0;
    auto f = [&](double s) {
        const KernelIntegral c = circle_mean(x * std::sqrt(1.0 - s), power, opts);
        warn = warn || c.precision_warning;
        inner_rel = std::max(inner_rel, c.error_estimate / c.value);
        return (n - 1) * std::pow(s, n - 2) * c.value;
    };
    KernelIntegral r = graded_panels(f, 0.25 * (1.0 - x), 1.0);
    r.error_estimate += inner_rel * std::abs(r.value);
    flag(r, opts, warn);
    return r;
}

} // namespace

void MeasureSpec::check(const BallPoint& p, double weight, const char* what)
{
    if (!(weight > 0.0) || !std::isfinite(weight))
        throw DomainError(std::string(what) + ": weights must be positive and finite");
    if (n_ == 0)
        n_ = p.dim();
    if (p.dim() != n_)
        throw DomainError(std::string(what) + ": point dimension differs from the measure's");
}

void MeasureSpec::add_atom(const BallPoint& p, double weight)
{
    check(p, weight, "MeasureSpec::add_atom");
    atoms_.push_back({p, weight});
    total_mass_ += weight;
}

void MeasureSpec::add_node(const BallPoint& p, double weight)
{
    check(p, weight, "MeasureSpec::add_node");
    if (variety_dim_)
        throw DomainError("MeasureSpec::add_node: variety measures need a volume weight per node");
    nodes_.push_back({p, weight});
    total_mass_ += weight;
}

void MeasureSpec::add_variety_node(const BallPoint& p, double weight, double volume_weight)
{
    check(p, weight, "MeasureSpec::add_variety_node");
    if (volume_weights_.size() != nodes_.size())
        throw DomainError("MeasureSpec::add_variety_node: cannot mix plain and variety nodes");
    nodes_.push_back({p, weight});
    volume_weights_.push_back(volume_weight);
    total_mass_ += weight;
}

CMatrix MeasureSpec::support_matrix() const
{
    CMatrix out(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(support_size()));
    Eigen::Index c = 0;
    for (const auto& a : atoms_)
        out.col(c++) = a.point.coords();
    for (const auto& a : nodes_)
        out.col(c++) = a.point.coords();
    return out;
}

RVector MeasureSpec::weight_vector() const
{
    RVector out(static_cast<Eigen::Index>(support_size()));
    Eigen::Index c = 0;
    for (const auto& a : atoms_)
        out(c++) = a.weight;
    for (const auto& a : nodes_)
        out(c++) = a.weight;
    return out;
}

MeasureSpec MeasureSpec::scaled(double factor) const
{
    if (!(factor > 0.0))
        throw DomainError("MeasureSpec::scaled: factor must be positive");
    MeasureSpec out = *this;
    out.total_mass_ = 0.0;
    for (auto& a : out.atoms_) {
        a.weight *= factor;
        out.total_mass_ += a.weight;
    }
    for (auto& a : out.nodes_) {
        a.weight *= factor;
        out.total_mass_ += a.weight;
    }
    return out;
}

std::uint64_t MeasureSpec::fingerprint() const
{
    std::uint64_t h = 14695981039346656037ULL;
    h = fnv1a(h, &n_, sizeof(n_));
    auto mix = [&](const std::vector<WeightedPoint>& pts) {
        const std::size_t count = pts.size();
        h = fnv1a(h, &count, sizeof(count));
        for (const auto& p : pts) {
            h = fnv1a(h, p.point.coords().data(), sizeof(Complex) * p.point.dim());
            h = fnv1a(h, &p.weight, sizeof(double));
        }
    };
    mix(atoms_);
    mix(nodes_);
    return h;
}

MeasureSpec volume_measure(const BallRule& rule)
{
    MeasureSpec mu(static_cast<std::size_t>(rule.dim));
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        if (rule.weights(i) > 0.0)
            mu.add_node(BallPoint(CVector(rule.nodes.col(i))), rule.weights(i));
    }
    return mu;
}

double berezin_transform(const MeasureSpec& mu, const BallPoint& z)
{
    if (!mu.empty() && z.dim() != mu.dim())
        throw DomainError("berezin_transform: dimension mismatch");
    const double p = static_cast<double>(z.dim()) + 1.0;
    const double num = std::pow(1.0 - z.norm2(), p);
    double sum = 0.0;
    auto add = [&](const WeightedPoint& a) {
        sum += a.weight * num / std::pow(std::norm(1.0 - inner(a.point.coords(), z.coords())), p);
    };
    for (const auto& a : mu.atoms())
        add(a);
    for (const auto& a : mu.nodes())
        add(a);
    return sum;
}

double berezin_sup(const MeasureSpec& mu, const std::vector<BallPoint>& grid)
{
    if (grid.empty())
        throw DomainError("berezin_sup: empty grid");
    double best = 0.0;
    for (const auto& z : grid)
        best = std::max(best, berezin_transform(mu, z));
    return best;
}

double ball_ratio(const MeasureSpec& mu, double r, const BallPoint& z)
{
    const HyperbolicBallShape shape = hyperbolic_ball(z, r);
    double mass = 0.0;
    for (const auto& a : mu.atoms())
        if (shape.contains(a.point.coords()))
            mass += a.weight;
    for (const auto& a : mu.nodes())
        if (shape.contains(a.point.coords()))
            mass += a.weight;
    return mass / hyperbolic_ball_volume(z, r);
}

double ball_ratio_sup(const MeasureSpec& mu, double r, const std::vector<BallPoint>& grid)
{
    if (grid.empty())
        throw DomainError("ball_ratio_sup: empty grid");
    double best = 0.0;
    for (const auto& z : grid)
        best = std::max(best, ball_ratio(mu, r, z));
    return best;
}

std::vector<BallPoint> radial_shell_grid(const std::vector<CVector>& directions, int max_shell)
{
    std::vector<BallPoint> grid;
    for (const auto& u : directions) {
        const double len = u.norm();
        if (!(len > 0.0))
            throw DomainError("radial_shell_grid: zero direction");
        for (int k = 1; k <= max_shell; ++k)
            grid.emplace_back(CVector((1.0 - std::ldexp(1.0, -k)) / len * u));
    }
    return grid;
}

OperatorMatrix toeplitz_from_measure(const MeasureSpec& mu, const MultiIndexBasis& basis)
{
    if (!mu.empty() && mu.dim() != static_cast<std::size_t>(basis.dim()))
        throw DomainError("toeplitz_from_measure: measure and basis dimensions differ");
    const auto size = static_cast<Eigen::Index>(basis.size());
    CMatrix t = CMatrix::Zero(size, size);
    // Rank-one accumulation, atoms then nodes, lower triangle only.
    auto add = [&](const WeightedPoint& a) {
        const CVector e = basis.evaluate_all(a.point.coords()).conjugate();
        t.selfadjointView<Eigen::Lower>().rankUpdate(e, a.weight);
    };
    for (const auto& a : mu.atoms())
        add(a);
    for (const auto& a : mu.nodes())
        add(a);
    CMatrix full = t.selfadjointView<Eigen::Lower>();
    const SpaceTag tag = SpaceTag::bergman(basis);
    return OperatorMatrix::on(std::move(full), tag, true);
}

CarlesonReport carleson_report(const MeasureSpec& mu, const std::vector<BallPoint>& grid, double r,
                               const MultiIndexBasis& basis)
{
    CarlesonReport rep;
    rep.berezin_sup = berezin_sup(mu, grid);
    rep.ratio_sup = ball_ratio_sup(mu, r, grid);
    rep.ratio_radius = r;
    rep.degree = basis.max_degree();
    const OperatorMatrix t = toeplitz_from_measure(mu, basis);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(t.entries(), Eigen::EigenvaluesOnly);
    rep.toeplitz_norm = std::max(0.0, solver.eigenvalues().maxCoeff());
    std::ostringstream desc;
    desc << grid.size() << " grid points, max |z| = ";
    double maxnorm = 0.0;
    for (const auto& z : grid)
        maxnorm = std::max(maxnorm, z.norm());
    desc << maxnorm;
    rep.grid_description = desc.str();
    return rep;
}

KernelIntegral eval_I_c(const BallPoint& z, double c, const KernelIntegralOptions& opts)
{
    const int n = static_cast<int>(z.dim());
    return sphere_mean(n, z.norm(), n + c, opts);
}

KernelIntegral eval_J_ct(const BallPoint& z, double c, double t, const KernelIntegralOptions& opts)
{
    if (!(t > -1.0))
        throw DomainError("eval_J_ct: t must exceed -1");
    const int n = static_cast<int>(z.dim());
    const double x = z.norm();
    const double power = n + 1.0 + t + c;
    // Polar coordinates with u = 1 - r^2: J = int_0^1 n (1 - u)^{n-1} u^t S(sqrt(1 - u) |z|) du, S the sphere
    // mean of |1 - <., zeta>|^{-power}. For t < 0 the substitution u = v^{1/(1+t)} absorbs u^t.
    const bool substitute = t < 0.0;
    const double exponent = substitute ? 1.0 / (1.0 + t) : t;
    bool warn = false;
    double inner_rel = 0.0;
    auto f = [&](double v) {
        const double u = substitute ? std::pow(v, exponent) : v;
        const KernelIntegral s = sphere_mean(n, std::sqrt(std::max(0.0, 1.0 - u)) * x, power, opts);
        warn = warn || s.precision_warning;
        inner_rel = std::max(inner_rel, s.error_estimate / std::abs(s.value));
        const double jac = substitute ? 1.0 / (1.0 + t) : std::pow(u, t);
        return n * std::pow(1.0 - u, n - 1) * jac * s.value;
    };
    // The integrand's feature sits where u is comparable to 1 - |z|^2; a non-smooth power of the
    // variable at 0 calls for a much finer first panel.
    const double feature = 0.25 * std::pow(1.0 - x * x, substitute ? 1.0 + t : 1.0);
    const bool smooth = exponent == std::floor(exponent);
    KernelIntegral out = graded_panels(f, feature * (smooth ? 1.0 : 1e-10), 1.0);
    out.error_estimate += inner_rel * std::abs(out.value);
    flag(out, opts, warn);
    return out;
}

KernelIntegral tail_kernel_integral(double t, double r, const BallPoint& z, const KernelIntegralOptions& opts)
{
    if (!(t > 0.0))
        throw DomainError("tail_kernel_mass: t must be positive");
    if (!(r > 0.0 && r < 1.0))
        throw DomainError("tail_kernel_mass: r must lie in (0, 1)");
    const int d = static_cast<int>(z.dim());
    const double x = z.norm();
    bool warn = false;
    double inner_rel = 0.0;
    // sigma = 1 - s runs over [0, 1 - r]; (1 - s^2)^t is singular at sigma = 0 for non-integer t.
    auto f = [&](double sigma) {
        const double s = 1.0 - sigma;
        const KernelIntegral m = sphere_mean(d, s * x, d + 1.0, opts);
        warn = warn || m.precision_warning;
        inner_rel = std::max(inner_rel, m.error_estimate / m.value);
        return 2.0 * d * std::pow(s, 2 * d - 1) * std::pow(sigma * (2.0 - sigma), t) * m.value;
    };
    const double scale = std::min(1.0 - x, 1.0 - r);
    KernelIntegral out = graded_panels(f, 0.25 * scale * (t == std::floor(t) ? 1.0 : 1e-10), 1.0 - r);
    out.error_estimate += inner_rel * std::abs(out.value);
    flag(out, opts, warn);
    return out;
}

double tail_kernel_mass(double t, double r, const std::vector<BallPoint>& grid, const KernelIntegralOptions& opts)
{
    if (grid.empty())
        throw DomainError("tail_kernel_mass: empty grid");
    double best = 0.0;
    for (const auto& z : grid)
        best = std::max(best, tail_kernel_integral(t, r, z, opts).value);
    return best;
}

double offdiag_kernel_mass(const MeasureSpec& mu, const BallPoint& z, double exclusion_r)
{
    if (!mu.variety_dim())
        throw DomainError("offdiag_kernel_mass: measure carries no variety volume weights");
    if (z.dim() != mu.dim())
        throw DomainError("offdiag_kernel_mass: dimension mismatch");
    if (exclusion_r < 0.0)
        throw DomainError("offdiag_kernel_mass: exclusion radius must be >= 0");
    const int n = static_cast<int>(mu.dim());
    const int d = *mu.variety_dim();
    const double half = 0.5 * (n - d);
    const double s = std::tanh(exclusion_r);
    const double inside_cut = 1.0 - s * s;  // w in D(z, R) iff 1 - rho^2 > 1 - s_R^2
    const double zfac = std::pow(1.0 - z.norm2(), half);
    double sum = 0.0;
    const auto& nodes = mu.nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const CVector& w = nodes[k].point.coords();
        if (exclusion_r > 0.0 && detail::one_minus_rho2(z.coords(), w) > inside_cut)
            continue;
        const double denom = std::pow(std::abs(1.0 - inner(z.coords(), w)), n + 1);
        sum += zfac * std::pow(1.0 - w.squaredNorm(), half) / denom * mu.volume_weights()[k];
    }
    return sum;
}

} // namespace bergmanlab
