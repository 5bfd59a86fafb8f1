#include "bergmanlab/varieties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bergmanlab {

namespace {

constexpr double kDropGuard = 1e-10;
constexpr double kGraphResidualTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// All size-k subsets of {first, ..., last - 1} in lexicographic order.
void subsets(int first, int last, int k, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = first; i < last; ++i) {
        cur.push_back(i);
        subsets(i + 1, last, k, cur, out);
        cur.pop_back();
    }
}

} // namespace

Polynomial& Polynomial::add(std::vector<int> exponents, Complex coeff)
{
    if (static_cast<int>(exponents.size()) != nvars)
        throw DomainError("Polynomial::add: exponent tuple has the wrong length");
    for (int e : exponents)
        if (e < 0)
            throw DomainError("Polynomial::add: negative exponent");
    terms.push_back({std::move(exponents), coeff});
    return *this;
}

Complex Polynomial::operator()(const CVector& w) const
{
    if (w.size() != nvars)
        throw DomainError("Polynomial: argument has the wrong dimension");
    Complex sum = 0.0;
    for (const auto& t : terms) {
        Complex v = t.coeff;
        for (int i = 0; i < nvars; ++i)
            v *= detail::ipow(w(i), t.exponents[static_cast<std::size_t>(i)]);
        sum += v;
    }
    return sum;
}

CVector Polynomial::gradient(const CVector& w) const
{
    if (w.size() != nvars)
        throw DomainError("Polynomial: argument has the wrong dimension");
    CVector g = CVector::Zero(nvars);
    for (const auto& t : terms) {
        for (int k = 0; k < nvars; ++k) {
            const int ek = t.exponents[static_cast<std::size_t>(k)];
            if (ek == 0)
                continue;
            Complex v = t.coeff * static_cast<double>(ek);
            for (int i = 0; i < nvars; ++i) {
                const int e = t.exponents[static_cast<std::size_t>(i)] - (i == k ? 1 : 0);
                v *= detail::ipow(w(i), e);
            }
            g(k) += v;
        }
    }
    return g;
}

int Polynomial::degree() const
{
    int best = 0;
    for (const auto& t : terms)
        best = std::max(best, std::accumulate(t.exponents.begin(), t.exponents.end(), 0));
    return best;
}

CVector AffineSlice::center() const { return basepoint - frame * (frame.adjoint() * basepoint); }

double AffineSlice::radius() const
{
    const double c2 = center().squaredNorm();
    if (!(c2 < 1.0))
        throw DomainError("AffineSlice: slice misses the ball");
    return std::sqrt(1.0 - c2);
}

PolynomialGraph::PolynomialGraph(int n_, int d_, std::vector<Polynomial> comps, CMatrix u)
    : n(n_), d(d_), components(std::move(comps)), frame(std::move(u))
{
    if (d < 1 || d >= n)
        throw DomainError("PolynomialGraph: need 1 <= d < n");
    if (static_cast<int>(components.size()) != n - d)
        throw DomainError("PolynomialGraph: need n - d component polynomials");
    for (const auto& p : components)
        if (p.nvars != d)
            throw DomainError("PolynomialGraph: components must be polynomials in d variables");
    if (frame.size() == 0)
        frame = CMatrix::Identity(n, n);
    if (frame.rows() != n || frame.cols() != n)
        throw DomainError("PolynomialGraph: frame must be n x n");
    if ((frame.adjoint() * frame - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
        throw DomainError("PolynomialGraph: frame is not unitary");
}

CVector PolynomialGraph::point(const CVector& param) const
{
    if (param.size() != d)
        throw DomainError("PolynomialGraph::point: parameter has the wrong dimension");
    CVector local(n);
    local.head(d) = param;
    for (int j = 0; j < n - d; ++j)
        local(d + j) = components[static_cast<std::size_t>(j)](param);
    return frame * local;
}

CMatrix PolynomialGraph::jacobian(const CVector& param) const
{
    CMatrix j(n - d, d);
    for (int k = 0; k < n - d; ++k)
        j.row(k) = components[static_cast<std::size_t>(k)].gradient(param).transpose();
    if (!j.allFinite())
        throw DomainError("PolynomialGraph: non-finite Jacobian");
    return j;
}

CMatrix PolynomialGraph::embedding_derivative(const CVector& param) const
{
    CMatrix local(n, d);
    local.topRows(d) = CMatrix::Identity(d, d);
    local.bottomRows(n - d) = jacobian(param);
    return frame * local;
}

CVector PolynomialGraph::parameter_of(const CVector& w) const { return (frame.adjoint() * w).head(d); }

double PolynomialGraph::residual(const CVector& w) const
{
    const CVector local = frame.adjoint() * w;
    double worst = 0.0;
    for (int j = 0; j < n - d; ++j)
        worst = std::max(worst, std::abs(local(d + j) - components[static_cast<std::size_t>(j)](local.head(d))));
    return worst;
}

int variety_dim(const VarietySpec& v)
{
    return std::visit(overloaded{[](const AffineSlice& s) { return s.d(); },
                                 [](const PolynomialGraph& g) { return g.d; },
                                 [](const FinitePoints&) { return 0; }},
                      v);
}

int ambient_dim(const VarietySpec& v)
{
    return std::visit(
        overloaded{[](const AffineSlice& s) { return s.n(); }, [](const PolynomialGraph& g) { return g.n; },
                   [](const FinitePoints& f) {
                       if (f.points.empty())
                           throw DomainError("FinitePoints: empty point set");
                       return static_cast<int>(f.points.front().dim());
                   }},
        v);
}

double volume_density(const VarietySpec& v, const CVector& param)
{
    return std::visit(overloaded{[](const AffineSlice&) { return 1.0; },
                                 [&](const PolynomialGraph& g) {
                                     const CMatrix j = g.jacobian(param);
                                     const CMatrix metric = CMatrix::Identity(g.d, g.d) + j.adjoint() * j;
                                     return metric.determinant().real();
                                 },
                                 [](const FinitePoints&) -> double {
                                     throw DomainError("volume_density: finite point sets have no density");
                                 }},
                      v);
}

VarietyMeasure variety_quadrature(const VarietySpec& v, double s, const QuadratureScheme& scheme,
                                  const std::vector<BallPoint>& singular_points)
{
    if (!(s >= 0.0 && s < 1.0))
        throw DomainError("variety_quadrature: cutoff s must lie in [0, 1)");
    const int n = ambient_dim(v);
    const int d = variety_dim(v);

    VarietyMeasure out;
    out.d = d;
    out.s = s;
    out.measure = MeasureSpec(static_cast<std::size_t>(n));

    auto add_atoms = [&](const std::vector<BallPoint>& pts) {
        for (const auto& p : pts) {
            if (static_cast<int>(p.dim()) != n)
                throw DomainError("variety_quadrature: atom dimension differs from the variety's");
            out.measure.add_atom(p, std::pow(1.0 - p.norm2(), n + 1));
            out.atom_points.push_back(p);
        }
    };

    if (const auto* f = std::get_if<FinitePoints>(&v)) {
        if (f->points.empty())
            throw DomainError("variety_quadrature: empty point set");
        add_atoms(f->points);
        add_atoms(singular_points);
        return out;
    }

    out.measure.set_variety_dim(d);
    const BallRule unit = ball_quadrature(d, scheme);
    const auto* slice = std::get_if<AffineSlice>(&v);
    const auto* graph = std::get_if<PolynomialGraph>(&v);
    const BallRule rule = slice ? unit.scaled(slice->radius()) : unit;

    for (std::size_t k = 0; k < rule.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const CVector param = rule.nodes.col(col);
        const double qw = rule.weights(col);
        if (!(qw > 0.0))
            continue;
        CVector w;
        double density = 1.0;
        if (slice) {
            w = slice->point(param);
        } else {
            w = graph->point(param);
            density = volume_density(v, param);
        }
        if (!w.allFinite())
            throw DomainError("variety_quadrature: non-finite node");
        const double norm = w.norm();
        if (norm >= 1.0 - kDropGuard) {
            out.dropped_mass += qw * density;
            continue;
        }
        if (norm < s)
            continue;
        if (graph && graph->residual(w) > kGraphResidualTol)
            throw DomainError("variety_quadrature: node violates the graph equation");
        const double volume_weight = qw * density;
        out.measure.add_variety_node(BallPoint(w), volume_weight * std::pow(1.0 - norm * norm, n - d),
                                     volume_weight);
        out.parameters.push_back(param);
    }
    if (out.measure.nodes().empty())
        throw DomainError("variety_quadrature: no quadrature node survives the cutoff");
    add_atoms(singular_points);
    return out;
}

BallPoint graph_point_with_norm(const PolynomialGraph& g, const CVector& direction, double target_norm)
{
    if (!(target_norm > 0.0 && target_norm < 1.0))
        throw DomainError("graph_point_with_norm: target norm must lie in (0, 1)");
    const double len = direction.norm();
    if (!(len > 0.0) || direction.size() != g.d)
        throw DomainError("graph_point_with_norm: bad parameter direction");
    const CVector u = direction / len;
    auto norm_at = [&](double t) { return g.point(t * u).norm(); };
    double lo = 0.0;
    double hi = 1.0;
    if (norm_at(1.0 - 1e-15) < target_norm)
        throw DomainError("graph_point_with_norm: the ray never reaches the requested norm");
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        (norm_at(mid) < target_norm ? lo : hi) = mid;
    }
    return BallPoint(g.point(0.5 * (lo + hi) * u));
}

AdaptedFrame adapted_frame(const PolynomialGraph& g, const BallPoint& z)
{
    const int n = g.n;
    const int d = g.d;
    if (static_cast<int>(z.dim()) != n)
        throw DomainError("adapted_frame: dimension mismatch");
    if (z.norm() < 1e-12)
        throw DomainError("adapted_frame: z must be nonzero");
    if (g.residual(z.coords()) > 1e-10)
        throw DomainError("adapted_frame: z is not on the graph");

    // Gram-Schmidt seeded with z, then the standard basis vector with the largest residual (lowest index on ties).
    CMatrix basis(n, n);
    basis.col(0) = z.coords() / z.norm();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int col = 1; col < n; ++col) {
        int best = -1;
        double best_res = -1.0;
        CVector best_vec;
        for (int k = 0; k < n; ++k) {
            if (used[static_cast<std::size_t>(k)])
                continue;
            CVector e = CVector::Zero(n);
            e(k) = 1.0;
            const CVector r = e - basis.leftCols(col) * (basis.leftCols(col).adjoint() * e);
            if (r.norm() > best_res + 1e-14) {
                best_res = r.norm();
                best = k;
                best_vec = r;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        basis.col(col) = best_vec / best_vec.norm();
    }

    const CVector zp = g.parameter_of(z.coords());
    const CMatrix dw = g.embedding_derivative(zp);
    std::vector<std::vector<int>> choices;
    std::vector<int> cur;
    subsets(1, n, d - 1, cur, choices);
    double best_det = -1.0;
    std::vector<int> chosen;
    for (const auto& c : choices) {
        std::vector<int> sel{0};
        sel.insert(sel.end(), c.begin(), c.end());
        CMatrix vs(n, d);
        for (int k = 0; k < d; ++k)
            vs.col(k) = basis.col(sel[static_cast<std::size_t>(k)]);
        const double det = std::abs((vs.adjoint() * dw).determinant());
        if (det > best_det + 1e-14) {
            best_det = det;
            chosen = sel;
        }
    }
    if (!(best_det > 1e-12))
        throw DomainError("adapted_frame: the graph is not a graph over the adapted coordinates at z");

    AdaptedFrame out;
    out.d = d;
    out.z = z.coords();
    out.basis.resize(n, n);
    int pos = 0;
    for (int k : chosen)
        out.basis.col(pos++) = basis.col(k);
    for (int k = 0; k < n; ++k)
        if (std::find(chosen.begin(), chosen.end(), k) == chosen.end())
            out.basis.col(pos++) = basis.col(k);
    const CMatrix vs = out.basis.leftCols(d);
    const CMatrix vr = out.basis.rightCols(n - d);
    const CMatrix ja = vs.adjoint() * dw;
    const CMatrix jb = vr.adjoint() * dw;
    out.slope = jb * ja.inverse();
    out.z_tangent = vs.adjoint() * z.coords();
    return out;
}

CVector tangent_flatten(const AdaptedFrame& frame, const CVector& w)
{
    const int d = frame.d;
    const int n = static_cast<int>(frame.basis.cols());
    const CMatrix vs = frame.basis.leftCols(d);
    const CMatrix vr = frame.basis.rightCols(n - d);
    const CVector a = vs.adjoint() * w;
    return vs * a + vr * (frame.slope * (a - frame.z_tangent));
}

BallPoint tangent_flatten(const PolynomialGraph& g, const BallPoint& z, const BallPoint& w, double neighborhood)
{
    check_same_dim(z, w, "tangent_flatten");
    const double delta = neighborhood > 0.0 ? neighborhood : default_flatten_radius(z);
    if ((w.coords() - z.coords()).norm() > delta)
        throw DomainError("tangent_flatten: w lies outside the neighborhood of radius " + std::to_string(delta));
    if (g.residual(w.coords()) > 1e-10)
        throw DomainError("tangent_flatten: w is not on the graph");
    return BallPoint(tangent_flatten(adapted_frame(g, z), w.coords()));
}

FlatteningDefects flattening_defects(const VarietySpec& v, const BallPoint& z, double R,
                                     const QuadratureScheme& sampler)
{
    if (!(R > 0.0))
        throw DomainError("flattening_defects: R must be positive");
    const auto* graph = std::get_if<PolynomialGraph>(&v);
    const auto* slice = std::get_if<AffineSlice>(&v);
    if (!graph && !slice)
        throw DomainError("flattening_defects: needs an affine slice or a polynomial graph");
    const int d = variety_dim(v);

    const HyperbolicBallShape shape = hyperbolic_ball(z, R);
    const double extent =
        (shape.center - z.coords()).norm() + std::max(shape.radius_parallel, shape.radius_perp);

    CVector zp;
    AdaptedFrame frame;
    if (graph) {
        frame = adapted_frame(*graph, z);
        zp = graph->parameter_of(z.coords());
    } else {
        zp = slice->frame.adjoint() * (z.coords() - slice->center());
    }
    const BallRule rule = ball_quadrature(d, sampler).scaled(extent);

    FlatteningDefects out;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const CVector param = zp + rule.nodes.col(static_cast<Eigen::Index>(k));
        const CVector w = graph ? graph->point(param) : slice->point(param);
        const double wn = w.norm();
        if (!(wn < 1.0 - kDropGuard) || !shape.contains(w))
            continue;
        ++out.samples;
        if (slice)
            continue;  // p_z is the identity on a flat slice
        const CVector p = tangent_flatten(frame, w);
        if (!(p.norm() < 1.0 - kBoundaryGuard)) {
            ++out.outside_ball;
            continue;
        }
        const double ratio = (1.0 - p.squaredNorm()) / (1.0 - wn * wn);
        out.ratio_defect = std::max(out.ratio_defect, std::abs(ratio - 1.0));
        const double rho = std::sqrt(std::max(0.0, 1.0 - detail::one_minus_rho2(p, w)));
        if (rho >= 1.0)
            throw OverflowError("flattening_defects: hyperbolic distance overflow");
        out.metric_defect = std::max(out.metric_defect, std::atanh(rho));
    }
    if (out.samples == 0)
        throw DomainError("flattening_defects: no sample point of the variety falls in D(z, R)");
    return out;
}

MeanValueCheck affine_mean_value_check(const AffineSlice& slice, const Polynomial& f, const BallPoint& z, double R,
                                       const QuadratureScheme& scheme)
{
    if (!(R > 0.0))
        throw DomainError("affine_mean_value_check: R must be positive");
    const int n = slice.n();
    const int d = slice.d();
    if (static_cast<int>(z.dim()) != n || f.nvars != n)
        throw DomainError("affine_mean_value_check: dimension mismatch");
    const CVector c = slice.center();
    const double r = slice.radius();
    const CVector xi = slice.frame.adjoint() * (z.coords() - c) / r;
    if ((c + r * slice.frame * xi - z.coords()).norm() > 1e-12)
        throw DomainError("affine_mean_value_check: z is not on the slice");

    const BallRule rule = ball_quadrature(d, scheme).scaled(std::tanh(R));
    const double xi2 = xi.squaredNorm();
    Complex lhs = 0.0;
    double c_r = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const CVector u = rule.nodes.col(col);
        const double qw = rule.weights(col);
        c_r += qw * std::pow(1.0 - u.squaredNorm(), n - d);

        const CVector eta = detail::mobius_map(xi, u);
        const double jac = std::pow(1.0 - xi2, d + 1) / std::pow(std::norm(1.0 - inner(u, xi)), d + 1);
        const CVector w = c + r * slice.frame * eta;
        const Complex integrand =
            f(w) * std::pow(1.0 - w.squaredNorm(), n - d) / detail::ipow(1.0 - inner(z.coords(), w), n + 1);
        lhs += qw * jac * std::pow(r, 2 * d) * integrand;
    }
    MeanValueCheck out;
    out.lhs = lhs;
    out.c_r = c_r;
    out.slice_radius = r;
    out.rhs = c_r * f(z.coords()) / (r * r);
    return out;
}

} // namespace bergmanlab
