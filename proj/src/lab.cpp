#include "bergmanlab/lab.hpp"

#include "bergmanlab/operators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

namespace bergmanlab {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::string> kExperiments = {
    "geometry-identities", "carleson", "kernel-asymptotics", "hyperplane-identity", "gram-criterion", "spectrum",
    "flattening",          "mean-value", "commutators",     "schatten-kernel",     "extension-norms"};

Json number(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return "nan";
    return v > 0 ? "inf" : "-inf";
}

double get_num(const Json& params, const std::string& key, double fallback)
{
    if (!params.contains(key))
        return fallback;
    const Json& v = params.at(key);
    if (!v.is_number())
        throw ConfigError("params." + key + " must be a number");
    return v.get<double>();
}

std::vector<double> get_list(const Json& params, const std::string& key, std::vector<double> fallback)
{
    if (!params.contains(key))
        return fallback;
    const Json& v = params.at(key);
    if (v.is_number())
        return {v.get<double>()};
    if (!v.is_array() || v.empty())
        throw ConfigError("params." + key + " must be a number or a nonempty list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number())
            throw ConfigError("params." + key + " must contain numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

CVector get_vector(const Json& params, const std::string& key, CVector fallback)
{
    return params.contains(key) ? vector_from_json(params.at(key)) : fallback;
}

double binomial(int n, int k)
{
    double v = 1.0;
    for (int i = 1; i <= k; ++i)
        v = v * (n - k + i) / i;
    return v;
}

AffineSlice coordinate_slice(int n, int d)
{
    AffineSlice s;
    s.basepoint = CVector::Zero(n);
    s.frame = CMatrix::Identity(n, d);
    return s;
}

double max_over(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
double min_over(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

double relative_spread(const std::vector<double>& v)
{
    const double hi = max_over(v);
    return hi == 0.0 ? 0.0 : (hi - min_over(v)) / std::abs(hi);
}

// Worst step against the trend, relative to the previous value (absolute when it is zero).
double worst_step(const std::vector<double>& v, bool decreasing)
{
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double step = decreasing ? v[k] - v[k - 1] : v[k - 1] - v[k];
        const double scale = v[k - 1] == 0.0 ? 1.0 : std::abs(v[k - 1]);
        worst = std::max(worst, step / scale);
    }
    return worst;
}

Verdict trend_verdict(const std::string& name, const std::string& op, const std::vector<double>& v,
                      const std::string& trend, double tol)
{
    if (v.size() < 2)
        throw ConfigError(name + ": a trend needs at least two values");
    if (trend == "decreasing")
        return make_verdict(name, op, worst_step(v, true), "<", tol);
    if (trend == "nonincreasing") {
        // Absolute slack: the values are often at round-off level.
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < v.size(); ++k)
            worst = std::max(worst, v[k] - v[k - 1]);
        return make_verdict(name, op, worst, "<=", tol);
    }
    if (trend == "increasing")
        return make_verdict(name, op, worst_step(v, false), "<", tol);
    if (trend == "stabilizes") {
        const double prev = v[v.size() - 2];
        const double drift = std::abs(v.back() - prev) / (prev == 0.0 ? 1.0 : std::abs(prev));
        return make_verdict(name, op, drift, "<", tol);
    }
    if (trend == "spread")
        return make_verdict(name, op, relative_spread(v), "<", tol);
    if (trend == "bounded") {
        const double lo = min_over(v);
        return make_verdict(name, op, lo > 0.0 ? max_over(v) / lo : std::numeric_limits<double>::infinity(), "<",
                            tol);
    }
    throw ConfigError("unknown trend '" + trend + "'");
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

int single_degree(const RunConfig& cfg, int fallback)
{
    if (cfg.degrees.empty())
        return fallback;
    return cfg.degrees.back();
}

std::vector<int> degree_list(const RunConfig& cfg, std::vector<int> fallback)
{
    return cfg.degrees.empty() ? fallback : cfg.degrees;
}

// ---------------------------------------------------------------------------------------------------------------
// Measures

struct BuiltMeasure {
    MeasureSpec mu;
    std::optional<VarietyMeasure> variety;
};

BuiltMeasure build_measure(const RunConfig& cfg, const QuadratureScheme& fallback, double default_scale = 1.0)
{
    const Json& m = cfg.measure;
    const std::string source = m.value("source", std::string("variety"));
    BuiltMeasure out;
    if (source == "file") {
        out.mu = read_measure_file(m.at("path").get<std::string>());
        return out;
    }
    if (source == "atoms") {
        out.mu = MeasureSpec(static_cast<std::size_t>(cfg.n));
        for (const auto& a : m.at("atoms"))
            out.mu.add_atom(BallPoint(vector_from_json(a.at("coords"))), a.at("weight").get<double>());
        return out;
    }
    if (source != "variety")
        throw ConfigError("measure.source must be variety, file or atoms");
    const VarietySpec v = cfg.variety ? *cfg.variety : VarietySpec(coordinate_slice(cfg.n, cfg.d));
    std::vector<BallPoint> singular;
    if (m.contains("singular_points"))
        for (const auto& p : m.at("singular_points"))
            singular.emplace_back(vector_from_json(p));
    VarietyMeasure vm = variety_quadrature(v, m.value("s", 0.0), cfg.quadrature ? *cfg.quadrature : fallback, singular);
    double scale = default_scale;
    if (m.contains("scale")) {
        if (m.at("scale").is_string() && m.at("scale").get<std::string>() == "binomial")
            scale = binomial(cfg.n, cfg.d);
        else
            scale = m.at("scale").get<double>();
    }
    if (scale != 1.0)
        vm.measure = vm.measure.scaled(scale);
    out.mu = vm.measure;
    out.variety = std::move(vm);
    return out;
}

// rho = binomial(n, d) (1 - |w|^2)^{n-d} dv_d on the coordinate slice, exact quadrature for degree D.
MeasureSpec hyperplane_measure(int n, int d, int D)
{
    const VarietyMeasure vm =
        variety_quadrature(coordinate_slice(n, d), 0.0, QuadratureScheme::for_degree(D + n - d));
    return vm.measure.scaled(binomial(n, d));
}

CMatrix slice_pattern(const MultiIndexBasis& basis, int d)
{
    const auto size = static_cast<Eigen::Index>(basis.size());
    CMatrix q = CMatrix::Zero(size, size);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto& e = basis.index(k).exponents;
        if (std::all_of(e.begin() + d, e.end(), [](int x) { return x == 0; }))
            q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
    }
    return q;
}

double spectral_norm(const CMatrix& a)
{
    if (a.size() == 0)
        return 0.0;
    Eigen::BDCSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------------------------------------------
// Experiments

CVector random_ball_point(int n, double max_norm, std::mt19937_64& gen)
{
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    CVector g(n);
    for (int k = 0; k < n; ++k) {
        const double re = gauss(gen);
        const double im = gauss(gen);
        g(k) = Complex(re, im);
    }
    return g / g.norm() * (max_norm * std::pow(unif(gen), 1.0 / (2.0 * n)));
}

ExperimentResult exp_geometry(const RunConfig& cfg)
{
    const int n = cfg.n;
    const auto samples = static_cast<int>(get_num(cfg.params, "samples", 1000));
    const double max_norm = get_num(cfg.params, "max_norm", 0.95);
    std::mt19937_64 gen(cfg.seed);
    double inv = 0, id1 = 0, id2 = 0, id3 = 0, rho_inv = 0, beta_inv = 0;
    for (int s = 0; s < samples; ++s) {
        const BallPoint a(random_ball_point(n, max_norm, gen));
        const BallPoint z(random_ball_point(n, max_norm, gen));
        const BallPoint w(random_ball_point(n, max_norm, gen));
        const BallPoint fz = mobius_map(a, z);
        const BallPoint fw = mobius_map(a, w);
        inv = std::max(inv, (mobius_map(a, fw).coords() - w.coords()).norm());
        const Complex lhs1 = 1.0 - inner(fz.coords(), fw.coords());
        const Complex rhs1 = (1.0 - a.norm2()) * (1.0 - inner(z.coords(), w.coords())) /
                             ((1.0 - inner(z.coords(), a.coords())) * (1.0 - inner(a.coords(), w.coords())));
        id1 = std::max(id1, std::abs(lhs1 - rhs1) / std::abs(rhs1));
        const double rhs2 = (1.0 - a.norm2()) * (1.0 - z.norm2()) / std::norm(1.0 - inner(z.coords(), a.coords()));
        id2 = std::max(id2, std::abs((1.0 - fz.norm2()) - rhs2) / rhs2);
        const double rhs3 = std::pow((1.0 - fw.norm2()) / (1.0 - w.norm2()), n + 1);
        id3 = std::max(id3, std::abs(mobius_jacobian(a, w) - rhs3) / rhs3);
        rho_inv = std::max(rho_inv, std::abs(pseudo_hyperbolic_distance(fz, fw) - pseudo_hyperbolic_distance(z, w)));
        beta_inv = std::max(beta_inv, std::abs(hyperbolic_distance(fz, fw) - hyperbolic_distance(z, w)));
    }
    ExperimentResult r;
    r.tables.push_back({"residuals",
                        {"mobius_map", "pseudo_hyperbolic_distance", "hyperbolic_distance", "mobius_jacobian"},
                        {"involution", "inner_product_identity", "norm_identity", "jacobian_identity",
                         "rho_invariance", "beta_invariance"},
                        {{inv, id1, id2, id3, rho_inv, beta_inv}}});
    const double tol = cfg.tol("identity", 1e-10);
    const double worst = std::max({inv, id1, id2, id3, rho_inv, beta_inv});
    r.verdicts.push_back(make_verdict("max_identity_residual", "mobius_map", worst, "<", tol));
    r.metrics = {{"max_residual", worst}, {"involution", inv}, {"inner_product_identity", id1},
                 {"norm_identity", id2},  {"jacobian_identity", id3}};
    return r;
}

ExperimentResult exp_carleson(const RunConfig& cfg)
{
    QuadratureScheme graded;
    graded.kind = QuadratureScheme::Kind::Graded;
    graded.radial_order = 8;
    graded.angular_order = 64;
    graded.shells = 11;
    graded.angular_growth = 16.0;
    const BuiltMeasure bm = build_measure(cfg, graded);
    const int n = cfg.n;
    const double r = get_num(cfg.params, "r", 1.0);
    const int max_shell = static_cast<int>(get_num(cfg.params, "max_shell", 10));
    std::vector<CVector> dirs;
    if (cfg.params.contains("directions"))
        for (const auto& d : cfg.params.at("directions"))
            dirs.push_back(vector_from_json(d));
    else
        dirs.push_back(CVector::Unit(n, 0));

    ExperimentResult res;
    Table grid{"grid", {"berezin_transform", "ball_ratio"}, {"direction", "shell", "norm", "berezin", "ratio"}, {}};
    double growth = 0.0;
    double berezin_sup_v = 0.0, ratio_sup_v = 0.0;
    for (std::size_t di = 0; di < dirs.size(); ++di) {
        const std::vector<BallPoint> pts = radial_shell_grid({dirs[di]}, max_shell);
        std::vector<double> ratios;
        for (int k = 1; k <= max_shell; ++k) {
            const BallPoint& z = pts[static_cast<std::size_t>(k - 1)];
            const double b = berezin_transform(bm.mu, z);
            const double q = ball_ratio(bm.mu, r, z);
            berezin_sup_v = std::max(berezin_sup_v, b);
            ratio_sup_v = std::max(ratio_sup_v, q);
            ratios.push_back(q);
            grid.rows.push_back({static_cast<double>(di), static_cast<double>(k), z.norm(), b, q});
        }
        if (ratios.size() >= 2 && ratios[ratios.size() - 2] > 0.0)
            growth = std::max(growth, ratios.back() / ratios[ratios.size() - 2]);
    }
    res.tables.push_back(std::move(grid));

    const int D = single_degree(cfg, 6);
    const MultiIndexBasis basis(n, D);
    const OperatorMatrix t = toeplitz_from_measure(bm.mu, basis);
    const double tnorm = Eigen::SelfAdjointEigenSolver<CMatrix>(t.entries(), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

    const double tail_t = get_num(cfg.params, "tail_t", 1.0);
    const std::vector<double> tail_r = get_list(cfg.params, "tail_r", {0.9, 0.95, 0.99});
    std::vector<BallPoint> tail_grid;
    for (double x : get_list(cfg.params, "tail_grid_norms", {0.0, 0.5, 0.9, 0.99}))
        tail_grid.emplace_back(CVector(x * CVector::Unit(cfg.d, 0)));
    Table tail{"tail", {"tail_kernel_mass"}, {"r", "tail_mass"}, {}};
    std::vector<double> masses;
    for (double rr : tail_r) {
        masses.push_back(tail_kernel_mass(tail_t, rr, tail_grid));
        tail.rows.push_back({rr, masses.back()});
    }
    res.tables.push_back(std::move(tail));
    res.tables.push_back({"summary",
                          {"berezin_sup", "ball_ratio_sup", "toeplitz_from_measure"},
                          {"berezin_sup", "ratio_sup", "ratio_growth_last_shells", "toeplitz_norm", "D", "nodes"},
                          {{berezin_sup_v, ratio_sup_v, growth, tnorm, static_cast<double>(D),
                            static_cast<double>(bm.mu.support_size())}}});

    res.verdicts.push_back(
        make_verdict("ratio_growth_last_shells", "ball_ratio_sup", growth, "<", cfg.tol("ratio_growth", 2.0)));
    if (masses.size() >= 2)
        res.verdicts.push_back(trend_verdict("tail_mass_decreasing_in_r", "tail_kernel_mass", masses, "decreasing",
                                             cfg.tol("tail_monotone", 0.0)));
    res.metrics = {{"berezin_sup", berezin_sup_v}, {"ratio_sup", ratio_sup_v}, {"ratio_growth", growth},
                   {"toeplitz_norm", tnorm},       {"tail_mass", masses.back()}};
    return res;
}

ExperimentResult exp_kernel_asymptotics(const RunConfig& cfg)
{
    const int n = cfg.n;
    std::vector<double> def;
    for (int k = 0; k < 10; ++k)
        def.push_back(0.9 + 0.01 * k);
    const std::vector<double> norms = get_list(cfg.params, "norms", def);
    const double c_pos = get_num(cfg.params, "c_positive", 1.0);
    const double c_neg = get_num(cfg.params, "c_negative", -0.5);
    const double j_c = get_num(cfg.params, "j_c", 0.0);
    const double j_t = get_num(cfg.params, "j_t", 1.0);
    if (!(c_pos > 0.0) || !(c_neg < 0.0) || j_c != 0.0)
        throw ConfigError("kernel-asymptotics: needs c_positive > 0, c_negative < 0 and j_c = 0");

    ExperimentResult res;
    Table t{"kernel_integrals",
            {"eval_I_c", "eval_J_ct"},
            {"norm", "I_pos_scaled", "I_neg", "J", "J_over_log", "warning"},
            {}};
    std::vector<double> scaled, negs, jlog;
    for (double x : norms) {
        CVector zc = CVector::Zero(n);
        zc(0) = x;
        const BallPoint z(zc);
        const KernelIntegral ip = eval_I_c(z, c_pos);
        const KernelIntegral in = eval_I_c(z, c_neg);
        const KernelIntegral j = eval_J_ct(z, j_c, j_t);
        const double L = std::log(1.0 / (1.0 - x * x));
        scaled.push_back(ip.value * std::pow(1.0 - x * x, c_pos));
        negs.push_back(in.value);
        jlog.push_back(j.value / L);
        const bool warn = ip.precision_warning || in.precision_warning || j.precision_warning;
        t.rows.push_back({x, scaled.back(), negs.back(), j.value, jlog.back(), warn ? 1.0 : 0.0});
    }
    res.tables.push_back(std::move(t));
    const double var = cfg.tol("variation", 0.10);
    // Boundary limit of I_c for c < 0: Gamma(n) Gamma(-c) / Gamma((n - c)/2)^2.
    const double limit = std::tgamma(n) * std::tgamma(-c_neg) / std::pow(std::tgamma(0.5 * (n - c_neg)), 2);
    res.verdicts.push_back(make_verdict("I_pos_scaled_variation", "eval_I_c", relative_spread(scaled), "<", var));
    res.verdicts.push_back(make_verdict("I_neg_bounded", "eval_I_c", max_over(negs), "<=", cfg.tol("i_neg_bound", limit)));
    res.verdicts.push_back(make_verdict("J_over_log_variation", "eval_J_ct", relative_spread(jlog), "<", var));
    res.metrics = {{"I_pos_scaled_variation", relative_spread(scaled)},
                   {"I_neg_max", max_over(negs)},
                   {"J_over_log_variation", relative_spread(jlog)}};
    return res;
}

ExperimentResult exp_hyperplane(const RunConfig& cfg)
{
    const int n = cfg.n, d = cfg.d;
    const int D = single_degree(cfg, 8);
    const MultiIndexBasis basis(n, D);
    const MeasureSpec rho = hyperplane_measure(n, d, D);
    const OperatorMatrix t = toeplitz_from_measure(rho, basis);
    const CMatrix pattern = slice_pattern(basis, d);
    const double kernel_tol = get_num(cfg.params, "kernel_tol", kDefaultKernelTol);
    const double min_gap = get_num(cfg.params, "min_gap_ratio", kDefaultMinGapRatio);
    const SpectralProjection sp = spectral_projection(t, kernel_tol, min_gap);
    const double identity = max_abs(t.entries() - pattern);
    const double q_res = max_abs(sp.Q.entries() - pattern);
    double eig_dist = 0.0;
    for (Eigen::Index k = 0; k < sp.report.values.size(); ++k) {
        const double v = sp.report.values(k);
        eig_dist = std::max(eig_dist, std::min(std::abs(v), std::abs(v - 1.0)));
    }
    const double c_star = toeplitz_cubed_bound(t, kernel_tol, min_gap);
    const OperatorMatrix R = restriction_matrix(basis, rho);
    const double rr = max_abs((R.adjoint() * R).entries() - t.entries());

    ExperimentResult res;
    res.tables.push_back(
        {"hyperplane",
         {"toeplitz_from_measure", "spectral_projection", "toeplitz_cubed_bound", "restriction_matrix"},
         {"D", "basis_size", "nodes", "T_minus_Q_max", "Qspec_minus_Q_max", "eigenvalue_distance", "gap_ratio",
          "kernel_dimension", "c_star", "RstarR_minus_T_max"},
         {{static_cast<double>(D), static_cast<double>(basis.size()), static_cast<double>(rho.support_size()),
           identity, q_res, eig_dist, sp.report.gap_ratio, static_cast<double>(sp.report.kernel_dimension), c_star,
           rr}}});
    Table spec{"spectrum", {"spectral_projection"}, {"index", "eigenvalue"}, {}};
    for (Eigen::Index k = 0; k < sp.report.values.size(); ++k)
        spec.rows.push_back({static_cast<double>(k), sp.report.values(k)});
    res.tables.push_back(std::move(spec));

    res.verdicts.push_back(make_verdict("T_rho_equals_Q", "toeplitz_from_measure", identity, "<", cfg.tol("identity", 1e-6)));
    res.verdicts.push_back(make_verdict("spectral_Q_equals_pattern", "spectral_projection", q_res, "<", cfg.tol("identity", 1e-6)));
    res.verdicts.push_back(make_verdict("eigenvalues_in_0_1", "spectral_projection", eig_dist, "<", cfg.tol("eigenvalue", 1e-6)));
    res.verdicts.push_back(make_verdict("gap_ratio", "spectral_projection", sp.report.gap_ratio, ">", cfg.tol("gap_ratio", 1e4)));
    res.verdicts.push_back(make_verdict("c_star", "toeplitz_cubed_bound", c_star, "in", cfg.tol("c_star_min", 0.9),
                                        cfg.tol("c_star_max", 1.0)));
    res.verdicts.push_back(make_verdict("RstarR_equals_T", "restriction_matrix", rr, "<", cfg.tol("adjoint_identity", 1e-10)));
    res.metrics = {{"T_minus_Q", identity}, {"gap_ratio", sp.report.gap_ratio}, {"c_star", c_star},
                   {"eigenvalue_distance", eig_dist}};
    return res;
}

ExperimentResult exp_gram(const RunConfig& cfg)
{
    const int restarts = static_cast<int>(get_num(cfg.params, "restarts", 20));
    const bool has_points = cfg.params.contains("points");
    const auto singles = static_cast<int>(get_num(cfg.params, "random_single", has_points ? 0 : 100));
    ExperimentResult res;

    if (singles > 0) {
        std::mt19937_64 gen(cfg.seed);
        Table t{"single_points", {"gram_criterion"}, {"index", "norm", "residual"}, {}};
        double worst = 0.0;
        for (int k = 0; k < singles; ++k) {
            const BallPoint a(random_ball_point(cfg.n, 0.95, gen));
            const GramCriterion g = gram_criterion({a}, restarts, cfg.seed);
            worst = std::max(worst, g.residual);
            t.rows.push_back({static_cast<double>(k), a.norm(), g.residual});
        }
        res.tables.push_back(std::move(t));
        res.verdicts.push_back(
            make_verdict("single_point_residual", "gram_criterion", worst, "<", cfg.tol("single_residual", 1e-10)));
        res.metrics["single_point_residual"] = worst;
    }
    if (has_points) {
        Table t{"cases", {"gram_criterion"}, {"case", "m", "residual", "min_diagonal", "max_diagonal"}, {}};
        const Json& cases = cfg.params.at("points");
        for (std::size_t c = 0; c < cases.size(); ++c) {
            std::vector<BallPoint> pts;
            for (const auto& p : cases[c])
                pts.emplace_back(vector_from_json(p));
            const GramCriterion g = gram_criterion(pts, restarts, cfg.seed);
            t.rows.push_back({static_cast<double>(c), static_cast<double>(pts.size()), g.residual,
                              g.best_diagonal.minCoeff(), g.best_diagonal.maxCoeff()});
            res.metrics["residual"] = g.residual;
            if (pts.size() >= 2 && cfg.params.contains("floor")) {
                const double floor = get_num(cfg.params, "floor", 0.0);
                res.verdicts.push_back(make_verdict("case" + std::to_string(c) + "_residual_positive",
                                                    "gram_criterion", g.residual, ">", 0.0));
                res.verdicts.push_back(make_verdict("case" + std::to_string(c) + "_floor_deviation", "gram_criterion",
                                                    std::abs(g.residual - floor) / floor, "<",
                                                    cfg.tol("floor_tolerance", 0.05)));
            }
        }
        res.tables.push_back(std::move(t));
    }
    return res;
}

ExperimentResult exp_spectrum(const RunConfig& cfg)
{
    const std::vector<int> degrees = degree_list(cfg, {6});
    const double kernel_tol = get_num(cfg.params, "kernel_tol", kDefaultKernelTol);
    const double min_gap = get_num(cfg.params, "min_gap_ratio", kDefaultMinGapRatio);
    ExperimentResult res;
    Table t{"spectrum",
            {"toeplitz_from_measure", "spectral_projection", "toeplitz_cubed_bound"},
            {"D", "basis_size", "lambda_max", "smallest_kept", "gap_ratio", "kernel_dimension", "c_star"},
            {}};
    std::vector<double> gaps, cstars;
    for (int D : degrees) {
        const BuiltMeasure bm = build_measure(cfg, QuadratureScheme::for_degree(D + cfg.n - cfg.d));
        const MultiIndexBasis basis(cfg.n, D);
        const OperatorMatrix T = toeplitz_from_measure(bm.mu, basis);
        const SpectralProjection sp = spectral_projection(T, kernel_tol, min_gap);
        const double kept = sp.report.values(static_cast<Eigen::Index>(sp.report.gap_index) - 1);
        gaps.push_back(sp.report.gap_ratio);
        cstars.push_back(kept * kept);
        t.rows.push_back({static_cast<double>(D), static_cast<double>(basis.size()), sp.report.values(0), kept,
                          sp.report.gap_ratio, static_cast<double>(sp.report.kernel_dimension), kept * kept});
    }
    res.tables.push_back(std::move(t));
    res.verdicts.push_back(make_verdict("min_gap_ratio", "spectral_projection", min_over(gaps), ">=", min_gap));
    if (cfg.tolerances.count("c_star_min"))
        res.verdicts.push_back(
            make_verdict("min_c_star", "toeplitz_cubed_bound", min_over(cstars), ">=", cfg.tol("c_star_min", 0.0)));
    res.metrics = {{"gap_ratio", gaps.back()}, {"c_star", cstars.back()}};
    return res;
}

PolynomialGraph default_graph()
{
    Polynomial f(1);
    f.add({2}, 0.1);
    return PolynomialGraph(2, 1, {f});
}

ExperimentResult exp_flattening(const RunConfig& cfg)
{
    PolynomialGraph g = default_graph();
    if (cfg.variety) {
        const auto* pg = std::get_if<PolynomialGraph>(&*cfg.variety);
        if (!pg)
            throw ConfigError("flattening: variety must be a polynomial_graph");
        g = *pg;
    }
    const double R = get_num(cfg.params, "R", 1.0);
    const std::vector<double> norms = get_list(cfg.params, "norms", {0.5, 0.8, 0.95});
    CVector dir = get_vector(cfg.params, "direction", CVector::Ones(g.d));
    const int sampler_degree = static_cast<int>(get_num(cfg.params, "sampler_degree", 24));

    ExperimentResult res;
    Table t{"defects", {"flattening_defects"}, {"norm", "ratio_defect", "metric_defect", "samples", "outside_ball"}, {}};
    std::vector<double> ratio, metric;
    for (double x : norms) {
        const BallPoint z = graph_point_with_norm(g, dir, x);
        const FlatteningDefects fd =
            flattening_defects(VarietySpec(g), z, R, QuadratureScheme::for_degree(sampler_degree));
        ratio.push_back(fd.ratio_defect);
        metric.push_back(fd.metric_defect);
        t.rows.push_back({x, fd.ratio_defect, fd.metric_defect, static_cast<double>(fd.samples),
                          static_cast<double>(fd.outside_ball)});
    }
    res.tables.push_back(std::move(t));

    const double slope_norm = get_num(cfg.params, "slope_norm", norms.front());
    const BallPoint z = graph_point_with_norm(g, dir, slope_norm);
    const AdaptedFrame frame = adapted_frame(g, z);
    const CVector zp = g.parameter_of(z.coords());
    CVector step = get_vector(cfg.params, "slope_direction", CVector::Constant(g.d, Complex(0.6, 0.8)));
    step /= step.norm();
    Table s{"quadratic_order", {"tangent_flatten"}, {"h", "log_h", "defect", "log_defect"}, {}};
    std::vector<double> lx, ly;
    for (double h : get_list(cfg.params, "steps", {1e-1, 3e-2, 1e-2, 3e-3, 1e-3})) {
        const CVector w = g.point(zp + h * step);
        const double defect = (tangent_flatten(frame, w) - w).norm();
        lx.push_back(std::log(h));
        ly.push_back(std::log(defect));
        s.rows.push_back({h, lx.back(), defect, ly.back()});
    }
    res.tables.push_back(std::move(s));
    const LinearFit fit = fit_line(lx, ly);

    if (norms.size() >= 2) {
        res.verdicts.push_back(trend_verdict("ratio_defect_decreasing", "flattening_defects", ratio, "decreasing",
                                             cfg.tol("monotone", 0.0)));
        res.verdicts.push_back(trend_verdict("metric_defect_decreasing", "flattening_defects", metric, "decreasing",
                                             cfg.tol("monotone", 0.0)));
    }
    res.verdicts.push_back(make_verdict("quadratic_order_slope", "tangent_flatten", fit.slope, "in",
                                        cfg.tol("slope_min", 1.9), cfg.tol("slope_max", 2.1)));
    res.metrics = {{"ratio_defect", ratio.back()}, {"metric_defect", metric.back()}, {"slope", fit.slope}};
    return res;
}

ExperimentResult exp_mean_value(const RunConfig& cfg)
{
    const int n = cfg.n, d = cfg.d;
    AffineSlice a = coordinate_slice(n, d);
    if (cfg.variety) {
        const auto* s = std::get_if<AffineSlice>(&*cfg.variety);
        if (!s)
            throw ConfigError("mean-value: variety must be an affine_slice");
        a = *s;
    }
    const double rb = get_num(cfg.params, "second_radius", 0.5);
    AffineSlice b = a;
    {
        // Shift the slice along a direction orthogonal to its frame until its radius is rb.
        CVector normal = CVector::Zero(n);
        for (int k = 0; k < n && normal.norm() < 0.5; ++k) {
            CVector e = CVector::Unit(n, k);
            e -= a.frame * (a.frame.adjoint() * e);
            if (e.norm() > 0.5)
                normal = e / e.norm();
        }
        b.basepoint = std::sqrt(1.0 - rb * rb) * normal;
    }
    const double R = get_num(cfg.params, "R", 1.0);
    const CVector xi = get_vector(cfg.params, "xi", CVector::Constant(d, Complex(0.3, 0.2)));
    const QuadratureScheme scheme = QuadratureScheme::for_degree(static_cast<int>(get_num(cfg.params, "degree", 40)));

    std::vector<Polynomial> fs;
    if (cfg.params.contains("functions")) {
        for (const auto& f : cfg.params.at("functions"))
            fs.push_back(polynomial_from_json(f, n));
    } else {
        std::vector<int> e(static_cast<std::size_t>(n), 0);
        for (int p = 0; p <= 2; ++p) {
            e[0] = p;
            fs.push_back(Polynomial(n).add(e, 1.0));
        }
    }

    ExperimentResult res;
    Table t{"mean_value",
            {"affine_mean_value_check"},
            {"function", "slice_radius", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "relative_error"},
            {}};
    double worst = 0.0, worst_scaling = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
        Complex q[2];
        bool usable = true;
        int idx = 0;
        for (const AffineSlice* s : {&a, &b}) {
            const BallPoint z(CVector(s->center() + s->radius() * s->frame * xi));
            const MeanValueCheck mv = affine_mean_value_check(*s, fs[k], z, R, scheme);
            const double rel = std::abs(mv.lhs - mv.rhs) / std::max(std::abs(mv.rhs), 1e-300);
            worst = std::max(worst, rel);
            t.rows.push_back({static_cast<double>(k), mv.slice_radius, mv.lhs.real(), mv.lhs.imag(), mv.rhs.real(),
                              mv.rhs.imag(), rel});
            const Complex fz = fs[k](z.coords());
            usable = usable && std::abs(fz) > 1e-12;
            q[idx++] = usable ? mv.lhs * mv.slice_radius * mv.slice_radius / fz : Complex(0.0);
        }
        if (usable)
            worst_scaling = std::max(worst_scaling, std::abs(q[0] - q[1]) / std::abs(q[0]));
    }
    res.tables.push_back(std::move(t));
    res.verdicts.push_back(make_verdict("mean_value_relative_error", "affine_mean_value_check", worst, "<",
                                        cfg.tol("relative_error", 1e-6)));
    res.verdicts.push_back(make_verdict("radius_scaling", "affine_mean_value_check", worst_scaling, "<",
                                        cfg.tol("scaling", 1e-4)));
    res.metrics = {{"relative_error", worst}, {"scaling_error", worst_scaling}};
    return res;
}

ExperimentResult exp_commutators(const RunConfig& cfg)
{
    const int n = cfg.n, d = cfg.d;
    const std::vector<int> degrees = degree_list(cfg, {10, 12});
    const std::vector<double> ps = get_list(cfg.params, "p", {3.0});
    const int i = static_cast<int>(get_num(cfg.params, "i", 0));
    const int j = static_cast<int>(get_num(cfg.params, "j", i));
    const bool oracle = d == 1 && i == 0 && j == 0;

    ExperimentResult res;
    std::vector<std::string> cols{"D"};
    for (double p : ps)
        {
        std::ostringstream label;
        label << "schatten_sum_p" << p;
        cols.push_back(label.str());
    }
    cols.insert(cols.end(), {"sigma_max", "oracle_max_difference", "conjugation_defect"});
    Table t{"commutators",
            {"spectral_projection", "compressed_multiplier", "commutator", "schatten_partial_sums"},
            cols,
            {}};
    std::vector<double> first_sums, defects, oracle_diffs;
    for (int D : degrees) {
        if (D < 2)
            throw ConfigError("commutators: D must be at least 2");
        const MultiIndexBasis basis(n, D);
        const OperatorMatrix T = toeplitz_from_measure(hyperplane_measure(n, d, D), basis);
        const SpectralProjection sp = spectral_projection(T);
        const OperatorMatrix Si = compressed_multiplier(i, sp.Q, basis);
        const OperatorMatrix Sj = compressed_multiplier(j, sp.Q, basis);
        // Self-commutator in its positive form S*S - SS*.
        const OperatorMatrix self = degree_block(Si.adjoint() * Si - Si * Si.adjoint(), basis, D - 1);
        const SpectralReport rep = schatten_partial_sums(self, ps);

        const OperatorMatrix Mi = multiplier_matrix(i, basis);
        const OperatorMatrix Mj = multiplier_matrix(j, basis);
        const OperatorMatrix lhs = degree_block(commutator(Si, Sj.adjoint()), basis, D - 1);
        const OperatorMatrix rhs = degree_block(sp.Q * commutator(Mi, Mj.adjoint()) * sp.Q, basis, D - 1);
        const double defect = spectral_norm(lhs.entries() - rhs.entries());

        double oracle_diff = std::numeric_limits<double>::quiet_NaN();
        if (oracle) {
            RVector expect = RVector::Zero(rep.values.size());
            for (int k = 0; k < D; ++k)
                expect(k) = static_cast<double>(n) / ((n + k) * (n + k + 1.0));
            std::sort(expect.begin(), expect.end(), std::greater<>());
            oracle_diff = (expect - rep.values).cwiseAbs().maxCoeff();
            oracle_diffs.push_back(oracle_diff);
        }
        std::vector<double> row{static_cast<double>(D)};
        for (double p : ps)
            row.push_back(rep.schatten_partial_sums.at(p));
        row.insert(row.end(), {rep.values.size() ? rep.values(0) : 0.0, oracle_diff, defect});
        t.rows.push_back(std::move(row));
        first_sums.push_back(rep.schatten_partial_sums.at(ps.front()));
        defects.push_back(defect);
    }
    res.tables.push_back(std::move(t));
    if (degrees.size() >= 2) {
        res.verdicts.push_back(trend_verdict("schatten_sum_drift", "schatten_partial_sums", first_sums, "stabilizes",
                                             cfg.tol("drift", 0.01)));
        res.verdicts.push_back(trend_verdict("conjugation_defect_nonincreasing", "commutator", defects,
                                             "nonincreasing", cfg.tol("conjugation_slack", 1e-12)));
    }
    if (oracle)
        res.verdicts.push_back(make_verdict("oracle_singular_values", "schatten_partial_sums", oracle_diffs.back(), "<",
                                            cfg.tol("oracle", 1e-8)));
    res.metrics = {{"schatten_sum", first_sums.back()}, {"conjugation_defect", defects.back()}};
    if (oracle)
        res.metrics["oracle_difference"] = oracle_diffs.back();
    return res;
}

ExperimentResult exp_schatten_kernel(const RunConfig& cfg)
{
    const int n = cfg.n, d = cfg.d;
    const std::vector<double> shells = get_list(cfg.params, "shells", {8, 10, 12, 14});
    const double p_above = get_num(cfg.params, "p_above", 2.0 * d + 1.0);
    const double p_at = get_num(cfg.params, "p_at", 2.0 * d);
    const VarietySpec v = cfg.variety ? *cfg.variety : VarietySpec(coordinate_slice(n, d));

    ExperimentResult res;
    Table t{"bound_integral", {"variety_quadrature", "schatten_kernel_integral"},
            {"shells", "log_cutoff", "bound_p_above", "bound_p_at", "nodes"}, {}};
    std::vector<double> above, at, logc;
    for (double k : shells) {
        QuadratureScheme q;
        q.kind = QuadratureScheme::Kind::Graded;
        q.radial_order = static_cast<int>(get_num(cfg.params, "radial_order", 8));
        q.angular_order = static_cast<int>(get_num(cfg.params, "angular_order", 16));
        q.angular_growth = 0.0;
        q.shells = static_cast<int>(k);
        const VarietyMeasure vm = variety_quadrature(v, 0.0, q);
        above.push_back(schatten_kernel_integral(vm, 0, 0, p_above, false).bound_integral);
        at.push_back(schatten_kernel_integral(vm, 0, 0, p_at, false).bound_integral);
        logc.push_back(k * std::log(2.0));
        t.rows.push_back({k, logc.back(), above.back(), at.back(), static_cast<double>(vm.measure.nodes().size())});
    }
    res.tables.push_back(std::move(t));
    const LinearFit fit = fit_line(logc, at);

    // Sample-space commutator [Z_1, T_hat] under node refinement.
    const int sample_D = static_cast<int>(get_num(cfg.params, "sample_basis_degree", 4));
    const MultiIndexBasis basis(n, sample_D);
    Table s{"sample_space",
            {"sample_space_commutator", "restriction_matrix", "schatten_kernel_integral"},
            {"quadrature_degree", "nodes", "schatten_sum_p_above", "closed_vs_truncated_max", "kernel_integral_p_above"},
            {}};
    for (double qd : get_list(cfg.params, "sample_degrees", {2, 4, 6})) {
        const VarietyMeasure vm = variety_quadrature(v, 0.0, QuadratureScheme::for_degree(static_cast<int>(qd)));
        const OperatorMatrix c = sample_space_commutator(vm.measure, basis, 0, KernelMode::ClosedForm);
        const SpectralReport rep = schatten_partial_sums(c, {p_above});
        const double diff = max_abs(sample_space_toeplitz(vm.measure, basis, KernelMode::ClosedForm).entries() -
                                    sample_space_toeplitz(vm.measure, basis, KernelMode::Truncated).entries());
        s.rows.push_back({qd, static_cast<double>(vm.measure.support_size()), rep.schatten_partial_sums.at(p_above),
                          diff, schatten_kernel_integral(vm, 0, 0, p_above).integral});
    }
    res.tables.push_back(std::move(s));

    if (shells.size() >= 2)
        res.verdicts.push_back(trend_verdict("bound_p_above_drift", "schatten_kernel_integral", above, "stabilizes",
                                             cfg.tol("drift", 0.02)));
    res.verdicts.push_back(make_verdict("bound_p_at_log_fit_r2", "schatten_kernel_integral", fit.r2, ">",
                                        cfg.tol("log_fit_r2", 0.95)));
    res.verdicts.push_back(make_verdict("bound_p_at_log_slope", "schatten_kernel_integral", fit.slope, ">", 0.0));
    res.metrics = {{"bound_p_above", above.back()}, {"bound_p_at", at.back()}, {"log_fit_r2", fit.r2},
                   {"log_fit_slope", fit.slope}};
    return res;
}

ExperimentResult exp_extension(const RunConfig& cfg)
{
    const int n = cfg.n, d = cfg.d;
    const std::vector<int> degrees = degree_list(cfg, {6, 8, 10});
    ExperimentResult res;
    Table t{"extension",
            {"restriction_matrix", "spectral_projection", "extension_operator"},
            {"D", "E_norm", "RE_hermitian_defect", "RE_idempotent_defect", "ERQ_minus_Q", "RstarR_minus_T"},
            {}};
    std::vector<double> norms;
    double herm = 0, idem = 0, erq = 0, rr = 0;
    for (int D : degrees) {
        const MultiIndexBasis basis(n, D);
        const MeasureSpec rho = hyperplane_measure(n, d, D);
        const OperatorMatrix T = toeplitz_from_measure(rho, basis);
        const SpectralProjection sp = spectral_projection(T);
        const OperatorMatrix R = restriction_matrix(basis, rho);
        const Extension ext = extension_operator(R, sp.Q);
        const CMatrix re = (R * ext.E).entries();
        const double h = max_abs(re - re.adjoint());
        const double i2 = max_abs(re * re - re);
        const double e = max_abs((ext.E * R * sp.Q).entries() - sp.Q.entries());
        const double a = max_abs((R.adjoint() * R).entries() - T.entries());
        norms.push_back(ext.norm);
        herm = std::max(herm, h);
        idem = std::max(idem, i2);
        erq = std::max(erq, e);
        rr = std::max(rr, a);
        t.rows.push_back({static_cast<double>(D), ext.norm, h, i2, e, a});
    }
    res.tables.push_back(std::move(t));
    if (degrees.size() >= 2)
        res.verdicts.push_back(
            trend_verdict("E_norm_drift", "extension_operator", norms, "spread", cfg.tol("drift", 0.05)));
    const double tol = cfg.tol("extension", 1e-8);
    res.verdicts.push_back(make_verdict("RE_hermitian", "extension_operator", herm, "<", tol));
    res.verdicts.push_back(make_verdict("RE_idempotent", "extension_operator", idem, "<", tol));
    res.verdicts.push_back(make_verdict("ER_equals_Q_on_range", "extension_operator", erq, "<", tol));
    res.verdicts.push_back(make_verdict("RstarR_equals_T", "restriction_matrix", rr, "<", cfg.tol("adjoint_identity", 1e-10)));
    res.metrics = {{"E_norm", norms.back()}, {"RE_idempotent", idem}};
    return res;
}

// ---------------------------------------------------------------------------------------------------------------
// Reports

Json table_json(const Table& t)
{
    Json rows = Json::array();
    for (const auto& r : t.rows) {
        Json row = Json::array();
        for (double v : r)
            row.push_back(number(v));
        rows.push_back(row);
    }
    return {{"name", t.name}, {"operations", t.operations}, {"columns", t.columns}, {"rows", rows}};
}

Json verdict_json(const Verdict& v)
{
    Json j = {{"name", v.name},
              {"operation", v.operation},
              {"value", number(v.value)},
              {"comparison", v.comparison},
              {"tolerance", number(v.tolerance)}};
    if (v.upper)
        j["upper"] = number(*v.upper);
    j["pass"] = v.pass;
    return j;
}

RunReport assemble(const RunConfig& cfg, const std::vector<Table>& tables, const std::vector<Verdict>& verdicts,
                   double seconds, const char* mode)
{
    RunReport rep;
    const auto passed =
        static_cast<std::size_t>(std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; }));
    rep.all_passed = passed == verdicts.size();
    Json jt = Json::array();
    for (const auto& t : tables)
        jt.push_back(table_json(t));
    Json jv = Json::array();
    for (const auto& v : verdicts)
        jv.push_back(verdict_json(v));
    rep.payload = {{"software", {{"name", "bergmanlab"}, {"version", kSoftwareVersion}}},
                   {"mode", mode},
                   {"experiment", cfg.experiment},
                   {"config", cfg.raw},
                   {"tables", jt},
                   {"verdicts", jv},
                   {"summary",
                    {{"verdicts", verdicts.size()}, {"passed", passed}, {"status", rep.all_passed ? "PASS" : "FAIL"}}}};
    rep.timings = {{"wall_seconds", seconds}};
    return rep;
}

RunConfig with_seed(const RunConfig& cfg, const RunOptions& opts)
{
    if (!opts.seed)
        return cfg;
    Json raw = cfg.raw;
    raw["seed"] = *opts.seed;
    if (raw.contains("quadrature"))
        raw["quadrature"]["seed"] = *opts.seed;
    return parse_config(raw);
}

ExperimentResult run_with_context(const RunConfig& cfg)
{
    try {
        return run_experiment(cfg);
    } catch (const NoSpectralGap& e) {
        throw NoSpectralGap("experiment " + cfg.experiment + ": " + e.what());
    } catch (const IllConditionedRestriction& e) {
        throw IllConditionedRestriction("experiment " + cfg.experiment + ": " + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error("experiment " + cfg.experiment + ": " + e.what());
    }
}

void set_path(Json& doc, const std::string& variable, const Json& value)
{
    if (variable == "D") {
        doc["D"] = value;
        return;
    }
    const auto dot = variable.find('.');
    if (dot == std::string::npos) {
        if (doc.contains(variable) && variable != "params")
            doc[variable] = value;
        else
            doc["params"][variable] = value;
        return;
    }
    Json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto next = variable.find('.', start);
        const std::string key = variable.substr(start, next - start);
        if (next == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = next + 1;
    }
}

} // namespace

const std::vector<std::string>& experiment_names() { return kExperiments; }

double RunConfig::tol(const std::string& name, double fallback) const
{
    const auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
}

Verdict make_verdict(std::string name, std::string operation, double value, std::string comparison, double tolerance,
                     std::optional<double> upper)
{
    Verdict v{std::move(name), std::move(operation), value, std::move(comparison), tolerance, upper, false};
    if (v.comparison == "<")
        v.pass = value < tolerance;
    else if (v.comparison == "<=")
        v.pass = value <= tolerance;
    else if (v.comparison == ">")
        v.pass = value > tolerance;
    else if (v.comparison == ">=")
        v.pass = value >= tolerance;
    else if (v.comparison == "in")
        v.pass = upper && value >= tolerance && value <= *upper;
    else
        throw Error("make_verdict: unknown comparison " + v.comparison);
    return v;
}

RunConfig parse_config(const Json& doc)
{
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    cfg.raw = doc;
    try {
        if (doc.value("schema_version", 0) != kConfigSchemaVersion)
            throw ConfigError("schema_version must be " + std::to_string(kConfigSchemaVersion));
        cfg.experiment = doc.at("experiment").get<std::string>();
        if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end())
            throw ConfigError("unknown experiment '" + cfg.experiment + "'");
        cfg.n = doc.value("n", 2);
        cfg.d = doc.value("d", 1);
        if (cfg.n < 1)
            throw ConfigError("n must be >= 1");
        if (cfg.d < 0 || cfg.d >= cfg.n)
            throw ConfigError("need 0 <= d < n");
        if (doc.contains("D")) {
            const Json& D = doc.at("D");
            if (D.is_number_integer())
                cfg.degrees = {D.get<int>()};
            else
                cfg.degrees = D.get<std::vector<int>>();
            if (cfg.degrees.empty())
                throw ConfigError("D list must be nonempty");
            for (std::size_t k = 0; k < cfg.degrees.size(); ++k) {
                if (cfg.degrees[k] < 0)
                    throw ConfigError("D must be >= 0");
                if (k > 0 && cfg.degrees[k] <= cfg.degrees[k - 1])
                    throw ConfigError("D sweep list must be strictly increasing");
            }
        }
        if (doc.contains("variety")) {
            cfg.variety = variety_from_json(doc.at("variety"));
            if (ambient_dim(*cfg.variety) != cfg.n)
                throw ConfigError("variety dimension differs from n");
            if (variety_dim(*cfg.variety) != cfg.d && !std::holds_alternative<FinitePoints>(*cfg.variety))
                throw ConfigError("variety dimension differs from d");
        }
        cfg.measure = doc.value("measure", Json::object());
        if (doc.contains("quadrature"))
            cfg.quadrature = quadrature_from_json(doc.at("quadrature"));
        cfg.seed = doc.value("seed", std::uint64_t{1});
        if (doc.contains("tolerances")) {
            for (const auto& [k, v] : doc.at("tolerances").items()) {
                const double x = v.get<double>();
                if (!(x > 0.0))
                    throw ConfigError("tolerance '" + k + "' must be positive");
                cfg.tolerances[k] = x;
            }
        }
        cfg.params = doc.value("params", Json::object());
        if (doc.contains("sweep")) {
            const Json& s = doc.at("sweep");
            SweepSpec sw;
            sw.variable = s.at("variable").get<std::string>();
            sw.values = s.at("values").get<std::vector<Json>>();
            if (sw.values.empty())
                throw ConfigError("sweep.values must be nonempty");
            sw.metric = s.at("metric").get<std::string>();
            sw.trend = s.value("trend", std::string("stabilizes"));
            sw.tolerance = s.value("tolerance", 0.0);
            if (sw.tolerance < 0.0)
                throw ConfigError("sweep.tolerance must be >= 0");
            const std::vector<std::string> trends{"decreasing", "nonincreasing", "increasing", "stabilizes", "spread",
                                                  "bounded"};
            if (std::find(trends.begin(), trends.end(), sw.trend) == trends.end())
                throw ConfigError("unknown sweep trend '" + sw.trend + "'");
            if (sw.variable == "D")
                for (std::size_t k = 1; k < sw.values.size(); ++k)
                    if (!(sw.values[k].get<int>() > sw.values[k - 1].get<int>()))
                        throw ConfigError("D sweep values must be strictly increasing");
            cfg.sweep = std::move(sw);
        }
        cfg.out_dir = doc.contains("output") ? doc.at("output").value("dir", std::string()) : std::string();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open " + path);
    Json doc;
    try {
        doc = Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc);
}

ExperimentResult run_experiment(const RunConfig& cfg)
{
    const std::string& e = cfg.experiment;
    if (e == "geometry-identities")
        return exp_geometry(cfg);
    if (e == "carleson")
        return exp_carleson(cfg);
    if (e == "kernel-asymptotics")
        return exp_kernel_asymptotics(cfg);
    if (e == "hyperplane-identity")
        return exp_hyperplane(cfg);
    if (e == "gram-criterion")
        return exp_gram(cfg);
    if (e == "spectrum")
        return exp_spectrum(cfg);
    if (e == "flattening")
        return exp_flattening(cfg);
    if (e == "mean-value")
        return exp_mean_value(cfg);
    if (e == "commutators")
        return exp_commutators(cfg);
    if (e == "schatten-kernel")
        return exp_schatten_kernel(cfg);
    if (e == "extension-norms")
        return exp_extension(cfg);
    throw ConfigError("unknown experiment '" + e + "'");
}

RunReport run(const RunConfig& config, const RunOptions& opts)
{
    const RunConfig cfg = with_seed(config, opts);
    const auto t0 = Clock::now();
    const ExperimentResult r = run_with_context(cfg);
    RunReport rep =
        assemble(cfg, r.tables, r.verdicts, std::chrono::duration<double>(Clock::now() - t0).count(), "run");
    if (opts.write_files)
        write_report(rep, opts.out_dir.empty() ? (cfg.out_dir.empty() ? "bergmanlab_out" : cfg.out_dir) : opts.out_dir);
    return rep;
}

RunReport sweep(const RunConfig& config, const RunOptions& opts)
{
    const RunConfig cfg = with_seed(config, opts);
    if (!cfg.sweep)
        throw ConfigError("sweep: config has no sweep block");
    const SweepSpec& sw = *cfg.sweep;
    const auto t0 = Clock::now();

    std::vector<RunConfig> configs;
    for (const auto& v : sw.values) {
        Json doc = cfg.raw;
        doc.erase("sweep");
        set_path(doc, sw.variable, v);
        configs.push_back(parse_config(doc));
    }
    std::vector<ExperimentResult> results(configs.size());
    const auto threads = static_cast<std::size_t>(std::max(1, opts.threads));
    for (std::size_t start = 0; start < configs.size(); start += threads) {
        std::vector<std::future<ExperimentResult>> batch;
        const std::size_t stop = std::min(configs.size(), start + threads);
        for (std::size_t k = start; k < stop; ++k)
            batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                       [&, k] { return run_with_context(configs[k]); }));
        for (std::size_t k = start; k < stop; ++k)
            results[k] = batch[k - start].get();
    }

    std::vector<std::string> metric_names;
    for (const auto& [name, value] : results.front().metrics)
        metric_names.push_back(name);
    if (!results.front().metrics.count(sw.metric))
        throw ConfigError("sweep: experiment " + cfg.experiment + " reports no metric '" + sw.metric + "'");
    Table table{"sweep", {cfg.experiment}, {"index", "value"}, {}};
    table.columns.insert(table.columns.end(), metric_names.begin(), metric_names.end());
    std::vector<double> series;
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const Json& v = sw.values[k];
        std::vector<double> row{static_cast<double>(k), v.is_number() ? v.get<double>() : std::nan("")};
        for (const auto& m : metric_names) {
            const auto it = results[k].metrics.find(m);
            row.push_back(it == results[k].metrics.end() ? std::nan("") : it->second);
        }
        table.rows.push_back(std::move(row));
        series.push_back(results[k].metrics.at(sw.metric));
        const std::string tag = sw.variable + "=" + v.dump();
        for (auto t : results[k].tables) {
            t.name = tag + "/" + t.name;
            tables.push_back(std::move(t));
        }
        for (auto vd : results[k].verdicts) {
            vd.name = tag + "/" + vd.name;
            verdicts.push_back(std::move(vd));
        }
    }
    tables.insert(tables.begin(), std::move(table));
    if (series.size() >= 2)
        verdicts.push_back(trend_verdict("sweep_" + sw.metric + "_" + sw.trend, cfg.experiment, series, sw.trend,
                                         sw.tolerance));
    RunReport rep = assemble(cfg, tables, verdicts, std::chrono::duration<double>(Clock::now() - t0).count(), "sweep");
    if (opts.write_files)
        write_report(rep, opts.out_dir.empty() ? (cfg.out_dir.empty() ? "bergmanlab_out" : cfg.out_dir) : opts.out_dir);
    return rep;
}

std::string format_csv_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

std::string table_to_csv(const Table& t)
{
    std::ostringstream out;
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_csv_number(row[c]);
        out << "\n";
    }
    return out.str();
}

void write_report(const RunReport& report, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream f(fs::path(dir) / "report.json");
        if (!f)
            throw Error("cannot write report into " + dir);
        const Json doc = {{"payload", report.payload}, {"timings", report.timings}};
        f << doc.dump(2) << "\n";
    }
    for (const auto& t : report.payload.at("tables")) {
        Table table;
        table.name = t.at("name").get<std::string>();
        table.columns = t.at("columns").get<std::vector<std::string>>();
        for (const auto& r : t.at("rows")) {
            std::vector<double> row;
            for (const auto& v : r)
                row.push_back(v.is_number() ? v.get<double>()
                                            : (v.get<std::string>() == "nan" ? std::nan("")
                                               : v.get<std::string>() == "inf" ? HUGE_VAL
                                                                                : -HUGE_VAL));
            table.rows.push_back(std::move(row));
        }
        std::string file = table.name;
        for (char& c : file)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
                c = '_';
        std::ofstream f(fs::path(dir) / (file + ".csv"));
        f << table_to_csv(table);
    }
}

} // namespace bergmanlab
