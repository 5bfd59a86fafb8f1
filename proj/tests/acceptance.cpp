// Acceptance suite: one PASS/FAIL line per criterion.
//   bergmanlab_acceptance                 run every criterion
//   bergmanlab_acceptance --criterion N   run criterion N only

#include "bergmanlab/lab.hpp"
#include "bergmanlab/operators.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace bergmanlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

Json base(const std::string& experiment)
{
    return Json{{"schema_version", 1}, {"experiment", experiment}, {"n", 2}, {"d", 1}, {"seed", 1}};
}

ExperimentResult experiment(const Json& doc) { return run_experiment(parse_config(doc)); }

// All verdicts of an experiment, summarized.
Outcome verdicts(const ExperimentResult& r, std::string prefix = "")
{
    Outcome o{true, std::move(prefix)};
    for (const auto& v : r.verdicts) {
        o.pass = o.pass && v.pass;
        o.detail += (o.detail.empty() ? "" : "; ") + v.name + " " + fmt("%.4g", v.value) + " " + v.comparison + " " +
                    fmt("%.4g", v.tolerance) + (v.upper ? fmt("..%.4g", *v.upper) : "") + (v.pass ? "" : " [FAIL]");
    }
    return o;
}

Outcome mobius_suite()
{
    const auto t0 = Clock::now();
    Json doc = base("geometry-identities");
    doc["n"] = 3;
    doc["params"] = {{"samples", 1000}, {"max_norm", 0.95}};
    Outcome o = verdicts(experiment(doc));
    const double t = seconds_since(t0);
    o.pass = o.pass && t < 1.0;
    o.detail += "; wall " + fmt("%.3f", t) + " s < 1 s";
    return o;
}

Outcome hyperbolic_geometry()
{
    std::mt19937_64 gen(2024);
    const double s = std::tanh(1.0);
    int compared = 0, agree = 0;
    for (int k = 0; k < 10000; ++k) {
        CVector z = oracle::uniform_ball(2, gen);
        z *= 0.9 * std::uniform_real_distribution<double>()(gen) / z.norm();
        const CVector w = oracle::uniform_ball(2, gen);
        const HyperbolicBallShape shape = hyperbolic_ball(BallPoint(z), 1.0);
        const double rho2 = 1.0 - oracle::one_minus_rho2(z, w);
        if (std::abs(rho2 - s * s) < 1e-9 || std::abs(shape.level(w) - 1.0) < 1e-9)
            continue;
        ++compared;
        agree += shape.contains(w) == (rho2 < s * s);
    }
    double worst = 0.0;
    for (double x : {0.0, 0.5, 0.8}) {
        CVector z = CVector::Zero(2);
        z(0) = x;
        const double mc = oracle::hyperbolic_ball_volume_mc(z, 1.0, 1000000, 77);
        worst = std::max(worst, std::abs(hyperbolic_ball_volume(BallPoint(z), 1.0) - mc) / mc);
    }
    return {agree == compared && worst < 0.01,
            "membership agreement " + std::to_string(agree) + "/" + std::to_string(compared) +
                "; volume vs Monte Carlo worst relative " + fmt("%.2e", worst) + " < 1e-2"};
}

Outcome orthonormality()
{
    const MultiIndexBasis b(2, 6);
    const CMatrix g = quadrature_gram(b, ball_quadrature(2, QuadratureScheme::for_degree(6)));
    const double gram = max_abs(g - CMatrix::Identity(g.rows(), g.cols()));
    double rec = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        const MultiIndex& a = b.index(k);
        if (a.degree() >= 6)
            continue;
        for (int i = 0; i < 2; ++i) {
            MultiIndex up = a;
            up.exponents[static_cast<std::size_t>(i)] += 1;
            const double ratio = std::pow(b.norm_constant(*b.position(up)) / b.norm_constant(k), 2);
            rec = std::max(rec, std::abs(ratio - (a.exponents[static_cast<std::size_t>(i)] + 1.0) / (2 + a.degree() + 1.0)));
        }
    }
    return {gram < 1e-8 && rec < 1e-12,
            "Gram max deviation " + fmt("%.2e", gram) + " < 1e-8; norm recurrence " + fmt("%.2e", rec) + " < 1e-12"};
}

Outcome hyperplane_identity(bool spectral)
{
    const auto t0 = Clock::now();
    Json doc = base("hyperplane-identity");
    doc["D"] = 8;
    const ExperimentResult r = experiment(doc);
    const double t = seconds_since(t0);
    ExperimentResult picked;
    for (const auto& v : r.verdicts) {
        const bool is_spectral = v.name == "eigenvalues_in_0_1" || v.name == "gap_ratio" || v.name == "c_star";
        if (is_spectral == spectral && v.name != "RstarR_equals_T")
            picked.verdicts.push_back(v);
    }
    Outcome o = verdicts(picked);
    if (!spectral) {
        o.pass = o.pass && t < 30.0;
        o.detail += "; wall " + fmt("%.3f", t) + " s < 30 s";
    }
    return o;
}

Outcome gram()
{
    std::ifstream f(std::string(BERGMANLAB_SOURCE_DIR) + "/tests/golden/gram_criterion.json");
    if (!f)
        return {false, "golden file missing"};
    const Json golden = Json::parse(f);
    Json doc = base("gram-criterion");
    doc["params"] = {{"random_single", 100},
                     {"restarts", 20},
                     {"points", Json::array({golden.at("points")})},
                     {"floor", golden.at("residual_floor")}};
    doc["tolerances"] = {{"single_residual", 1e-10}, {"floor_tolerance", golden.at("relative_tolerance")}};
    return verdicts(experiment(doc));
}

Outcome restriction_extension()
{
    Json doc = base("extension-norms");
    doc["D"] = {6, 8, 10};
    return verdicts(experiment(doc));
}

Outcome mean_value()
{
    Json doc = base("mean-value");
    doc["params"] = {{"R", 1.0}, {"second_radius", 0.5}};
    return verdicts(experiment(doc));
}

Outcome commutators()
{
    Json doc = base("commutators");
    doc["D"] = {10, 12};
    doc["params"] = {{"p", {3}}};
    ExperimentResult r = experiment(doc);
    ExperimentResult picked;
    for (const auto& v : r.verdicts)
        if (v.name != "conjugation_defect_nonincreasing")
            picked.verdicts.push_back(v);
    return verdicts(picked);
}

Outcome kernel_asymptotics()
{
    return verdicts(experiment(base("kernel-asymptotics")));
}

Outcome schatten_kernel()
{
    Json doc = base("schatten-kernel");
    doc["params"] = {{"shells", {8, 10, 12, 14}}, {"p_above", 3}, {"p_at", 2}};
    ExperimentResult r = experiment(doc);
    return verdicts(r);
}

Outcome carleson()
{
    Json doc = base("carleson");
    doc["params"] = {{"max_shell", 10}, {"tail_r", {0.9, 0.95, 0.99}}, {"tail_t", 1.0}};
    return verdicts(experiment(doc));
}

Outcome flattening()
{
    Json doc = base("flattening");
    doc["variety"] = {{"type", "polynomial_graph"},
                      {"n", 2},
                      {"d", 1},
                      {"components", Json::array({Json::array({{{"exponents", {2}}, {"coeff", 0.1}}})})}};
    doc["params"] = {{"R", 1.0}, {"norms", {0.5, 0.95}}};
    return verdicts(experiment(doc));
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Outcome determinism()
{
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "bergmanlab_acceptance_determinism";
    fs::remove_all(root);
    std::size_t compared = 0;
    for (const char* name : {"geometry-identities", "gram-criterion", "commutators-sweep", "flattening"}) {
        const RunConfig cfg = load_config(std::string(BERGMANLAB_SOURCE_DIR) + "/configs/" + name + ".json");
        std::string payload[2];
        for (int k = 0; k < 2; ++k) {
            RunOptions o;
            o.out_dir = (root / (std::string(name) + std::to_string(k))).string();
            o.threads = k + 1;
            const RunReport rep = cfg.sweep ? sweep(cfg, o) : run(cfg, o);
            payload[k] = Json::parse(read_file(fs::path(o.out_dir) / "report.json")).at("payload").dump();
            (void)rep;
        }
        if (payload[0] != payload[1])
            return {false, std::string(name) + ": report payloads differ"};
        for (const auto& e : fs::directory_iterator(root / (std::string(name) + "0"))) {
            if (e.path().extension() != ".csv")
                continue;
            if (read_file(e.path()) != read_file(root / (std::string(name) + "1") / e.path().filename()))
                return {false, std::string(name) + ": " + e.path().filename().string() + " differs"};
            ++compared;
        }
    }
    fs::remove_all(root);
    return {true, "4 configs run twice (1 and 2 threads): payloads and " + std::to_string(compared) +
                      " CSV files byte-identical"};
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> check;
};

const std::vector<Criterion> kCriteria = {
    {1, "Mobius identity suite", mobius_suite},
    {2, "hyperbolic-ball geometry", hyperbolic_geometry},
    {3, "Bergman orthonormality", orthonormality},
    {4, "hyperplane identity", [] { return hyperplane_identity(false); }},
    {5, "spectral gap", [] { return hyperplane_identity(true); }},
    {6, "Gram criterion", gram},
    {7, "restriction/extension", restriction_extension},
    {8, "mean-value identity", mean_value},
    {9, "commutator Schatten trend", commutators},
    {10, "kernel asymptotics", kernel_asymptotics},
    {11, "Schatten kernel criterion", schatten_kernel},
    {12, "Carleson stability", carleson},
    {13, "flattening defects", flattening},
    {14, "determinism", determinism},
};

} // namespace

int main(int argc, char** argv)
{
    int only = 0;
    for (int k = 1; k < argc; ++k) {
        if (std::strcmp(argv[k], "--criterion") == 0 && k + 1 < argc)
            only = std::atoi(argv[++k]);
        else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 1;
        }
    }
    int failed = 0, ran = 0;
    for (const auto& c : kCriteria) {
        if (only && c.id != only)
            continue;
        ++ran;
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
        std::fflush(stdout);
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 1;
    }
    return failed == 0 ? 0 : 1;
}
