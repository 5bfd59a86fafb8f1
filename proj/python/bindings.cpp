#include "bergmanlab/lab.hpp"
#include "bergmanlab/operators.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace bergmanlab;

namespace {

BallPoint point(const CVector& z) { return BallPoint(z); }

std::vector<BallPoint> points(const std::vector<CVector>& zs)
{
    std::vector<BallPoint> out;
    out.reserve(zs.size());
    for (const auto& z : zs)
        out.emplace_back(z);
    return out;
}

MeasureSpec slice_measure(int n, int d, int degree, double s, double scale)
{
    AffineSlice sl;
    sl.basepoint = CVector::Zero(n);
    sl.frame = CMatrix::Identity(n, d);
    MeasureSpec mu = variety_quadrature(VarietySpec(sl), s, QuadratureScheme::for_degree(degree)).measure;
    return scale == 1.0 ? mu : mu.scaled(scale);
}

py::dict spectral(const CMatrix& T, int n, int D, double kernel_tol, double min_gap_ratio)
{
    const MultiIndexBasis basis(n, D);
    const SpectralProjection sp = spectral_projection(OperatorMatrix::on(T, SpaceTag::bergman(basis), true),
                                                      kernel_tol, min_gap_ratio);
    py::dict out;
    out["Q"] = sp.Q.entries();
    out["P"] = sp.P.entries();
    out["values"] = sp.report.values;
    out["gap_ratio"] = sp.report.gap_ratio;
    out["kernel_dimension"] = sp.report.kernel_dimension;
    out["threshold"] = sp.report.threshold;
    return out;
}

py::tuple kernel_integral(const KernelIntegral& k)
{
    return py::make_tuple(k.value, k.error_estimate, k.precision_warning);
}

std::string run_json(const std::string& config, bool sweep_mode)
{
    const RunConfig cfg = parse_config(Json::parse(config));
    RunOptions opts;
    opts.write_files = false;
    const RunReport rep = sweep_mode ? sweep(cfg, opts) : run(cfg, opts);
    return rep.payload.dump();
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Bergman space operator toolkit on the unit ball of C^n";
    m.attr("__version__") = kSoftwareVersion;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NoSpectralGap>(m, "NoSpectralGap", PyExc_ArithmeticError);
    py::register_exception<IllConditionedRestriction>(m, "IllConditionedRestriction", PyExc_ArithmeticError);
    py::register_exception<OverflowError>(m, "OverflowError", PyExc_OverflowError);
    py::register_exception<QuadratureExactnessError>(m, "QuadratureExactnessError", PyExc_RuntimeError);

    m.def("mobius_map", [](const CVector& a, const CVector& w) { return mobius_map(point(a), point(w)).coords(); },
          py::arg("a"), py::arg("w"));
    m.def("pseudo_hyperbolic_distance",
          [](const CVector& z, const CVector& w) { return pseudo_hyperbolic_distance(point(z), point(w)); });
    m.def("hyperbolic_distance",
          [](const CVector& z, const CVector& w) { return hyperbolic_distance(point(z), point(w)); });
    m.def("mobius_jacobian", [](const CVector& z, const CVector& w) { return mobius_jacobian(point(z), point(w)); });
    m.def("hyperbolic_ball_volume", [](const CVector& z, double r) { return hyperbolic_ball_volume(point(z), r); },
          py::arg("z"), py::arg("r"));

    m.def("basis_size", &basis_size, py::arg("n"), py::arg("D"));
    m.def("basis_indices", [](int n, int D) {
        const MultiIndexBasis basis(n, D);
        std::vector<std::vector<int>> out;
        for (const auto& a : basis.indices())
            out.push_back(a.exponents);
        return out;
    });
    m.def("bergman_kernel", [](const CVector& z, const CVector& w) { return bergman_kernel(point(z), point(w)); });

    py::class_<MeasureSpec>(m, "Measure")
        .def(py::init<std::size_t>(), py::arg("n"))
        .def("add_atom", [](MeasureSpec& mu, const CVector& z, double w) { mu.add_atom(point(z), w); })
        .def("add_node", [](MeasureSpec& mu, const CVector& z, double w) { mu.add_node(point(z), w); })
        .def_property_readonly("dim", &MeasureSpec::dim)
        .def_property_readonly("total_mass", &MeasureSpec::total_mass)
        .def_property_readonly("support_size", &MeasureSpec::support_size)
        .def("support", &MeasureSpec::support_matrix)
        .def("weights", &MeasureSpec::weight_vector)
        .def("scaled", &MeasureSpec::scaled)
        .def("fingerprint", &MeasureSpec::fingerprint);

    m.def("slice_measure", &slice_measure, py::arg("n"), py::arg("d"), py::arg("degree"), py::arg("s") = 0.0,
          py::arg("scale") = 1.0,
          "(1 - |w|^2)^{n-d} dv_d on the coordinate slice, exact quadrature for the given degree");
    m.def("read_measure", &read_measure_file);
    m.def("write_measure", &write_measure_file);

    m.def("berezin_transform", [](const MeasureSpec& mu, const CVector& z) { return berezin_transform(mu, point(z)); });
    m.def("ball_ratio", [](const MeasureSpec& mu, double r, const CVector& z) { return ball_ratio(mu, r, point(z)); });
    m.def("toeplitz", [](const MeasureSpec& mu, int D) {
        return toeplitz_from_measure(mu, MultiIndexBasis(static_cast<int>(mu.dim()), D)).entries();
    });
    m.def("restriction", [](const MeasureSpec& mu, int D) {
        return restriction_matrix(MultiIndexBasis(static_cast<int>(mu.dim()), D), mu).entries();
    });
    m.def("spectral_projection", &spectral, py::arg("T"), py::arg("n"), py::arg("D"),
          py::arg("kernel_tol") = kDefaultKernelTol, py::arg("min_gap_ratio") = kDefaultMinGapRatio);
    m.def("toeplitz_cubed_bound", [](const CMatrix& T, int n, int D) {
        return toeplitz_cubed_bound(OperatorMatrix::on(T, SpaceTag::bergman(MultiIndexBasis(n, D)), true));
    });
    m.def("multiplier", [](int i, int n, int D) { return multiplier_matrix(i, MultiIndexBasis(n, D)).entries(); });

    m.def("eval_I_c", [](const CVector& z, double c) { return kernel_integral(eval_I_c(point(z), c)); });
    m.def("eval_J_ct",
          [](const CVector& z, double c, double t) { return kernel_integral(eval_J_ct(point(z), c, t)); });

    m.def("gram_criterion", [](const std::vector<CVector>& zs, int restarts, std::uint64_t seed) {
        const GramCriterion g = gram_criterion(points(zs), restarts, seed);
        return py::make_tuple(g.residual, g.best_diagonal);
    }, py::arg("points"), py::arg("restarts") = 20, py::arg("seed") = 1);

    m.def("experiments", &experiment_names);
    m.def("validate_config", [](const std::string& config) { parse_config(Json::parse(config)); });
    m.def("run", [](const std::string& config) { return run_json(config, false); },
          "run an experiment from a JSON config string; returns the report payload as JSON");
    m.def("sweep", [](const std::string& config) { return run_json(config, true); });
}
