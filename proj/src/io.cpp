#include "bergmanlab/io.hpp"

#include <fstream>

namespace bergmanlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json parse_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open " + path);
    try {
        return Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace

Complex complex_from_json(const Json& j)
{
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError("expected a number or an [re, im] pair, got " + j.dump());
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

CVector vector_from_json(const Json& j)
{
    if (!j.is_array() || j.empty())
        throw ConfigError("expected a nonempty coordinate list, got " + j.dump());
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k)
        v(static_cast<Eigen::Index>(k)) = complex_from_json(j[k]);
    return v;
}

Json vector_to_json(const CVector& v)
{
    Json out = Json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out.push_back(complex_to_json(v(k)));
    return out;
}

MeasureSpec measure_from_json(const Json& j)
{
    if (j.value("schema_version", 0) != 1)
        throw ConfigError("measure file: unsupported schema_version");
    const int n = j.at("dimension").get<int>();
    if (n < 1)
        throw ConfigError("measure file: dimension must be >= 1");
    MeasureSpec mu(static_cast<std::size_t>(n));
    for (const auto& rec : j.at("records")) {
        const std::string type = rec.at("type").get<std::string>();
        const CVector coords = vector_from_json(rec.at("coords"));
        if (coords.size() != n)
            throw ConfigError("measure file: record dimension differs from the declared dimension");
        const double w = rec.at("weight").get<double>();
        if (type == "atom")
            mu.add_atom(BallPoint(coords), w);
        else if (type == "node")
            mu.add_node(BallPoint(coords), w);
        else
            throw ConfigError("measure file: record type must be atom or node");
    }
    return mu;
}

Json measure_to_json(const MeasureSpec& mu)
{
    Json records = Json::array();
    for (const auto& a : mu.atoms())
        records.push_back({{"type", "atom"}, {"coords", vector_to_json(a.point.coords())}, {"weight", a.weight}});
    for (const auto& a : mu.nodes())
        records.push_back({{"type", "node"}, {"coords", vector_to_json(a.point.coords())}, {"weight", a.weight}});
    return {{"schema_version", 1}, {"dimension", mu.dim()}, {"records", records}};
}

MeasureSpec read_measure_file(const std::string& path) { return measure_from_json(parse_file(path)); }

void write_measure_file(const std::string& path, const MeasureSpec& mu)
{
    std::ofstream f(path);
    if (!f)
        throw Error("cannot write " + path);
    f << measure_to_json(mu).dump(2) << "\n";
}

Polynomial polynomial_from_json(const Json& terms, int nvars)
{
    Polynomial p(nvars);
    for (const auto& t : terms)
        p.add(t.at("exponents").get<std::vector<int>>(), complex_from_json(t.at("coeff")));
    return p;
}

namespace {

Json polynomial_to_json(const Polynomial& p)
{
    Json out = Json::array();
    for (const auto& t : p.terms)
        out.push_back({{"exponents", t.exponents}, {"coeff", complex_to_json(t.coeff)}});
    return out;
}

CMatrix columns_from_json(const Json& j, Eigen::Index rows)
{
    CMatrix m(rows, static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        const CVector col = vector_from_json(j[k]);
        if (col.size() != rows)
            throw ConfigError("frame column has the wrong length");
        m.col(static_cast<Eigen::Index>(k)) = col;
    }
    return m;
}

Json columns_to_json(const CMatrix& m)
{
    Json out = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k)
        out.push_back(vector_to_json(m.col(k)));
    return out;
}

} // namespace

VarietySpec variety_from_json(const Json& j)
{
    const std::string type = j.at("type").get<std::string>();
    try {
        if (type == "affine_slice") {
            AffineSlice s;
            s.basepoint = vector_from_json(j.at("basepoint"));
            s.frame = columns_from_json(j.at("frame"), s.basepoint.size());
            const CMatrix gram = s.frame.adjoint() * s.frame;
            if (s.frame.cols() < 1 || (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-12)
                throw ConfigError("affine_slice: frame must be a nonempty orthonormal family");
            if (s.frame.cols() >= s.basepoint.size())
                throw ConfigError("affine_slice: need d < n");
            s.radius();
            return s;
        }
        if (type == "polynomial_graph") {
            const int n = j.at("n").get<int>();
            const int d = j.at("d").get<int>();
            std::vector<Polynomial> comps;
            for (const auto& c : j.at("components"))
                comps.push_back(polynomial_from_json(c, d));
            CMatrix frame;
            if (j.contains("frame"))
                frame = columns_from_json(j.at("frame"), n);
            return PolynomialGraph(n, d, std::move(comps), std::move(frame));
        }
        if (type == "finite_points") {
            FinitePoints f;
            for (const auto& p : j.at("points"))
                f.points.emplace_back(vector_from_json(p));
            if (f.points.empty())
                throw ConfigError("finite_points: empty point list");
            return f;
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("variety: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("variety: ") + e.what());
    }
    throw ConfigError("variety: unknown type '" + type + "'");
}

Json variety_to_json(const VarietySpec& v)
{
    return std::visit(
        overloaded{[](const AffineSlice& s) -> Json {
                       return {{"type", "affine_slice"},
                               {"basepoint", vector_to_json(s.basepoint)},
                               {"frame", columns_to_json(s.frame)}};
                   },
                   [](const PolynomialGraph& g) -> Json {
                       Json comps = Json::array();
                       for (const auto& p : g.components)
                           comps.push_back(polynomial_to_json(p));
                       return {{"type", "polynomial_graph"},
                               {"n", g.n},
                               {"d", g.d},
                               {"components", comps},
                               {"frame", columns_to_json(g.frame)}};
                   },
                   [](const FinitePoints& f) -> Json {
                       Json pts = Json::array();
                       for (const auto& p : f.points)
                           pts.push_back(vector_to_json(p.coords()));
                       return {{"type", "finite_points"}, {"points", pts}};
                   }},
        v);
}

QuadratureScheme quadrature_from_json(const Json& j, QuadratureScheme q)
{
    if (j.contains("kind"))
        q.kind = quadrature_kind_from_string(j.at("kind").get<std::string>());
    q.radial_order = j.value("radial_order", q.radial_order);
    q.angular_order = j.value("angular_order", q.angular_order);
    q.shells = j.value("shells", q.shells);
    q.angular_growth = j.value("angular_growth", q.angular_growth);
    q.samples = j.value("samples", q.samples);
    q.seed = j.value("seed", q.seed);
    q.exact_degree = j.value("exact_degree", q.exact_degree);
    return q;
}

Json quadrature_to_json(const QuadratureScheme& q)
{
    return {{"kind", to_string(q.kind)},       {"radial_order", q.radial_order},
            {"angular_order", q.angular_order}, {"shells", q.shells},
            {"angular_growth", q.angular_growth}, {"samples", q.samples},
            {"seed", q.seed},                  {"exact_degree", q.exact_degree}};
}

} // namespace bergmanlab
