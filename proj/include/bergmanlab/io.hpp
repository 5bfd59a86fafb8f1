#pragma once

#include "bergmanlab/measures.hpp"
#include "bergmanlab/varieties.hpp"

#include "json.hpp"

#include <string>

namespace bergmanlab {

using Json = nlohmann::ordered_json;

/// Complex scalars are [re, im] pairs or plain numbers.
Complex complex_from_json(const Json& j);
Json complex_to_json(Complex z);
CVector vector_from_json(const Json& j);
Json vector_to_json(const CVector& v);

/// {"schema_version": 1, "dimension": n, "records": [{"type": "atom"|"node", "coords": [[re, im], ...], "weight": w}]}
MeasureSpec measure_from_json(const Json& j);
Json measure_to_json(const MeasureSpec& mu);
MeasureSpec read_measure_file(const std::string& path);
void write_measure_file(const std::string& path, const MeasureSpec& mu);

/// {"type": "affine_slice", "basepoint": [...], "frame": [[...], ...]}   frame lists the d column vectors
/// {"type": "polynomial_graph", "n": 2, "d": 1, "components": [[{"exponents": [2], "coeff": [0.1, 0]}]], "frame": ...}
/// {"type": "finite_points", "points": [[...], ...]}
VarietySpec variety_from_json(const Json& j);
Json variety_to_json(const VarietySpec& v);

Polynomial polynomial_from_json(const Json& terms, int nvars);

QuadratureScheme quadrature_from_json(const Json& j, QuadratureScheme defaults = {});
Json quadrature_to_json(const QuadratureScheme& q);

} // namespace bergmanlab
