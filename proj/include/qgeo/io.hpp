#pragma once

#include <json.hpp>
#include <string>

#include "qgeo/builtin_models.hpp"
#include "qgeo/linalg.hpp"
#include "qgeo/path.hpp"

namespace qgeo::io {

using nlohmann::json;

// --- configuration -----------------------------------------------------

/// Model file schema:
///   { "kind": "builtin:three_state" | "builtin:two_level" |
///             "builtin:two_level_bloch" | "builtin:three_state_chart2" |
///             "matrix_polynomial" | "pullback",
///     "dim": N, "parameters": n, "delta": scale,
///     "terms": [ { "matrix": [[[re, im], ...], ...], "powers": [...] } ],
///     "base": { ... }, "map_exprs": ["...", ...],   // pullback only
///     "sample_box": [[lo, hi], ...] }               // optional, for verify
models::HamiltonianFamily model_from_json(const json& j);
models::HamiltonianFamily load_model(const std::string& file);

/// Optional per-parameter sampling box declared by the model file.
std::vector<std::pair<double, double>> sample_box_from_json(const json& j);

/// Path file schema:
///   { "kind": "polyline" | "expr", "closed": bool,
///     "samples": [[...], ...],                       // polyline
///     "exprs": [...], "dexprs": [...], "ddexprs": [...],  // expr, in s
///     "smooth_endpoints": bool }
transport::ParamPath path_from_json(const json& j);
transport::ParamPath load_path(const std::string& file);

/// Complex vector file: { "components": [[re, im], ...] }.
Vec load_ket(const std::string& file);

/// CSV of parameter points, one row per point; a non-numeric first line is
/// treated as a header.
std::vector<RVec> load_points_csv(const std::string& file);

json load_json(const std::string& file);

// --- serialization ------------------------------------------------------

json to_json(const Mat& m);    // [[ [re, im], ... ], ...]
json to_json(const RMat& m);
json to_json(const RVec& v);
json to_json(const Vec& v);    // [[re, im], ...]
json to_json(const Tensor3& t);
json to_json(const Tensor4& t);

void write_text(const std::string& file, const std::string& text);

/// CSV writer with %.17g formatting.
void write_csv(const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_g17(double v);

}  // namespace qgeo::io
