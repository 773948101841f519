#include "qgeo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qgeo/errors.hpp"
#include "qgeo/expr.hpp"

namespace qgeo::io {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw ConfigError("config schema: " + what);
}

double require_number(const json& j, const char* key, double fallback,
                      bool required) {
  if (!j.contains(key)) {
    if (required) schema_error(std::string("missing \"") + key + "\"");
    return fallback;
  }
  if (!j[key].is_number()) schema_error(std::string("\"") + key + "\" must be a number");
  return j[key].get<double>();
}

cxd complex_from_json(const json& j) {
  if (j.is_number()) return cxd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cxd(j[0].get<double>(), j[1].get<double>());
  schema_error("complex entries must be numbers or [re, im] pairs");
}

Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) schema_error("matrix must be a nested array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      schema_error("matrix rows must have equal lengths");
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

models::HamiltonianFamily pullback_from_json(const json& j) {
  if (!j.contains("base")) schema_error("pullback model needs \"base\"");
  auto base = model_from_json(j["base"]);
  if (!j.contains("map_exprs") || !j["map_exprs"].is_array())
    schema_error("pullback model needs \"map_exprs\"");
  const int n = static_cast<int>(require_number(j, "parameters", 0, true));
  if (n <= 0) schema_error("\"parameters\" must be positive");
  if (static_cast<int>(j["map_exprs"].size()) != base.params)
    schema_error("map_exprs length must equal the base parameter count");

  std::vector<std::string> vars;
  for (int i = 0; i < n; ++i) vars.push_back("x" + std::to_string(i + 1));
  auto exprs = std::make_shared<std::vector<expr::Expr>>();
  for (const auto& text : j["map_exprs"]) {
    if (!text.is_string()) schema_error("map_exprs entries must be strings");
    exprs->push_back(expr::Expr::parse(text.get<std::string>(), vars));
  }

  auto map = [exprs](const RVec& x) {
    std::vector<double> vals(x.data(), x.data() + x.size());
    RVec xi(exprs->size());
    for (size_t a = 0; a < exprs->size(); ++a) xi[a] = (*exprs)[a].eval(vals);
    return xi;
  };
  // Richardson-extrapolated Jacobian of the expression map.
  auto jacobian = [exprs, map](const RVec& x) {
    const int rows = static_cast<int>(exprs->size());
    const int cols = static_cast<int>(x.size());
    RMat jac(rows, cols);
    const double h = 1e-4;
    for (int c = 0; c < cols; ++c) {
      auto central = [&](double step) {
        RVec xp = x, xm = x;
        xp[c] += step;
        xm[c] -= step;
        return RVec((map(xp) - map(xm)) / (2.0 * step));
      };
      jac.col(c) = (4.0 * central(h / 2) - central(h)) / 3.0;
    }
    return jac;
  };
  return models::reparametrize(base, map, n, jacobian);
}

}  // namespace

models::HamiltonianFamily model_from_json(const json& j) {
  if (!j.is_object()) schema_error("model file must hold a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string())
    schema_error("model needs a string \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  const double delta = require_number(j, "delta", 1.0, false);
  if (delta <= 0.0) schema_error("\"delta\" must be positive");

  models::HamiltonianFamily fam;
  if (kind == "builtin:three_state") {
    fam = models::make_three_state(delta);
  } else if (kind == "builtin:three_state_chart2") {
    fam = models::make_three_state_chart2(delta);
  } else if (kind == "builtin:two_level") {
    fam = models::make_two_level(delta);
  } else if (kind == "builtin:two_level_bloch") {
    fam = models::make_two_level_bloch(delta);
  } else if (kind == "matrix_polynomial") {
    const int dim = static_cast<int>(require_number(j, "dim", 0, true));
    const int params = static_cast<int>(require_number(j, "parameters", 0, true));
    if (dim <= 0 || params <= 0)
      schema_error("\"dim\" and \"parameters\" must be positive");
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty())
      schema_error("matrix_polynomial needs a non-empty \"terms\" array");
    std::vector<models::PolynomialTerm> terms;
    for (const auto& t : j["terms"]) {
      if (!t.contains("matrix") || !t.contains("powers"))
        schema_error("each term needs \"matrix\" and \"powers\"");
      models::PolynomialTerm term;
      term.matrix = matrix_from_json(t["matrix"]);
      for (const auto& p : t["powers"]) {
        if (!p.is_number_integer()) schema_error("powers must be integers");
        term.powers.push_back(p.get<int>());
      }
      terms.push_back(std::move(term));
    }
    fam = models::make_matrix_polynomial(dim, params, std::move(terms), delta);
  } else if (kind == "pullback") {
    fam = pullback_from_json(j);
    fam.delta = delta;
  } else {
    schema_error("unknown model kind \"" + kind + "\"");
  }

  // optional declared shape cross-checks
  if (j.contains("dim") && kind.rfind("builtin:", 0) == 0 &&
      static_cast<int>(j["dim"].get<double>()) != fam.dim)
    schema_error("declared \"dim\" does not match the builtin model");
  if (j.contains("parameters") && kind.rfind("builtin:", 0) == 0 &&
      static_cast<int>(j["parameters"].get<double>()) != fam.params)
    schema_error("declared \"parameters\" does not match the builtin model");
  return fam;
}

std::vector<std::pair<double, double>> sample_box_from_json(const json& j) {
  std::vector<std::pair<double, double>> box;
  if (!j.contains("sample_box")) return box;
  for (const auto& r : j["sample_box"]) {
    if (!r.is_array() || r.size() != 2) schema_error("sample_box rows are [lo, hi]");
    box.emplace_back(r[0].get<double>(), r[1].get<double>());
  }
  return box;
}

transport::ParamPath path_from_json(const json& j) {
  if (!j.is_object()) schema_error("path file must hold a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string())
    schema_error("path needs a string \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  const bool closed = j.value("closed", false);

  transport::ParamPath path;
  if (kind == "polyline") {
    if (!j.contains("samples") || !j["samples"].is_array())
      schema_error("polyline path needs \"samples\"");
    std::vector<RVec> pts;
    for (const auto& row : j["samples"]) {
      RVec p(row.size());
      for (size_t i = 0; i < row.size(); ++i) p[i] = row[i].get<double>();
      pts.push_back(std::move(p));
    }
    path = transport::polyline_path(std::move(pts), closed);
  } else if (kind == "expr") {
    auto strings = [&](const char* key) {
      std::vector<std::string> out;
      if (!j.contains(key)) return out;
      for (const auto& e : j[key]) {
        if (!e.is_string()) schema_error("path expressions must be strings");
        out.push_back(e.get<std::string>());
      }
      return out;
    };
    auto exprs = strings("exprs");
    if (exprs.empty()) schema_error("expr path needs \"exprs\"");
    path = transport::expr_path(exprs, strings("dexprs"), strings("ddexprs"),
                                closed);
  } else {
    schema_error("unknown path kind \"" + kind + "\"");
  }
  if (j.value("smooth_endpoints", false))
    path = transport::smooth_endpoints(path);
  return path;
}

json load_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("JSON parse error in " + file + ": " + e.what());
  }
  return j;
}

models::HamiltonianFamily load_model(const std::string& file) {
  return model_from_json(load_json(file));
}

transport::ParamPath load_path(const std::string& file) {
  return path_from_json(load_json(file));
}

Vec load_ket(const std::string& file) {
  json j = load_json(file);
  if (!j.contains("components") || !j["components"].is_array())
    schema_error("ket file needs \"components\"");
  Vec v(j["components"].size());
  for (size_t i = 0; i < j["components"].size(); ++i)
    v[static_cast<int>(i)] = complex_from_json(j["components"][i]);
  return v;
}

std::vector<RVec> load_points_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file);
  std::vector<RVec> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        vals.push_back(v);
        (void)used;
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (points.empty()) continue;  // header line
      throw ConfigError("points file: non-numeric row");
    }
    RVec p(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) p[static_cast<int>(i)] = vals[i];
    points.push_back(std::move(p));
  }
  if (points.empty()) throw ConfigError("points file is empty");
  return points;
}

json to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const RMat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const RVec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i)
    out.push_back({v[i].real(), v[i].imag()});
  return out;
}

json to_json(const Tensor3& t) {
  const int n = t.dim();
  json out = json::array();
  for (int a = 0; a < n; ++a) {
    json mid = json::array();
    for (int b = 0; b < n; ++b) {
      json row = json::array();
      for (int c = 0; c < n; ++c)
        row.push_back({t(a, b, c).real(), t(a, b, c).imag()});
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

json to_json(const Tensor4& t) {
  const int n = t.dim();
  json out = json::array();
  for (int a = 0; a < n; ++a) {
    json l3 = json::array();
    for (int b = 0; b < n; ++b) {
      json l2 = json::array();
      for (int c = 0; c < n; ++c) {
        json row = json::array();
        for (int d = 0; d < n; ++d)
          row.push_back({t(a, b, c, d).real(), t(a, b, c, d).imag()});
        l2.push_back(std::move(row));
      }
      l3.push_back(std::move(l2));
    }
    out.push_back(std::move(l3));
  }
  return out;
}

void write_text(const std::string& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file);
  out << text;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file);
  for (size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << format_g17(row[i]) << (i + 1 < row.size() ? "," : "\n");
  }
}

}  // namespace qgeo::io
