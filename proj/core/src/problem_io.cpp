#include "uwot/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace uwot {
namespace {

using nlohmann::json;

std::pair<int, int> line_column(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, 0, 0); }

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) ok = true;
    if (!ok) fail(where + ": unknown field \"" + it.key() + "\"");
  }
}

Eigen::VectorXd to_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(where + ": expected an array");
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(where + ": expected numbers");
    v[i] = arr[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd to_matrix(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) fail(where + ": expected a 2-d array");
  const size_t cols = arr[0].size();
  Eigen::MatrixXd m(arr.size(), cols);
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_array() || arr[i].size() != cols)
      fail(where + ": ragged 2-d array");
    for (size_t j = 0; j < cols; ++j) m(i, j) = arr[i][j].get<double>();
  }
  return m;
}

DiscreteMeasure measure_from_json(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(where + ": expected an object");
  reject_unknown(obj, where, {"atoms", "weights"});
  if (!obj.contains("atoms") || !obj.contains("weights"))
    fail(where + ": needs \"atoms\" and \"weights\"");
  const Eigen::MatrixXd atoms = to_matrix(obj["atoms"], where + ".atoms");
  const Eigen::VectorXd weights = to_vector(obj["weights"], where + ".weights");
  std::vector<Point> pts;
  for (int i = 0; i < atoms.rows(); ++i) pts.push_back(atoms.row(i).transpose());
  try {
    return DiscreteMeasure(std::move(pts), weights);
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
}

json measure_to_json(const DiscreteMeasure& m) {
  json atoms = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.dim(); ++k) row.push_back(m.atom(i)[k]);
    atoms.push_back(row);
  }
  json weights = json::array();
  for (int i = 0; i < m.size(); ++i) weights.push_back(m.weight(i));
  return json{{"atoms", atoms}, {"weights", weights}};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

CostSpec cost_from_json(const json& obj) {
  if (!obj.is_object()) fail("cost: expected an object");
  if (!obj.contains("type")) fail("cost: missing \"type\"");
  CostSpec spec;
  spec.type = obj["type"].get<std::string>();
  if (spec.type == "quadratic") {
    reject_unknown(obj, "cost", {"type"});
  } else if (spec.type == "power") {
    reject_unknown(obj, "cost", {"type", "eta"});
    if (!obj.contains("eta")) fail("cost: power needs \"eta\"");
    spec.eta = obj["eta"].get<double>();
  } else if (spec.type == "sigma_norm") {
    reject_unknown(obj, "cost", {"type", "eta", "sigma", "A"});
    if (!obj.contains("eta") || !obj.contains("sigma") || !obj.contains("A"))
      fail("cost: sigma_norm needs \"eta\", \"sigma\" and \"A\"");
    spec.eta = obj["eta"].get<double>();
    spec.sigma = obj["sigma"].get<double>();
    for (const auto& a : obj["A"])
      spec.a_matrices.push_back(to_matrix(a, "cost.A"));
  } else if (spec.type == "affine_sup") {
    reject_unknown(obj, "cost", {"type", "pieces"});
    if (!obj.contains("pieces")) fail("cost: affine_sup needs \"pieces\"");
    for (const auto& p : obj["pieces"]) {
      reject_unknown(p, "cost.pieces[]", {"a", "b"});
      AffineSupCost::Piece piece;
      piece.a = to_vector(p["a"], "cost.pieces[].a");
      piece.b = to_matrix(p["b"], "cost.pieces[].b");
      spec.affine_pieces.push_back(std::move(piece));
    }
  } else if (spec.type == "pl_conical") {
    reject_unknown(obj, "cost", {"type", "pieces"});
    if (!obj.contains("pieces")) fail("cost: pl_conical needs \"pieces\"");
    for (const auto& p : obj["pieces"]) {
      reject_unknown(p, "cost.pieces[]", {"a", "u"});
      PiecewiseLinearCost::Piece piece;
      piece.a = to_vector(p["a"], "cost.pieces[].a");
      piece.u = to_matrix(p["u"], "cost.pieces[].u");
      spec.pl_pieces.push_back(std::move(piece));
    }
  } else if (spec.type == "composite") {
    reject_unknown(obj, "cost", {"type", "F", "G"});
    if (!obj.contains("F") || !obj.contains("G"))
      fail("cost: composite needs \"F\" and \"G\"");
    spec.fxy = to_matrix(obj["F"], "cost.F");
    const json& g = obj["G"];
    reject_unknown(g, "cost.G", {"name", "p", "eta", "a", "b"});
    spec.g.name = g.at("name").get<std::string>();
    if (g.contains("p")) spec.g.param = g["p"].get<double>();
    if (g.contains("eta")) spec.g.param = g["eta"].get<double>();
    if (g.contains("b")) spec.g.param = g["b"].get<double>();
  } else {
    fail("cost: unknown type \"" + spec.type + "\"");
  }
  return spec;
}

json cost_to_json(const CostSpec& spec) {
  json out{{"type", spec.type}};
  if (spec.type == "power") out["eta"] = spec.eta;
  if (spec.type == "sigma_norm") {
    out["eta"] = spec.eta;
    out["sigma"] = spec.sigma;
    json a = json::array();
    for (const auto& mat : spec.a_matrices) a.push_back(matrix_to_json(mat));
    out["A"] = a;
  }
  if (spec.type == "affine_sup") {
    json pieces = json::array();
    for (const auto& p : spec.affine_pieces) {
      json arr = json::array();
      for (int i = 0; i < p.a.size(); ++i) arr.push_back(p.a[i]);
      pieces.push_back(json{{"a", arr}, {"b", matrix_to_json(p.b)}});
    }
    out["pieces"] = pieces;
  }
  if (spec.type == "pl_conical") {
    json pieces = json::array();
    for (const auto& p : spec.pl_pieces) {
      json arr = json::array();
      for (int i = 0; i < p.a.size(); ++i) arr.push_back(p.a[i]);
      pieces.push_back(json{{"a", arr}, {"u", matrix_to_json(p.u)}});
    }
    out["pieces"] = pieces;
  }
  if (spec.type == "composite") {
    out["F"] = matrix_to_json(spec.fxy);
    json g{{"name", spec.g.name}};
    if (spec.g.name == "power") g["p"] = spec.g.param;
    if (spec.g.name == "neg_power") g["eta"] = spec.g.param;
    if (spec.g.name == "linear") g["b"] = spec.g.param;
    out["G"] = g;
  }
  return out;
}

}  // namespace

std::unique_ptr<Cost> CostSpec::build(const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu) const {
  if (type == "quadratic")
    return std::make_unique<QuadraticCost>(mu.atom_matrix(), nu.atom_matrix());
  if (type == "power") {
    if (mu.dim() != 1) fail("cost: power requires d = 1");
    return std::make_unique<PowerCost>(mu.atom_matrix().col(0),
                                       nu.atom_matrix().col(0), eta);
  }
  if (type == "sigma_norm")
    return std::make_unique<SigmaNormCost>(a_matrices, nu.atom_matrix(), sigma,
                                           eta);
  if (type == "affine_sup") return std::make_unique<AffineSupCost>(affine_pieces);
  if (type == "pl_conical")
    return std::make_unique<PiecewiseLinearCost>(pl_pieces, nu.atom_matrix());
  if (type == "composite") {
    CompositeCost::ScalarFn gfn, gpfn;
    double gp0 = 0.0, gpinf = kInf;
    const double p = g.param;
    if (g.name == "square") {
      gfn = [](double u) { return u * u; };
      gpfn = [](double u) { return 2 * u; };
      gp0 = 0.0;
      gpinf = kInf;
    } else if (g.name == "power") {
      if (!(p > 1.0)) fail("cost.G: power needs p > 1");
      gfn = [p](double u) { return std::pow(u, p); };
      gpfn = [p](double u) { return p * std::pow(u, p - 1.0); };
      gp0 = 0.0;
      gpinf = kInf;
    } else if (g.name == "exp") {
      gfn = [](double u) { return std::exp(u); };
      gpfn = [](double u) { return std::exp(u); };
      gp0 = 1.0;
      gpinf = kInf;
    } else if (g.name == "neg_power") {
      if (!(p > 0.0 && p < 1.0)) fail("cost.G: neg_power needs eta in (0,1)");
      gfn = [p](double u) { return -std::pow(u, p); };
      gpfn = [p](double u) { return -p * std::pow(u, p - 1.0); };
      gp0 = -kInf;
      gpinf = 0.0;
    } else if (g.name == "linear") {
      gfn = [p](double u) { return p * u; };
      gpfn = [p](double) { return p; };
      gp0 = p;
      gpinf = p;
    } else {
      fail("cost.G: unknown name \"" + g.name + "\"");
    }
    return std::make_unique<CompositeCost>(fxy, gfn, gpfn, gp0, gpinf);
  }
  fail("cost: unknown type \"" + type + "\"");
}

ProblemSpec parse_problem(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ParseError(e.what(), line, col);
  }
  if (!root.is_object()) fail("problem: expected a JSON object");
  reject_unknown(root, "problem", {"version", "mu", "nu", "cost", "solver"});
  if (!root.contains("version")) fail("problem: missing \"version\"");
  ProblemSpec spec;
  spec.version = root["version"].get<int>();
  if (spec.version != 1) fail("problem: unsupported version");
  if (!root.contains("mu") || !root.contains("nu") || !root.contains("cost"))
    fail("problem: needs \"mu\", \"nu\" and \"cost\"");
  spec.mu = measure_from_json(root["mu"], "mu");
  spec.nu = measure_from_json(root["nu"], "nu");
  spec.cost = cost_from_json(root["cost"]);
  if (root.contains("solver")) {
    const json& s = root["solver"];
    reject_unknown(s, "solver", {"method", "gap_tol", "max_iters", "seed"});
    if (s.contains("method")) {
      const std::string m = s["method"].get<std::string>();
      if (m == "auto") spec.solver.method = SolveMethod::kAuto;
      else if (m == "lp") spec.solver.method = SolveMethod::kLp;
      else if (m == "fw") spec.solver.method = SolveMethod::kFw;
      else if (m == "closed_form") spec.solver.method = SolveMethod::kClosedForm;
      else fail("solver: unknown method \"" + m + "\"");
    }
    if (s.contains("gap_tol")) spec.solver.gap_tol = s["gap_tol"].get<double>();
    if (s.contains("max_iters"))
      spec.solver.max_iters = s["max_iters"].get<int>();
    if (s.contains("seed")) spec.seed = s["seed"].get<std::uint64_t>();
  }
  return spec;
}

ProblemSpec parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open problem file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str());
}

std::string emit_problem(const ProblemSpec& spec) {
  json root;
  root["version"] = spec.version;
  root["mu"] = measure_to_json(spec.mu);
  root["nu"] = measure_to_json(spec.nu);
  root["cost"] = cost_to_json(spec.cost);
  json solver;
  switch (spec.solver.method) {
    case SolveMethod::kAuto: solver["method"] = "auto"; break;
    case SolveMethod::kLp: solver["method"] = "lp"; break;
    case SolveMethod::kFw: solver["method"] = "fw"; break;
    case SolveMethod::kClosedForm: solver["method"] = "closed_form"; break;
  }
  solver["gap_tol"] = spec.solver.gap_tol;
  solver["max_iters"] = spec.solver.max_iters;
  solver["seed"] = spec.seed;
  root["solver"] = solver;
  return root.dump(2);
}

DiscreteMeasure parse_measure(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ParseError(e.what(), line, col);
  }
  if (!root.is_object()) fail("measure: expected a JSON object");
  reject_unknown(root, "measure", {"version", "atoms", "weights"});
  if (!root.contains("version")) fail("measure: missing \"version\"");
  json body{{"atoms", root["atoms"]}, {"weights", root["weights"]}};
  return measure_from_json(body, "measure");
}

DiscreteMeasure parse_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open measure file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_measure(buffer.str());
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_kernel_csv(std::ostream& os, const KernelPlan& plan,
                      const DiscreteMeasure& mu,
                      const Eigen::MatrixXd& y_atoms) {
  const int d = static_cast<int>(y_atoms.cols());
  os << "mu,N";
  for (int k = 0; k < d; ++k) os << ",S" << k;
  for (int j = 0; j < plan.num_y(); ++j) os << "," << j;
  os << "\n";
  const Eigen::VectorXd sizes = plan.sizes();
  const Eigen::MatrixXd s = plan.barycenters(y_atoms);
  for (int i = 0; i < plan.num_x(); ++i) {
    os << format_double(mu.weight(i)) << "," << format_double(sizes[i]);
    for (int k = 0; k < d; ++k) os << "," << format_double(s(i, k));
    for (int j = 0; j < plan.num_y(); ++j)
      os << "," << format_double(plan.q(i, j));
    os << "\n";
  }
}

KernelCsv read_kernel_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) fail("kernel csv: empty input");
  int d = 0, m = 0;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.rfind('S', 0) == 0 && cell.size() > 1 && std::isdigit(cell[1]))
        ++d;
      else if (!cell.empty() && std::isdigit(static_cast<unsigned char>(cell[0])))
        ++m;
    }
  }
  std::vector<double> mu;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) fail("kernel csv: bad number \"" + cell + "\"");
      vals.push_back(v);
    }
    if (static_cast<int>(vals.size()) != 2 + d + m)
      fail("kernel csv: wrong column count");
    mu.push_back(vals[0]);
    rows.push_back(std::vector<double>(vals.begin() + 2 + d, vals.end()));
  }
  KernelCsv out;
  out.mu = Eigen::VectorXd(mu.size());
  out.q = Eigen::MatrixXd(rows.size(), m);
  for (size_t i = 0; i < rows.size(); ++i) {
    out.mu[i] = mu[i];
    for (int j = 0; j < m; ++j) out.q(i, j) = rows[i][j];
  }
  return out;
}

void write_potential_csv(std::ostream& os, const Eigen::VectorXd& f) {
  for (int j = 0; j < f.size(); ++j)
    os << j << "," << format_double(f[j]) << "\n";
}

void write_directions(std::ostream& os, const Eigen::MatrixXd& directions) {
  for (int k = 0; k < directions.rows(); ++k) {
    for (int j = 0; j < directions.cols(); ++j) {
      if (j) os << " ";
      os << format_double(directions(k, j));
    }
    os << "\n";
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) fail("matrix csv: bad number \"" + cell + "\"");
      vals.push_back(v);
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail("matrix csv: empty input");
  Eigen::MatrixXd out(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) fail("matrix csv: ragged rows");
    for (size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

}  // namespace uwot
