// uwot: solver front end for unnormalized weak optimal transport between
// discrete measures. Problem files are JSON (see README); kernel plans and
// potentials are emitted as CSV. UWOT_THREADS caps internal parallelism.
//
// Exit codes: 0 success, 1 parse error, 2 infeasible, 3 numerical failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "uwot/costs.hpp"
#include "uwot/dual.hpp"
#include "uwot/order.hpp"
#include "uwot/primal.hpp"
#include "uwot/problem_io.hpp"
#include "uwot/validation.hpp"

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string method = "auto";
  double tol = 1e-9;
  std::string out;
  std::string kernel;
};

uwot::SolveMethod parse_method(const std::string& m) {
  if (m == "auto") return uwot::SolveMethod::kAuto;
  if (m == "lp") return uwot::SolveMethod::kLp;
  if (m == "fw") return uwot::SolveMethod::kFw;
  if (m == "closed_form") return uwot::SolveMethod::kClosedForm;
  throw CLI::ValidationError("--method", "unknown method " + m);
}

std::string status_string(uwot::SolveStatus s) {
  switch (s) {
    case uwot::SolveStatus::kSuccess: return "success";
    case uwot::SolveStatus::kInfeasible: return "infeasible";
    case uwot::SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

json report_to_json(const uwot::SolveReport& report, double seconds,
                    const std::string& kernel_path) {
  json doc;
  doc["status"] = status_string(report.status);
  doc["primal_value"] = report.primal_value;
  doc["dual_value"] = report.dual_value;
  doc["gap"] = report.gap;
  doc["method"] = report.method;
  doc["iterations"] = report.iterations;
  if (!report.message.empty()) doc["message"] = report.message;
  json artifacts = json::object();
  if (!kernel_path.empty()) artifacts["kernel_csv"] = kernel_path;
  doc["artifacts"] = artifacts;
  doc["timings"] = json{{"solve_seconds", seconds}};
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int exit_code_for(const uwot::SolveReport& report) {
  switch (report.status) {
    case uwot::SolveStatus::kSuccess: return kExitOk;
    case uwot::SolveStatus::kInfeasible: return kExitInfeasible;
    case uwot::SolveStatus::kNumericalFailure: return kExitNumerical;
  }
  return kExitNumerical;
}

uwot::SolveReport run_solve(const uwot::ProblemSpec& spec, const uwot::Cost& cost,
                            const CommonOpts& opts, double* seconds) {
  uwot::SolveOptions options = spec.solver;
  options.method = parse_method(opts.method);
  options.gap_tol = opts.tol;
  const auto t0 = Clock::now();
  uwot::SolveReport report = solve_primal(cost, spec.mu, spec.nu, options);
  *seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

int cmd_solve(const std::string& path, const CommonOpts& opts) {
  const uwot::ProblemSpec spec = uwot::parse_problem_file(path);
  const auto cost = spec.cost.build(spec.mu, spec.nu);
  double seconds = 0.0;
  const uwot::SolveReport report = run_solve(spec, *cost, opts, &seconds);

  std::string kernel_path;
  if (report.status == uwot::SolveStatus::kSuccess && !opts.kernel.empty()) {
    kernel_path = opts.kernel;
    std::ostringstream csv;
    uwot::write_kernel_csv(csv, report.plan, spec.mu, spec.nu.atom_matrix());
    write_text(kernel_path, csv.str());
  }
  const json doc = report_to_json(report, seconds, kernel_path);
  if (!opts.out.empty()) write_text(opts.out, doc.dump(2) + "\n");
  std::cout << doc.dump(2) << "\n";
  return exit_code_for(report);
}

int cmd_dual(const std::string& path, const CommonOpts& opts) {
  const uwot::ProblemSpec spec = uwot::parse_problem_file(path);
  const auto cost = spec.cost.build(spec.mu, spec.nu);
  double seconds = 0.0;
  const uwot::SolveReport report = run_solve(spec, *cost, opts, &seconds);
  if (report.status != uwot::SolveStatus::kSuccess)
    return exit_code_for(report);

  std::ostringstream csv;
  if (report.potential.conical)
    uwot::write_directions(csv, report.potential.directions);
  else
    uwot::write_potential_csv(csv, report.potential.f);
  if (!opts.out.empty()) write_text(opts.out, csv.str());

  json doc;
  doc["dual_value"] = report.dual_value;
  doc["primal_value"] = report.primal_value;
  doc["gap"] = report.gap;
  doc["potential_kind"] = report.potential.conical ? "directions" : "values";
  if (opts.out.empty()) doc["potential_csv_inline"] = csv.str();
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_order(const std::string& mu_path, const std::string& nu_path,
              double tol, const std::string& witness_out) {
  const uwot::DiscreteMeasure mu = uwot::parse_measure_file(mu_path);
  const uwot::DiscreteMeasure nu = uwot::parse_measure_file(nu_path);
  if (mu.dim() != nu.dim()) {
    std::cerr << "error: measures live in different dimensions\n";
    return kExitInfeasible;
  }
  const uwot::PhcWitness witness = uwot::check_phc_order(mu, nu, tol);
  std::cout << (witness.dominated ? "dominated" : "not-dominated") << "\n";
  if (!witness_out.empty()) {
    std::ostringstream os;
    if (witness.dominated) {
      uwot::write_kernel_csv(os, witness.kernel, mu, nu.atom_matrix());
    } else if (witness.separator) {
      uwot::write_directions(os, witness.separator->directions);
    }
    write_text(witness_out, os.str());
  }
  if (!witness.dominated && !witness.certified) {
    std::cerr << "warning: " << witness.message << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_project(const std::string& path, double tol) {
  const uwot::ProblemSpec spec = uwot::parse_problem_file(path);
  const auto cost = spec.cost.build(spec.mu, spec.nu);
  const auto* conical = dynamic_cast<const uwot::ConicalCost*>(cost.get());
  if (!conical) {
    std::cerr << "error: project needs a conical cost\n";
    return kExitNumerical;
  }
  const uwot::ProjectionReport report =
      uwot::project_phc(*conical, spec.mu, spec.nu, tol);
  json doc;
  doc["pass"] = report.pass;
  doc["primal_value"] = report.primal_value;
  doc["transport_value"] = report.transport_value;
  doc["mismatch"] = report.mismatch;
  doc["order_ok"] = report.order_ok;
  if (!report.message.empty()) doc["message"] = report.message;
  std::cout << doc.dump(2) << "\n";
  return report.pass ? kExitOk : kExitNumerical;
}

int cmd_brenier(const std::string& path, double tol) {
  const uwot::ProblemSpec spec = uwot::parse_problem_file(path);
  if (spec.cost.type != "quadratic") {
    std::cerr << "error: brenier needs the quadratic cost\n";
    return kExitNumerical;
  }
  const uwot::BrenierReport report = uwot::brenier_check(spec.mu, spec.nu, tol);
  json doc;
  doc["pass"] = report.pass;
  doc["max_violation"] = report.max_violation;
  if (!report.message.empty()) doc["message"] = report.message;
  std::cout << doc.dump(2) << "\n";
  return report.pass ? kExitOk : kExitNumerical;
}

int cmd_validate(const std::string& suite, std::uint64_t seed) {
  std::vector<uwot::CheckResult> results;
  if (suite == "golden" || suite == "all") {
    const auto golden = uwot::run_golden_suite();
    results.insert(results.end(), golden.begin(), golden.end());
  }
  if (suite == "properties" || suite == "all") {
    const auto props = uwot::run_property_suite(seed);
    results.insert(results.end(), props.begin(), props.end());
  }
  if (results.empty()) {
    std::cerr << "error: unknown suite \"" << suite << "\"\n";
    return kExitParse;
  }
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
    if (!r.detail.empty()) std::cout << "  [" << r.detail << "]";
    std::cout << "\n";
    if (!r.pass) ++failures;
  }
  std::cout << (failures ? "FAILED" : "OK") << " (" << results.size() - failures
            << "/" << results.size() << ")\n";
  return failures ? kExitNumerical : kExitOk;
}

int cmd_plotdata(const std::string& path, const CommonOpts& opts) {
  const uwot::ProblemSpec spec = uwot::parse_problem_file(path);
  const auto cost = spec.cost.build(spec.mu, spec.nu);
  double seconds = 0.0;
  const uwot::SolveReport report = run_solve(spec, *cost, opts, &seconds);
  if (report.status != uwot::SolveStatus::kSuccess)
    return exit_code_for(report);

  std::ostringstream os;
  const int d = spec.mu.dim();
  const int dy = spec.nu.dim();
  // Columns: x coordinates, mu weight, hired mass N, barycenter S, then the
  // support atom carrying the largest share of the row.
  for (int k = 0; k < d; ++k) os << "x" << k << ",";
  os << "mu,N";
  for (int k = 0; k < dy; ++k) os << ",S" << k;
  os << ",argmax_atom";
  for (int k = 0; k < dy; ++k) os << ",T" << k;
  os << "\n";
  const Eigen::VectorXd sizes = report.plan.sizes();
  const Eigen::MatrixXd s = report.plan.barycenters(spec.nu.atom_matrix());
  for (int i = 0; i < spec.mu.size(); ++i) {
    for (int k = 0; k < d; ++k)
      os << uwot::format_double(spec.mu.atom(i)[k]) << ",";
    os << uwot::format_double(spec.mu.weight(i)) << ","
       << uwot::format_double(sizes[i]);
    for (int k = 0; k < dy; ++k) os << "," << uwot::format_double(s(i, k));
    int arg = 0;
    report.plan.q.row(i).maxCoeff(&arg);
    os << "," << arg;
    for (int k = 0; k < dy; ++k)
      os << "," << uwot::format_double(spec.nu.atom(arg)[k]);
    os << "\n";
  }
  if (!opts.out.empty())
    write_text(opts.out, os.str());
  else
    std::cout << os.str();
  return kExitOk;
}

int cmd_bareval(const std::string& path, const std::string& pi_path) {
  const uwot::ProblemSpec spec = uwot::parse_problem_file(path);
  const auto cost = spec.cost.build(spec.mu, spec.nu);
  std::ifstream in(pi_path);
  if (!in) {
    std::cerr << "error: cannot open coupling file " << pi_path << "\n";
    return kExitParse;
  }
  uwot::CouplingPlan pi;
  pi.pi = uwot::read_matrix_csv(in);
  if (pi.pi.rows() != spec.mu.size() || pi.pi.cols() != spec.nu.size()) {
    std::cerr << "error: coupling shape does not match the measures\n";
    return kExitParse;
  }
  const double value = uwot::eval_bar_i(*cost, spec.mu, pi);
  json doc;
  if (value == uwot::kInf)
    doc["bar_I"] = "inf";
  else
    doc["bar_I"] = value;
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "uwot: unnormalized weak optimal transport between discrete measures"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string problem_path, mu_path, nu_path, pi_path, witness_out;
  std::string suite = "all";
  std::uint64_t seed = 42;
  double tol = 1e-7;

  auto* solve = app.add_subcommand("solve", "solve a problem file");
  solve->add_option("problem", problem_path)->required();
  solve->add_option("--method", opts.method, "auto|lp|fw|closed_form");
  solve->add_option("--tol", opts.tol, "gap tolerance");
  solve->add_option("--out", opts.out, "report JSON path");
  solve->add_option("--kernel", opts.kernel, "kernel plan CSV path");

  auto* dual = app.add_subcommand("dual", "solve and emit the dual potential");
  dual->add_option("problem", problem_path)->required();
  dual->add_option("--method", opts.method);
  dual->add_option("--tol", opts.tol);
  dual->add_option("--out", opts.out, "potential CSV path");

  auto* order = app.add_subcommand("order", "phc-order check between measures");
  order->add_option("mu", mu_path)->required();
  order->add_option("nu", nu_path)->required();
  order->add_option("--tol", tol);
  order->add_option("--witness-out", witness_out, "kernel or direction CSV");

  auto* project = app.add_subcommand("project", "shortest-distance identity");
  project->add_option("problem", problem_path)->required();
  project->add_option("--tol", tol);

  auto* brenier = app.add_subcommand("brenier", "projection-form check");
  brenier->add_option("problem", problem_path)->required();
  brenier->add_option("--tol", tol);

  auto* validate = app.add_subcommand("validate", "golden and property suites");
  validate->add_option("--suite", suite, "golden|properties|all");
  validate->add_option("--seed", seed);

  auto* plotdata = app.add_subcommand("plotdata", "per-atom solution profile");
  plotdata->add_option("problem", problem_path)->required();
  plotdata->add_option("--method", opts.method);
  plotdata->add_option("--tol", opts.tol);
  plotdata->add_option("--out", opts.out);

  auto* bareval = app.add_subcommand("bareval",
                                     "evaluate the extended functional");
  bareval->add_option("problem", problem_path)->required();
  bareval->add_option("--pi", pi_path, "coupling CSV (plain matrix)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(problem_path, opts);
    if (dual->parsed()) return cmd_dual(problem_path, opts);
    if (order->parsed()) return cmd_order(mu_path, nu_path, tol, witness_out);
    if (project->parsed()) return cmd_project(problem_path, tol);
    if (brenier->parsed()) return cmd_brenier(problem_path, tol);
    if (validate->parsed()) return cmd_validate(suite, seed);
    if (plotdata->parsed()) return cmd_plotdata(problem_path, opts);
    if (bareval->parsed()) return cmd_bareval(problem_path, pi_path);
  } catch (const uwot::ParseError& e) {
    std::cerr << "parse error";
    if (e.line > 0) std::cerr << " at line " << e.line << ", column " << e.column;
    std::cerr << ": " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
