#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwot/costs.hpp"
#include "uwot/geometry.hpp"
#include "uwot/primal.hpp"

namespace uwot {

// Parse failure with position information (1-based line/column).
struct ParseError : std::runtime_error {
  ParseError(std::string msg, int line, int column)
      : std::runtime_error(std::move(msg)), line(line), column(column) {}
  int line = 0;
  int column = 0;
};

// Named convex G for composite costs in problem files. Known names:
// square (u^2), power (u^p, p > 1), exp (e^u), neg_power (-u^eta),
// linear (a + b u).
struct GSpec {
  std::string name;
  double param = 0.0;
};

// Serializable cost description; build() instantiates the evaluator
// against the parsed measures.
struct CostSpec {
  std::string type;  // quadratic | power | sigma_norm | affine_sup |
                     // pl_conical | composite
  double eta = 0.5;
  double sigma = 1.0;
  std::vector<Eigen::MatrixXd> a_matrices;            // sigma_norm
  std::vector<AffineSupCost::Piece> affine_pieces;    // affine_sup
  std::vector<PiecewiseLinearCost::Piece> pl_pieces;  // pl_conical
  Eigen::MatrixXd fxy;                                // composite
  GSpec g;                                            // composite

  std::unique_ptr<Cost> build(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu) const;
};

struct ProblemSpec {
  int version = 1;
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  CostSpec cost;
  SolveOptions solver;
  std::uint64_t seed = 0;
};

// Strict parsing: a missing "version" or any unknown field is a ParseError.
ProblemSpec parse_problem(const std::string& text);
ProblemSpec parse_problem_file(const std::string& path);
std::string emit_problem(const ProblemSpec& spec);

DiscreteMeasure parse_measure(const std::string& text);
DiscreteMeasure parse_measure_file(const std::string& path);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

// Kernel plan CSV: a header row listing the Y atom indices, then one row
// per X atom carrying mu_i, N_i, the S_i coordinates and the Q_ij entries.
void write_kernel_csv(std::ostream& os, const KernelPlan& plan,
                      const DiscreteMeasure& mu, const Eigen::MatrixXd& y_atoms);
struct KernelCsv {
  Eigen::VectorXd mu;
  Eigen::MatrixXd q;
};
KernelCsv read_kernel_csv(std::istream& is);

// Potentials: "index,value" lines for per-atom potentials, one
// whitespace-separated d-vector per line for direction lists.
void write_potential_csv(std::ostream& os, const Eigen::VectorXd& f);
void write_directions(std::ostream& os, const Eigen::MatrixXd& directions);

// Plain numeric matrix (comma-separated, no header), used for couplings.
Eigen::MatrixXd read_matrix_csv(std::istream& is);

}  // namespace uwot
