#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uwot {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Golden cases with closed-form or paper-derived values: the d = 1 examples
// (linear-in-m cost, squared-mean cost, power cost with its three explicit
// kernels), the quadratic projection form and the shortest-distance identity.
std::vector<CheckResult> run_golden_suite();

// Randomized invariants (convexity, recession subadditivity, growth bounds,
// weak duality, K_c monotonicity/concavity, order-oracle agreement),
// `checks` draws per property. Deterministic under a fixed seed.
std::vector<CheckResult> run_property_suite(std::uint64_t seed, int checks = 200);

// The full acceptance battery (criteria 1-9), each at its pinned tolerance.
std::vector<CheckResult> run_acceptance_criteria(std::uint64_t seed = 42);

}  // namespace uwot
