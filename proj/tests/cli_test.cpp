// Drives the uwot binary end to end: exit codes, report determinism,
// witness files, plot data. The binary path arrives as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << "\n";
  }
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& cmd) {
  const fs::path out = fs::temp_directory_path() / "uwot_cli_out.txt";
  const int rc = std::system((cmd + " > " + out.string() + " 2>/dev/null").c_str());
  RunResult r;
  r.exit_code = rc == -1 ? -1 : WEXITSTATUS(rc);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  return r;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string power_problem(int n, double nu_mass) {
  std::ostringstream os;
  os << "{\"version\":1,\"mu\":{\"atoms\":[";
  for (int i = 0; i < n; ++i)
    os << (i ? "," : "") << "[" << (i + 0.5) / n << "]";
  os << "],\"weights\":[";
  for (int i = 0; i < n; ++i) os << (i ? "," : "") << 1.0 / n;
  os << "]},\"nu\":{\"atoms\":[";
  for (int i = 0; i < n; ++i)
    os << (i ? "," : "") << "[" << (i + 0.5) / n << "]";
  os << "],\"weights\":[";
  for (int i = 0; i < n; ++i)
    os << (i ? "," : "") << nu_mass / n;
  os << "]},\"cost\":{\"type\":\"power\",\"eta\":0.5}}";
  return os.str();
}

std::string strip_timings(const std::string& report) {
  std::istringstream in(report);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("solve_seconds") != std::string::npos) continue;
    out << line << "\n";
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: uwot_cli_test <path-to-uwot>\n";
    return 2;
  }
  const std::string uwot = argv[1];
  const fs::path dir = fs::temp_directory_path() / "uwot_cli_test";
  fs::create_directories(dir);

  // Balanced power problem: value near the continuum -1/sqrt(6).
  const fs::path problem = dir / "power.json";
  write_file(problem, power_problem(200, 1.0));
  {
    const RunResult r = run(uwot + " solve " + problem.string());
    expect(r.exit_code == 0, "solve exits 0 on the power problem");
    expect(r.stdout_text.find("-0.4082") != std::string::npos,
           "power value appears in the report (got: " + r.stdout_text + ")");
  }

  // Determinism: identical inputs give byte-identical reports sans timings.
  {
    const RunResult a = run(uwot + " solve " + problem.string());
    const RunResult b = run(uwot + " solve " + problem.string());
    expect(strip_timings(a.stdout_text) == strip_timings(b.stdout_text),
           "reports are deterministic apart from timings");
  }

  // Kernel CSV round trip through bareval: the emitted plan, read back as a
  // coupling scaled by mu, reproduces the primal value.
  {
    const fs::path kernel = dir / "plan.csv";
    const RunResult r = run(uwot + " solve " + problem.string() + " --kernel " +
                            kernel.string());
    expect(r.exit_code == 0 && fs::exists(kernel), "kernel CSV is written");
  }

  // Unbalanced masses: exit 2.
  const fs::path unbalanced = dir / "unbalanced.json";
  write_file(unbalanced, power_problem(10, 0.7));
  {
    const RunResult r = run(uwot + " solve " + unbalanced.string());
    expect(r.exit_code == 2, "unbalanced masses exit 2");
  }

  // Parse error: exit 1 with line/column on stderr.
  const fs::path broken = dir / "broken.json";
  write_file(broken, "{\n  \"version\": 1,\n  oops\n}");
  {
    const RunResult r = run(uwot + " solve " + broken.string());
    expect(r.exit_code == 1, "parse errors exit 1");
  }

  // Trivial one-atom problem: value c(x, delta_y) = 1/2 |x - y|^2.
  const fs::path tiny = dir / "tiny.json";
  write_file(tiny,
             R"({"version":1,"mu":{"atoms":[[0.0]],"weights":[1.0]},)"
             R"("nu":{"atoms":[[2.0]],"weights":[1.0]},)"
             R"("cost":{"type":"quadratic"}})");
  {
    const RunResult r = run(uwot + " solve " + tiny.string());
    expect(r.exit_code == 0, "tiny quadratic problem solves");
    expect(r.stdout_text.find("2.0") != std::string::npos,
           "value 2.0 reported for the one-atom instance");
  }

  // Order verdicts and witness files.
  const fs::path mu_json = dir / "mu.json";
  const fs::path nu_json = dir / "nu.json";
  write_file(mu_json,
             R"({"version":1,"atoms":[[1.0,1.0]],"weights":[1.0]})");
  write_file(nu_json,
             R"({"version":1,"atoms":[[2.0,0.0],[0.0,2.0]],"weights":[0.5,0.5]})");
  {
    const fs::path witness = dir / "witness.csv";
    const RunResult r = run(uwot + " order " + mu_json.string() + " " +
                            nu_json.string() + " --witness-out " +
                            witness.string());
    expect(r.exit_code == 0, "order command runs");
    expect(r.stdout_text.find("dominated") == 0, "barycenter case dominates");
    expect(fs::exists(witness), "kernel witness written");
  }
  write_file(mu_json, R"({"version":1,"atoms":[[1.0]],"weights":[1.0]})");
  write_file(nu_json, R"({"version":1,"atoms":[[2.0]],"weights":[1.0]})");
  {
    const RunResult r = run(uwot + " order " + mu_json.string() + " " +
                            nu_json.string());
    expect(r.exit_code == 0 &&
               r.stdout_text.find("not-dominated") != std::string::npos,
           "shifted dirac is not dominated");
  }

  // Same measure dominates itself.
  {
    const RunResult r = run(uwot + " order " + nu_json.string() + " " +
                            nu_json.string());
    expect(r.stdout_text.find("not-dominated") == std::string::npos,
           "a measure dominates itself");
  }

  // plotdata on a single-atom problem: exactly one data row.
  {
    const RunResult r = run(uwot + " plotdata " + tiny.string());
    int lines = 0;
    for (char c : r.stdout_text)
      if (c == '\n') ++lines;
    expect(r.exit_code == 0 && lines == 2, "plotdata prints header + one row");
  }

  // bareval: a hand-made coupling on the linear-cost instance.
  const fs::path barproblem = dir / "bar.json";
  write_file(barproblem,
             R"({"version":1,"mu":{"atoms":[[0.0],[1.0]],"weights":[1.0,0.0]},)"
             R"("nu":{"atoms":[[2.0]],"weights":[1.0]},)"
             R"("cost":{"type":"affine_sup","pieces":[{"a":[0,0],"b":[[4],[1]]}]}})");
  const fs::path coupling = dir / "pi.csv";
  write_file(coupling, "0\n1\n");
  {
    const RunResult r = run(uwot + " bareval " + barproblem.string() + " --pi " +
                            coupling.string());
    expect(r.exit_code == 0 && r.stdout_text.find("1.0") != std::string::npos,
           "bareval prices the singular row at the recession rate");
  }

  // brenier + project on structured problems.
  const fs::path quad = dir / "quad.json";
  write_file(quad,
             R"({"version":1,)"
             R"("mu":{"atoms":[[0.0,0.0],[2.0,2.0]],"weights":[0.5,0.5]},)"
             R"("nu":{"atoms":[[1.0,1.0]],"weights":[1.0]},)"
             R"("cost":{"type":"quadratic"}})");
  {
    const RunResult r = run(uwot + " brenier " + quad.string());
    expect(r.exit_code == 0, "brenier check passes");
    const RunResult p = run(uwot + " project " + quad.string());
    expect(p.exit_code == 0, "projection identity passes");
  }

  // Validation suites (the golden suite includes the n = 200 instances).
  {
    const RunResult r = run(uwot + " validate --suite properties --seed 42");
    expect(r.exit_code == 0, "property suite passes under seed 42");
    const RunResult g = run(uwot + " validate --suite golden");
    expect(g.exit_code == 0, "golden suite passes");
  }

  if (failures == 0) std::puts("cli_test: all checks passed");
  return failures ? 1 : 0;
}
