// verify: run certification suites on a Hermitian torus and write a JSON report.
// Exit codes: 0 pass, 1 fail, 2 unreliable, 3 usage or parse error.

#include "cdlab/report/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<int> parse_dims(const std::string& s, const char* what) {
  std::vector<int> out;
  for (double v : cdlab::report::parse_numbers(s, what)) {
    if (v != std::round(v) || v < 2) throw cdlab::report::UsageError(std::string(what) + ": entries must be integers >= 2");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cdlab::report;
  CLI::App app{"Chern-Dirac verification laboratory"};
  RunConfig rc;
  std::string grid_dims, kernel_grid_dims, report_path, spectra_path;
  std::vector<std::string> tol;
  int grid = 0, kernel_grid = 0, algebra_n = 0, max_iter = 0;
  long algebra_cases = 0;
  bool quiet = false;

  app.add_option("--manifold", rc.manifold_path, "manifold description file (default: flat torus)");
  app.add_option("--n", rc.n, "complex dimension of the flat torus when no manifold file is given")->check(CLI::Range(1, 4));
  app.add_option("--suite", rc.suites, "suites: algebra geometry operators bochner cohomology twisted bc_aeppli all")
      ->expected(1, -1);
  app.add_option("--grid", grid, "points per real axis for the identity checks")->check(CLI::Range(2, 512));
  app.add_option("--grid-dims", grid_dims, "comma-separated points per real axis (overrides --grid)");
  app.add_option("--kernel-grid", kernel_grid, "points per real axis for kernel computations")->check(CLI::Range(2, 512));
  app.add_option("--kernel-grid-dims", kernel_grid_dims, "comma-separated kernel grid (overrides --kernel-grid)");
  app.add_option("--band", rc.band, "band of random test sections (-1: automatic)")->check(CLI::Range(-1, 256));
  app.add_option("--seed", rc.seed, "random seed");
  app.add_option("--twist", rc.twist, "closed twist: \"c1,...,c2n[;k1,...,k2n,cos,sin]...\"");
  app.add_option("--algebra-n", algebra_n, "dimension for the algebra suite")->check(CLI::Range(1, 4));
  app.add_option("--algebra-cases", algebra_cases, "random cases per algebra check when n >= 4")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", max_iter, "eigensolver iteration budget")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "tolerance override name=value (repeatable)");
  app.add_option("--report", report_path, "JSON report path (default: stdout)");
  app.add_option("--spectra", spectra_path, "CSV of kernel spectra");
  app.add_flag("--quiet", quiet, "no per-check summary on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  cdlab::verify::Status status;
  try {
    if (grid) rc.grid = grid;
    if (kernel_grid) rc.kernel_grid = kernel_grid;
    if (algebra_n) rc.algebra_n = algebra_n;
    if (algebra_cases) rc.algebra_cases = algebra_cases;
    if (max_iter) rc.max_iter = max_iter;
    if (!grid_dims.empty()) rc.grid_dims = parse_dims(grid_dims, "--grid-dims");
    if (!kernel_grid_dims.empty()) rc.kernel_grid_dims = parse_dims(kernel_grid_dims, "--kernel-grid-dims");
    for (const auto& t : tol) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw UsageError("--tol expects name=value, got '" + t + "'");
      const auto v = parse_numbers(t.substr(eq + 1), "--tol");
      if (v.size() != 1) throw UsageError("--tol expects one value");
      rc.tol_overrides[t.substr(0, eq)] = v[0];
    }
    if (!rc.manifold_path.empty()) {
      std::ifstream f(rc.manifold_path, std::ios::binary);
      if (!f) throw UsageError("cannot open manifold file '" + rc.manifold_path + "'");
      std::ostringstream ss;
      ss << f.rdbuf();
      rc.manifold_text = ss.str();
    }
    // validate everything before any suite runs
    cdlab::verify::SuiteConfig probe = suite_config(rc);
    (void)probe;
    expand_suites(rc.suites);

    const Report rep = run(rc);
    const std::string text = to_json(rep).dump(2) + "\n";
    if (report_path.empty()) {
      std::cout << text;
    } else if (!write_file(report_path, text)) {
      std::cerr << "verify: cannot write report '" << report_path << "'\n";
      return 3;
    }
    if (!spectra_path.empty() && !write_file(spectra_path, spectra_csv(rep))) {
      std::cerr << "verify: cannot write spectra '" << spectra_path << "'\n";
      return 3;
    }
    if (!quiet)
      for (const auto& c : rep.checks) std::cerr << cdlab::verify::to_string(c.status) << "  " << c.id << "\n";
    status = overall(rep.checks);
    std::cerr << "overall: " << cdlab::verify::to_string(status) << "\n";
  } catch (const cdlab::ParseError& e) {
    std::cerr << "verify: " << rc.manifold_path << ": " << e.what() << "\n";
    return 3;
  } catch (const UsageError& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return 3;
  } catch (const cdlab::NotPositiveDefinite& e) {
    std::cerr << "verify: invalid manifold: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "verify: invalid configuration: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "verify: error: " << e.what() << "\n";
    return 3;
  }
  return exit_code(status);
}
