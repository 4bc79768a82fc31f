#pragma once

// Run configuration, suite dispatch and JSON/CSV serialization for the verify tool.

#include "cdlab/verify/checks.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdlab::report {

using verify::CheckResult;
using verify::Status;
using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

// Execution order; "all" expands to every entry.
inline const std::vector<std::string>& suite_order() {
  static const std::vector<std::string> order{"algebra",    "geometry", "operators", "bochner",
                                              "cohomology", "twisted",  "bc_aeppli"};
  return order;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string manifold_path;  // empty: flat torus of dimension n
  std::string manifold_text;  // file contents, echoed verbatim
  int n = 1;
  std::vector<std::string> suites{"all"};
  std::optional<int> grid;
  std::vector<int> grid_dims;
  std::optional<int> kernel_grid;
  std::vector<int> kernel_grid_dims;
  int band = -1;
  std::uint64_t seed = 1;
  std::string twist;  // "c1,...,c2n[;k1,...,k2n,cos,sin]..."
  std::optional<int> algebra_n;
  std::optional<long> algebra_cases;
  std::optional<int> max_iter;
  std::map<std::string, double> tol_overrides;
};

inline std::vector<std::string> expand_suites(const std::vector<std::string>& req) {
  std::vector<bool> on(suite_order().size(), false);
  for (const auto& s : req) {
    if (s == "all") {
      std::fill(on.begin(), on.end(), true);
      continue;
    }
    auto it = std::find(suite_order().begin(), suite_order().end(), s);
    if (it == suite_order().end()) throw UsageError("unknown suite '" + s + "'");
    on[static_cast<std::size_t>(it - suite_order().begin())] = true;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < on.size(); ++i)
    if (on[i]) out.push_back(suite_order()[i]);
  return out;
}

inline std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(tok, &pos);
    } catch (...) {
      throw UsageError("bad number '" + tok + "' in " + what);
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size() || !std::isfinite(v)) throw UsageError("bad number '" + tok + "' in " + what);
    out.push_back(v);
  }
  return out;
}

// Constant part first, then one entry per exact mode: wave vector, cos amplitude, sin amplitude.
inline ThetaTwist parse_twist(const std::string& spec, int n) {
  ThetaTwist t;
  std::stringstream ss(spec);
  std::string part;
  std::getline(ss, part, ';');
  t.period = parse_numbers(part, "twist constant part");
  if (static_cast<int>(t.period.size()) != 2 * n)
    throw UsageError("twist constant part needs " + std::to_string(2 * n) + " values");
  while (std::getline(ss, part, ';')) {
    const auto v = parse_numbers(part, "twist mode");
    if (static_cast<int>(v.size()) != 2 * n + 2)
      throw UsageError("twist mode needs " + std::to_string(2 * n) + " integers and two amplitudes");
    ThetaTwist::Mode m;
    for (int a = 0; a < 2 * n; ++a) {
      if (v[a] != std::round(v[a])) throw UsageError("twist wave vector entries must be integers");
      m.k.push_back(static_cast<int>(v[a]));
    }
    m.cos_amp = v[2 * n];
    m.sin_amp = v[2 * n + 1];
    t.f_modes.push_back(std::move(m));
  }
  return t;
}

inline void apply_tolerance(verify::Tolerances& t, const std::string& key, double v) {
  static const std::map<std::string, double verify::Tolerances::*> fields{
      {"first_order", &verify::Tolerances::first_order},   {"second_order", &verify::Tolerances::second_order},
      {"adjoint", &verify::Tolerances::adjoint},           {"degree_shift", &verify::Tolerances::degree_shift},
      {"square_zero", &verify::Tolerances::square_zero},   {"d_theta_square", &verify::Tolerances::d_theta_square},
      {"phase", &verify::Tolerances::phase},               {"pairing_term", &verify::Tolerances::pairing_term},
      {"torsion_lee", &verify::Tolerances::torsion_lee},   {"frame", &verify::Tolerances::frame},
      {"aliasing", &verify::Tolerances::aliasing},         {"ablation_ratio", &verify::Tolerances::ablation_ratio}};
  auto it = fields.find(key);
  if (it == fields.end()) throw UsageError("unknown tolerance '" + key + "'");
  t.*(it->second) = v;
}

inline TorusHermitianStructure manifold_of(const RunConfig& rc) {
  if (rc.manifold_text.empty()) return TorusHermitianStructure::flat(rc.n);
  return parse_manifold_string(rc.manifold_text);
}

inline verify::SuiteConfig suite_config(const RunConfig& rc) {
  auto cfg = verify::SuiteConfig::defaults_for(manifold_of(rc));
  const int n = cfg.manifold.n;
  if (rc.grid) cfg.grid = *rc.grid;
  if (rc.kernel_grid) cfg.kernel_grid = *rc.kernel_grid;
  auto check_dims = [n](const std::vector<int>& d, const char* what) {
    if (!d.empty() && static_cast<int>(d.size()) != 2 * n)
      throw UsageError(std::string(what) + " needs " + std::to_string(2 * n) + " entries");
  };
  check_dims(rc.grid_dims, "--grid-dims");
  check_dims(rc.kernel_grid_dims, "--kernel-grid-dims");
  cfg.grid_dims = rc.grid_dims;
  cfg.kernel_grid_dims = rc.kernel_grid_dims;
  cfg.band = rc.band;
  cfg.seed = rc.seed;
  if (!rc.twist.empty()) cfg.twist = parse_twist(rc.twist, n);
  if (rc.algebra_n) cfg.algebra_n = *rc.algebra_n;
  if (rc.algebra_cases) cfg.algebra_random_cases = *rc.algebra_cases;
  if (rc.max_iter) cfg.kernel.max_iter = *rc.max_iter;
  for (const auto& [k, v] : rc.tol_overrides) apply_tolerance(cfg.tol, k, v);
  return cfg;
}

struct Report {
  json config;
  std::string manifold_text;
  std::vector<CheckResult> checks;
  double total_runtime_s = 0;
};

inline Status overall(const std::vector<CheckResult>& checks) {
  bool unreliable = false;
  for (const auto& c : checks) {
    if (c.status == Status::Fail) return Status::Fail;
    if (c.status == Status::Unreliable) unreliable = true;
  }
  return unreliable ? Status::Unreliable : Status::Pass;
}

inline int exit_code(Status s) {
  switch (s) {
    case Status::Pass: return 0;
    case Status::Fail: return 1;
    default: return 2;
  }
}

inline json config_echo(const RunConfig& rc, const verify::SuiteConfig& cfg) {
  json j;
  j["manifold_file"] = rc.manifold_path;
  j["n"] = cfg.manifold.n;
  j["suites"] = expand_suites(rc.suites);
  j["grid_dims"] = verify::dims_of(cfg, false);
  j["kernel_grid_dims"] = verify::dims_of(cfg, true);
  j["band"] = cfg.band;
  j["seed"] = cfg.seed;
  json tw;
  tw["constant"] = cfg.twist.period;
  tw["modes"] = json::array();
  for (const auto& m : cfg.twist.f_modes) tw["modes"].push_back({{"k", m.k}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
  j["twist"] = tw;
  j["twist_spec"] = rc.twist;
  j["algebra_n"] = cfg.algebra_n > 0 ? cfg.algebra_n : cfg.manifold.n;
  j["algebra_random_cases"] = cfg.algebra_random_cases;
  j["sections_per_bidegree"] = cfg.sections_per_bidegree;
  j["kernel"] = {{"extra", cfg.kernel.extra},
                 {"max_iter", cfg.kernel.max_iter},
                 {"residual_tol", cfg.kernel.residual_tol},
                 {"tau_rel", cfg.kernel.tau_rel},
                 {"min_gap_ratio", cfg.kernel.min_gap_ratio},
                 {"dense_threshold", cfg.kernel.dense_threshold}};
  const auto& t = cfg.tol;
  j["tolerances"] = {{"first_order", t.first_order},   {"second_order", t.second_order},
                     {"adjoint", t.adjoint},           {"degree_shift", t.degree_shift},
                     {"square_zero", t.square_zero},   {"d_theta_square", t.d_theta_square},
                     {"phase", t.phase},               {"pairing_term", t.pairing_term},
                     {"torsion_lee", t.torsion_lee},   {"frame", t.frame},
                     {"aliasing", t.aliasing},         {"ablation_ratio", t.ablation_ratio}};
  return j;
}

// Runs the requested suites in their fixed order. Geometries are built lazily and shared.
inline Report run(const RunConfig& rc) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto cfg = suite_config(rc);
  const auto suites = expand_suites(rc.suites);
  Report rep;
  rep.config = config_echo(rc, cfg);
  rep.manifold_text = rc.manifold_text;
  std::optional<verify::Geometry> geo, kgeo;
  auto G = [&]() -> const verify::Geometry& {
    if (!geo) geo = verify::build_geometry(cfg.manifold, verify::dims_of(cfg, false));
    return *geo;
  };
  auto K = [&]() -> const verify::Geometry& {
    if (!kgeo) kgeo = verify::build_geometry(cfg.manifold, verify::dims_of(cfg, true));
    return *kgeo;
  };
  for (const auto& s : suites) {
    std::vector<CheckResult> r;
    if (s == "algebra") r = verify::suite_algebra(cfg);
    else if (s == "geometry") r = verify::suite_geometry(cfg, G());
    else if (s == "operators") r = verify::suite_operators(cfg, G());
    else if (s == "bochner") r = verify::suite_bochner(cfg, G());
    else if (s == "cohomology") r = verify::suite_cohomology(cfg, K());
    else if (s == "twisted") r = verify::suite_twisted(cfg, G(), K());
    else if (s == "bc_aeppli") r = verify::suite_bc_aeppli(cfg, K());
    for (auto& c : r) rep.checks.push_back(std::move(c));
  }
  rep.total_runtime_s = std::chrono::duration<double>(clock::now() - t0).count();
  return rep;
}

inline json to_json(const CheckResult& c) {
  json j;
  j["id"] = c.id;
  j["suite"] = c.suite;
  j["anchor"] = c.anchor;
  j["kind"] = c.kind;
  j["status"] = verify::to_string(c.status);
  j["residual"] = c.residual;
  j["tolerance"] = c.tolerance;
  if (c.kind == "integer") {
    j["expected"] = c.expected;
    j["observed"] = c.observed;
    j["gap_ratio"] = c.gap_ratio;
    j["spectrum"] = c.spectrum;
  }
  j["detail"] = c.detail;
  j["runtime_s"] = c.runtime_s;
  return j;
}

inline json to_json(const Report& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "cdlab-verify";
  j["tool_version"] = kToolVersion;
  j["config"] = r.config;
  j["manifold_text"] = r.manifold_text;
  std::map<std::string, int> counts{{"pass", 0}, {"fail", 0}, {"unreliable", 0}};
  j["checks"] = json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back(to_json(c));
    ++counts[verify::to_string(c.status)];
  }
  j["summary"] = {{"checks", r.checks.size()},
                  {"pass", counts["pass"]},
                  {"fail", counts["fail"]},
                  {"unreliable", counts["unreliable"]}};
  j["overall"] = verify::to_string(overall(r.checks));
  j["total_runtime_s"] = r.total_runtime_s;
  return j;
}

// Removes every timing field; what remains is reproducible for a fixed config and seed.
inline json strip_timing(json j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      if (k == "runtime_s" || k == "total_runtime_s") continue;
      out[k] = strip_timing(it.value());
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (auto& e : j) out.push_back(strip_timing(e));
    return out;
  }
  return j;
}

// One row per eigenvalue of each integer check.
inline std::string spectra_csv(const Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "check_id,index,eigenvalue\n";
  for (const auto& c : r.checks)
    for (std::size_t i = 0; i < c.spectrum.size(); ++i) os << c.id << ',' << i << ',' << c.spectrum[i] << '\n';
  return os.str();
}

}  // namespace cdlab::report
