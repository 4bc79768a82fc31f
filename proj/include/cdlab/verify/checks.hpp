#pragma once

#include "cdlab/geometry/connection.hpp"
#include "cdlab/geometry/frames.hpp"
#include "cdlab/ops/bochner.hpp"
#include "cdlab/ops/eigensolver.hpp"
#include "cdlab/ops/forms.hpp"
#include "cdlab/verify/algebra_checks.hpp"
#include "cdlab/verify/fourier_oracle.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace cdlab::verify {

enum class Status { Pass, Fail, Unreliable };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    default: return "unreliable";
  }
}

struct CheckResult {
  std::string id;
  std::string suite;
  std::string anchor;  // which statement is being certified
  std::string kind;    // "residual", "integer" or "exact"
  Status status = Status::Fail;
  double residual = 0;
  double tolerance = 0;
  long expected = 0;
  long observed = 0;
  double gap_ratio = 0;
  std::vector<double> spectrum;
  std::string detail;
  double runtime_s = 0;
};

struct Tolerances {
  double first_order = 1e-6;
  double second_order = 1e-5;
  double adjoint = 1e-8;
  double degree_shift = 1e-9;
  double square_zero = 1e-7;
  double d_theta_square = 1e-9;
  double phase = 1e-12;
  double pairing_term = 1e-10;
  double torsion_lee = 1e-8;
  double frame = 1e-10;
  double aliasing = 1e-11;
  double ablation_ratio = 1e3;
};

struct SuiteConfig {
  TorusHermitianStructure manifold = TorusHermitianStructure::flat(1);
  std::vector<int> grid_dims;         // per real axis; empty: grid in every direction
  int grid = 12;
  std::vector<int> kernel_grid_dims;  // grid for eigenvalue problems; empty: kernel_grid isotropic
  int kernel_grid = 8;
  int band = -1;                      // band of random test sections; -1: max(1, B/3)
  std::uint64_t seed = 1;
  int sections_per_bidegree = 20;
  int bochner_sections = 2;
  int adjoint_pairs = 5;
  ThetaTwist twist;                   // closed twist for the twisted suite
  ThetaTwist exact_twist;             // exact twist compared against the untwisted counts
  int algebra_n = 0;                  // 0: the manifold dimension
  long algebra_random_cases = 1000;
  KernelOptions kernel;
  Tolerances tol;

  static SuiteConfig defaults_for(const TorusHermitianStructure& m) {
    SuiteConfig c;
    c.manifold = m;
    c.kernel_grid = m.n == 1 ? 12 : 8;
    c.twist.period.assign(2 * m.n, 0.0);
    c.twist.period[0] = 0.37;
    std::vector<int> k(2 * m.n, 0);
    k[0] = 1;
    c.exact_twist.f_modes = {{k, 0.0, 0.2}};
    return c;
  }
};

// Grid, frames, connection and operator context for one metric on one grid.
struct Geometry {
  std::shared_ptr<Grid> grid;
  std::shared_ptr<FrameFieldGrid> frames;
  std::shared_ptr<ConnectionTorsionGrid> ct;
  std::shared_ptr<const OpContext> ctx;
};

inline Geometry build_geometry(const TorusHermitianStructure& m, std::vector<int> dims) {
  Geometry g;
  g.grid = std::make_shared<Grid>(m.n, std::move(dims));
  g.frames = std::make_shared<FrameFieldGrid>(build_frames(m, g.grid));
  g.ct = std::make_shared<ConnectionTorsionGrid>(chern_connection(g.frames));
  g.ctx = make_context(g.ct);
  return g;
}
inline std::vector<int> dims_of(const SuiteConfig& c, bool kernel) {
  const auto& d = kernel ? c.kernel_grid_dims : c.grid_dims;
  if (!d.empty()) return d;
  return std::vector<int>(2 * c.manifold.n, kernel ? c.kernel_grid : c.grid);
}
inline int section_band(const SuiteConfig& c, const Grid& g) {
  if (c.band >= 0) return c.band;
  int b = std::numeric_limits<int>::max();
  for (int a = 0; a < g.real_dim(); ++a) b = std::min(b, g.max_band(a));
  return std::max(1, b / 3);
}

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}


// FNV-1a, so seeds are stable across platforms and standard libraries.
inline std::uint64_t seed_for(std::uint64_t base, const std::string& tag, std::uint64_t k = 0) {
  std::uint64_t h = 1469598103934665603ULL;
  auto word = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) h = (h ^ ((v >> (8 * i)) & 0xff)) * 1099511628211ULL;
  };
  word(base);
  for (unsigned char ch : tag) h = (h ^ ch) * 1099511628211ULL;
  word(k);
  return h;
}

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline CheckResult residual_result(std::string id, std::string suite, std::string anchor, double residual, double tol,
                                   std::string detail = {}) {
  CheckResult r;
  r.id = std::move(id);
  r.suite = std::move(suite);
  r.anchor = std::move(anchor);
  r.kind = "residual";
  r.residual = residual;
  r.tolerance = tol;
  r.status = (std::isfinite(residual) && residual <= tol) ? Status::Pass : Status::Fail;
  r.detail = std::move(detail);
  return r;
}

inline CheckResult kernel_result(std::string id, std::string suite, std::string anchor, long expected,
                                 const KernelReport& rep, double min_gap) {
  CheckResult r;
  r.id = std::move(id);
  r.suite = std::move(suite);
  r.anchor = std::move(anchor);
  r.kind = "integer";
  r.expected = expected;
  r.observed = rep.kernel_dim;
  r.gap_ratio = rep.gap_ratio;
  r.spectrum = rep.eigenvalues;
  r.tolerance = min_gap;
  if (rep.unreliable || !(rep.gap_ratio >= min_gap))
    r.status = Status::Unreliable;
  else
    r.status = rep.kernel_dim == expected ? Status::Pass : Status::Fail;
  r.detail = rep.method + ", " + std::to_string(rep.applies) + " applies, tau = " + detail::sci(rep.tau) +
             (rep.note.empty() ? "" : ", " + rep.note);
  return r;
}

inline double rel_diff(const Grid& g, int dim, const Vec& a, const Vec& b, const Vec& scale_ref) {
  const double s = std::max({norm(g, dim, a), norm(g, dim, b), norm(g, dim, scale_ref)});
  return s == 0 ? 0.0 : norm(g, dim, a - b) / s;
}

inline double sup_norm(const ScalarField& f) {
  double m = 0;
  for (const auto& v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------------------------
// algebra

inline std::vector<CheckResult> suite_algebra(const SuiteConfig& cfg) {
  const int n = cfg.algebra_n > 0 ? cfg.algebra_n : cfg.manifold.n;
  std::vector<CheckResult> out;
  const char* anchors[] = {"Clifford relations of the real generators", "graded isomorphism between Clifford algebra and exterior algebra",
                           "anticommutators of the complex generators", "eigenstructure of the Kahler form on spinors",
                           "products of one-forms with the spinor vacua", "chi is a bigraded bijection V -> End(S)",
                           "closed form of the product of decomposable V-elements"};
  auto tallies = algebra::run_all(n, cfg.algebra_random_cases, cfg.seed);
  for (std::size_t i = 0; i < tallies.size(); ++i) {
    const auto& t = tallies[i];
    CheckResult r;
    r.id = "algebra." + t.id + ".n" + std::to_string(n);
    r.suite = "algebra";
    r.anchor = anchors[i];
    r.kind = "exact";
    r.expected = 0;
    r.observed = t.failures;
    r.residual = static_cast<double>(t.failures);
    r.status = t.failures == 0 && t.cases > 0 ? Status::Pass : Status::Fail;
    r.detail = std::to_string(t.cases) + (t.exhaustive ? " cases, exhaustive on bases" : " randomized cases") +
               (t.failures ? "; first failure " + t.first_failure : "");
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// geometry

inline std::vector<CheckResult> suite_geometry(const SuiteConfig& cfg, const Geometry& geo) {
  std::vector<CheckResult> out;
  const auto& fr = *geo.frames;
  const auto& ct = *geo.ct;
  const int n = fr.n;
  {
    detail::Timer tm;
    double res = 0;
    for (std::size_t i = 0; i < fr.npts(); ++i) {
      const Eigen::MatrixXcd herm = fr.V[i].transpose() * fr.g[i] * fr.V[i].conjugate();
      const Eigen::MatrixXcd same = fr.V[i].transpose() * fr.g[i] * fr.V[i];
      res = std::max({res, (herm - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), same.cwiseAbs().maxCoeff()});
    }
    out.push_back(detail::residual_result("geometry.frame_unitary", "geometry", "unitary frame of type (1,0)", res, cfg.tol.frame));
    out.back().runtime_s = tm.seconds();
  }
  {
    detail::Timer tm;
    const double res = std::max(ct.type_residual, ct.torsion_type_residual);
    out.push_back(detail::residual_result("geometry.chern_type", "geometry",
                                          "Chern connection preserves type and its torsion has type (2,0)", res, cfg.tol.frame));
    out.back().runtime_s = tm.seconds();
  }
  {
    detail::Timer tm;
    const double res = metric_aliasing_indicator(fr);
    out.push_back(detail::residual_result("geometry.band_resolved", "geometry", "metric and frame resolved by the grid", res,
                                          cfg.tol.aliasing));
    out.back().runtime_s = tm.seconds();
  }
  {
    detail::Timer tm;
    const auto other = lee_form_codifferential(ct);
    double res = 0, scale = 0;
    for (std::size_t k = 0; k < other.size(); ++k) {
      res = std::max(res, std::abs(other[k] - ct.lee[k]));
      scale = std::max(scale, std::abs(ct.lee[k]));
    }
    out.push_back(detail::residual_result("geometry.lee_two_routes", "geometry", "Lee form as torsion trace and as -J d*omega",
                                          res / std::max(scale, 1.0), cfg.tol.first_order));
    out.back().runtime_s = tm.seconds();
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// operators

// Max relative residual of sigma^{-1} A sigma = sqrt2 T for the four partial operators, over random forms of every
// bidegree. phase rotates the vacuum used to build sigma.
inline std::array<double, 4> sigma_conjugation_residuals(const SuiteConfig& cfg, const Geometry& geo, const Twist& tw,
                                                         int per_bidegree, cd phase = 1.0) {
  const OpContext& c = *geo.ctx;
  const int n = c.n;
  const int band = section_band(cfg, *geo.grid);
  const FormOps fo = assemble_form_ops(c, FormRoute::Spectral, tw);
  const OpPtr targets[4] = {fo.del, fo.del_star, fo.delbar_star, fo.delbar};
  const PartialCD which[4] = {PartialCD::DpL, PartialCD::DppL, PartialCD::DpR, PartialCD::DppR};
  const OpPtr sig = scale(phase, sigma_op(c)), sig_inv = scale(1.0 / phase, sigma_inv_op(c));
  std::array<double, 4> res{};
  for (int w = 0; w < 4; ++w) {
    const OpPtr A = compose({sig_inv, assemble_partial_cd(which[w], c, tw), sig});
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q)
        for (int s = 0; s < per_bidegree; ++s) {
          const Vec eta = random_section(*geo.grid, c.dim, band,
                                         detail::seed_for(cfg.seed, "sigma", static_cast<std::uint64_t>((p * 8 + q) * 1000 + s)),
                                         bidegree_mask(n, Bundle::Forms, p, q));
          const Vec lhs = A->apply(eta);
          const Vec rhs = std::numbers::sqrt2 * targets[w]->apply(eta);
          res[w] = std::max(res[w], detail::rel_diff(*geo.grid, c.dim, lhs, rhs, eta));
        }
  }
  return res;
}

inline std::vector<CheckResult> check_sigma_conjugation(const SuiteConfig& cfg, const Geometry& geo, const Twist& tw,
                                                        const std::string& suite, const std::string& prefix) {
  detail::Timer tm;
  const auto res = sigma_conjugation_residuals(cfg, geo, tw, cfg.sections_per_bidegree);
  const char* names[4] = {"del", "del_star", "delbar_star", "delbar"};
  const char* anchors[4] = {"D'L conjugates to sqrt2 del", "D''L conjugates to sqrt2 del*", "D'R conjugates to sqrt2 delbar*",
                            "D''R conjugates to sqrt2 delbar"};
  std::vector<CheckResult> out;
  const int nb = (geo.ctx->n + 1) * (geo.ctx->n + 1);
  for (int w = 0; w < 4; ++w) {
    out.push_back(detail::residual_result(prefix + ".sigma_conjugation." + names[w], suite, anchors[w], res[w], cfg.tol.first_order,
                                          std::to_string(cfg.sections_per_bidegree) + " sections per bidegree, " +
                                              std::to_string(nb) + " bidegrees"));
    out.back().runtime_s = tm.seconds() / 4;
  }
  return out;
}

// Phase-rotated vacuum leaves the conjugation residuals unchanged.
inline CheckResult check_phase_invariance(const SuiteConfig& cfg, const Geometry& geo) {
  detail::Timer tm;
  const auto a = sigma_conjugation_residuals(cfg, geo, {}, 2);
  const auto b = sigma_conjugation_residuals(cfg, geo, {}, 2, std::polar(1.0, 0.7));
  double d = 0;
  for (int w = 0; w < 4; ++w) d = std::max(d, std::abs(a[w] - b[w]));
  auto r = detail::residual_result("operators.phase_invariance", "operators", "conjugation identities independent of the vacuum phase",
                                   d, cfg.tol.phase);
  r.runtime_s = tm.seconds();
  return r;
}

// |<A s1, s2>_w - <s1, B s2>_w| / (|s1| |s2|), max over random pairs.
inline double adjoint_residual(const SuiteConfig& cfg, const Geometry& geo, const OpPtr& A, const OpPtr& B,
                               const ScalarField& w, const std::string& tag) {
  const Grid& g = *geo.grid;
  const int dim = A->dim_in();
  const int band = section_band(cfg, g);
  double res = 0;
  for (int k = 0; k < cfg.adjoint_pairs; ++k) {
    const Vec s1 = random_section(g, dim, band, detail::seed_for(cfg.seed, tag + "1", k));
    const Vec s2 = random_section(g, dim, band, detail::seed_for(cfg.seed, tag + "2", k));
    const cd lhs = inner(g, dim, A->apply(s1), s2, w);
    const cd rhs = inner(g, dim, s1, B->apply(s2), w);
    res = std::max(res, std::abs(lhs - rhs) / (norm(g, dim, s1, w) * norm(g, dim, s2, w)));
  }
  return res;
}

// Adjoint pairs D'L/D''L, D'R/D''R, del/del* and delbar/delbar*. For a twist the second operator carries the partner
// twist -conj(alpha); with a metric-compatible twist (weight present) both carry alpha and the product is weighted.
inline std::vector<CheckResult> check_adjointness(const SuiteConfig& cfg, const Geometry& geo, const Twist& tw,
                                                  const std::string& suite, const std::string& prefix) {
  const OpContext& c = *geo.ctx;
  const bool self = !tw.weight.empty();
  const Twist other = (tw.empty() || self) ? tw : tw.partner();
  const ScalarField w = section_density(c, self ? tw : Twist{});
  const FormOps fa = assemble_form_ops(c, FormRoute::Lemma, tw);
  const FormOps fb = assemble_form_ops(c, FormRoute::Lemma, other);
  struct Pair {
    const char* name;
    const char* anchor;
    OpPtr A, B;
  };
  const Pair pairs[4] = {
      {"L", "D'L and D''L are formal adjoints", assemble_partial_cd(PartialCD::DpL, c, tw), assemble_partial_cd(PartialCD::DppL, c, other)},
      {"R", "D'R and D''R are formal adjoints", assemble_partial_cd(PartialCD::DpR, c, tw), assemble_partial_cd(PartialCD::DppR, c, other)},
      {"del", "del and del* are formal adjoints", fa.del, fb.del_star},
      {"delbar", "delbar and delbar* are formal adjoints", fa.delbar, fb.delbar_star}};
  std::vector<CheckResult> out;
  for (const auto& p : pairs) {
    detail::Timer tm;
    const double r = adjoint_residual(cfg, geo, p.A, p.B, w, prefix + p.name);
    out.push_back(detail::residual_result(prefix + ".adjoint." + p.name, suite, p.anchor, r, cfg.tol.adjoint,
                                          self ? "weighted product of the twist" : (tw.empty() ? "" : "partner twist")));
    out.back().runtime_s = tm.seconds();
  }
  return out;
}

inline CheckResult check_form_routes(const SuiteConfig& cfg, const Geometry& geo) {
  detail::Timer tm;
  const OpContext& c = *geo.ctx;
  const FormOps a = assemble_form_ops(c, FormRoute::Lemma), b = assemble_form_ops(c, FormRoute::Spectral);
  const std::pair<OpPtr, OpPtr> ops[4] = {{a.del, b.del}, {a.delbar, b.delbar}, {a.del_star, b.del_star}, {a.delbar_star, b.delbar_star}};
  double res = 0;
  const int band = section_band(cfg, *geo.grid);
  for (int k = 0; k < 4; ++k) {
    const Vec eta = random_section(*geo.grid, c.dim, band, detail::seed_for(cfg.seed, "routes", k));
    for (const auto& [x, y] : ops) res = std::max(res, detail::rel_diff(*geo.grid, c.dim, x->apply(eta), y->apply(eta), eta));
  }
  auto r = detail::residual_result("operators.form_routes", "operators",
                                   "connection-and-torsion formulas for del, delbar and adjoints agree with coordinate d",
                                   res, cfg.tol.first_order, "4 random forms, 4 operators");
  r.runtime_s = tm.seconds();
  return r;
}

// D'L raises p, D''L lowers p, D'R lowers q, D''R raises q.
inline CheckResult check_degree_shifts(const SuiteConfig& cfg, const Geometry& geo) {
  detail::Timer tm;
  const OpContext& c = *geo.ctx;
  const int n = c.n;
  const int band = section_band(cfg, *geo.grid);
  const std::pair<PartialCD, std::pair<int, int>> shifts[4] = {
      {PartialCD::DpL, {1, 0}}, {PartialCD::DppL, {-1, 0}}, {PartialCD::DpR, {0, -1}}, {PartialCD::DppR, {0, 1}}};
  double res = 0;
  for (const auto& [w, dpq] : shifts) {
    const OpPtr A = assemble_partial_cd(w, c);
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q) {
        const Vec s = random_section(*geo.grid, c.dim, band, detail::seed_for(cfg.seed, "shift", p * 8 + q),
                                     bidegree_mask(n, Bundle::V, p, q));
        Vec y = A->apply(s);
        const double total = y.norm();
        const auto keep = bidegree_mask(n, Bundle::V, p + dpq.first, q + dpq.second);
        const std::size_t np = c.npts();
        for (int k = 0; k < c.dim; ++k)
          if (keep[k]) y.segment(static_cast<Eigen::Index>(k * np), static_cast<Eigen::Index>(np)).setZero();
        if (total > 0) res = std::max(res, y.norm() / total);
      }
  }
  auto r = detail::residual_result("operators.degree_shifts", "operators", "partial operators shift the bidegree of V by one",
                                   res, cfg.tol.degree_shift);
  r.runtime_s = tm.seconds();
  return r;
}

// (D'L)^2 = 0 and (D''R)^2 = 0, relative to |A s|^2 / |s|.
inline CheckResult check_square_zero(const SuiteConfig& cfg, const Geometry& geo) {
  detail::Timer tm;
  const OpContext& c = *geo.ctx;
  const int band = section_band(cfg, *geo.grid);
  const OpPtr P = band_projection(c, Bundle::V, -1);
  double res = 0;
  for (PartialCD w : {PartialCD::DpL, PartialCD::DppR}) {
    const OpPtr A = assemble_partial_cd(w, c);
    for (int k = 0; k < 3; ++k) {
      const Vec s = random_section(*geo.grid, c.dim, band, detail::seed_for(cfg.seed, "square", k));
      const Vec As = A->apply(s);
      const Vec AAs = A->apply(P->apply(As));
      const double scale = As.squaredNorm() / s.norm();
      if (scale > 0) res = std::max(res, AAs.norm() / scale);
    }
  }
  auto r = detail::residual_result("operators.square_zero", "operators", "D'L and D''R square to zero", res, cfg.tol.square_zero);
  r.runtime_s = tm.seconds();
  return r;
}

inline std::vector<CheckResult> suite_operators(const SuiteConfig& cfg, const Geometry& geo) {
  std::vector<CheckResult> out = check_sigma_conjugation(cfg, geo, {}, "operators", "operators");
  out.push_back(check_phase_invariance(cfg, geo));
  for (auto& r : check_adjointness(cfg, geo, {}, "operators", "operators")) out.push_back(std::move(r));
  out.push_back(check_form_routes(cfg, geo));
  out.push_back(check_degree_shifts(cfg, geo));
  out.push_back(check_square_zero(cfg, geo));
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// Bochner formulas

// Residuals of the stated formulas and of the corrected forms (n <= 2), relative to |D^2 sigma|.
struct BochnerResiduals {
  double square_prime = 0, square_dprime = 0;
  double full_stated = 0, hat_stated = 0, surface_stated = 0;
  double full_corrected = 0, hat_corrected = 0, surface_corrected = 0;
  double full_corrected_without_T2 = 0;
};

inline BochnerResiduals bochner_residuals(const SuiteConfig& cfg, const Geometry& geo, Side side) {
  const BochnerOps b(geo.ctx, side);
  const Grid& g = *geo.grid;
  const int dim = geo.ctx->dim;
  const int band = section_band(cfg, g);
  const OpPtr D = b.dirac(), Dp = b.dirac_prime(), Dpp = b.dirac_dprime();
  BochnerResiduals r;
  auto upd = [](double& slot, const Vec& x, double scale) { slot = std::max(slot, scale > 0 ? x.norm() / scale : 0.0); };
  const auto full = MixedCurvature::FullTrace, stated = MixedCurvature::Stated;
  for (int k = 0; k < cfg.bochner_sections; ++k) {
    const Vec s = b.project(random_section(g, dim, band, detail::seed_for(cfg.seed, side == Side::L ? "bochL" : "bochR", k)));
    const Vec D2 = b.square(D, s);
    const double sc = D2.norm();
    upd(r.square_prime, b.square(Dp, s) - b.R20(s), sc);
    upd(r.square_dprime, b.square(Dpp, s) - b.R02(s), sc);
    upd(r.full_stated, D2 - b.rhs_first(s, stated), sc);
    upd(r.hat_stated, D2 - b.rhs_hat(s, stated), sc);
    if (geo.ctx->n == 2) upd(r.surface_stated, D2 - b.rhs_surface(s, stated), sc);
    const Vec base = b.Delta(s) + b.R(s, full) + b.Q(s) - 0.25 * b.Tsq(s) + b.P(s, PairingSign::Alternating);
    const Vec t2 = b.T2(s);
    upd(r.full_corrected, D2 - (base - t2), sc);
    upd(r.full_corrected_without_T2, D2 - base, sc);
    const Vec hat = b.DeltaHat(s) + b.R(s, full) - 0.5 * t2 + 0.5 * b.P(s, PairingSign::Alternating);
    upd(r.hat_corrected, D2 - (hat - 0.375 * b.Tsq(s)), sc);
    if (geo.ctx->n == 2) upd(r.surface_corrected, D2 - (hat - 0.75 * b.mul_field(b.lee_sq_field(), s)), sc);
  }
  return r;
}

inline bool has_torsion(const OpContext& c) {
  double m = 0;
  for (const auto& f : c.tor) m = std::max(m, detail::sup_norm(f));
  return m > 1e-12;
}

inline std::vector<CheckResult> suite_bochner(const SuiteConfig& cfg, const Geometry& geo) {
  std::vector<CheckResult> out;
  const int n = geo.ctx->n;
  const double tol = cfg.tol.second_order;
  const bool torsion = has_torsion(*geo.ctx);
  for (Side side : {Side::L, Side::R}) {
    detail::Timer tm;
    const auto r = bochner_residuals(cfg, geo, side);
    const std::string sfx = side == Side::L ? ".L" : ".R";
    const std::size_t first = out.size();
    auto corrected = [&](double v) { return n <= 2 ? "; corrected form residual " + detail::sci(v) : std::string(); };
    out.push_back(detail::residual_result("bochner.square_prime" + sfx, "bochner", "(D')^2 equals the (2,0) curvature term",
                                          r.square_prime, tol));
    out.push_back(detail::residual_result("bochner.square_dprime" + sfx, "bochner", "(D'')^2 equals the (0,2) curvature term",
                                          r.square_dprime, tol));
    out.push_back(detail::residual_result("bochner.full_square" + sfx, "bochner",
                                          "D^2 = rough Laplacian + Q + R + T1/4 - T2/2 (as stated)", r.full_stated, tol,
                                          "mixed curvature over j != k" + corrected(r.full_corrected)));
    out.push_back(detail::residual_result("bochner.hat_square" + sfx, "bochner",
                                          "D^2 = hat Laplacian + R - P/2 - |T|^2/8 (as stated)", r.hat_stated, tol,
                                          "mixed curvature over j != k" + corrected(r.hat_corrected)));
    if (n == 2)
      out.push_back(detail::residual_result("bochner.surface" + sfx, "bochner",
                                            "complex surface: D^2 = hat Laplacian + R - |lee|^2/4 (as stated)", r.surface_stated,
                                            tol, "mixed curvature over j != k" + corrected(r.surface_corrected)));
    if (n <= 2) {
      out.push_back(detail::residual_result("bochner.full_square_corrected" + sfx, "bochner",
                                            "D^2 = rough Laplacian + R(full trace) + Q - T2 - |T|^2/4 + P(alternating)",
                                            r.full_corrected, tol));
      out.push_back(detail::residual_result("bochner.hat_square_corrected" + sfx, "bochner",
                                            "D^2 = hat Laplacian + R(full trace) - T2/2 - 3|T|^2/8 + P(alternating)/2",
                                            r.hat_corrected, tol));
      if (n == 2)
        out.push_back(detail::residual_result("bochner.surface_corrected" + sfx, "bochner",
                                              "complex surface: hat form with |T|^2 = 2|lee|^2", r.surface_corrected, tol));
      if (torsion) {
        const double ratio = r.full_corrected_without_T2 / std::max(r.full_corrected, 1e-300);
        auto c = detail::residual_result("bochner.ablation_T2" + sfx, "bochner", "dropping T2 breaks the full-square identity",
                                         0.0, 0.0, "residual ratio " + detail::sci(ratio));
        c.kind = "ratio";
        c.residual = ratio;
        c.tolerance = cfg.tol.ablation_ratio;
        c.status = ratio >= cfg.tol.ablation_ratio ? Status::Pass : Status::Fail;
        out.push_back(std::move(c));
      }
    }
    const double t = tm.seconds() / static_cast<double>(out.size() - first);
    for (std::size_t i = first; i < out.size(); ++i) out[i].runtime_s = t;
  }
  if (n == 2) {
    detail::Timer tm;
    const BochnerOps b(geo.ctx, Side::L);
    out.push_back(detail::residual_result("bochner.pairing_term_vanishes", "bochner", "P = 0 on complex surfaces",
                                          detail::sup_norm(b.P_field()), cfg.tol.pairing_term, "sup norm of the coefficients"));
    ScalarField diff = b.Tsq_field();
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= 2.0 * b.lee_sq_field()[i];
    out.push_back(detail::residual_result("bochner.torsion_norm_lee", "bochner", "|T|^2 = 2|lee|^2 on complex surfaces",
                                          detail::sup_norm(diff), cfg.tol.torsion_lee, "sup norm"));
    out[out.size() - 1].runtime_s = out[out.size() - 2].runtime_s = tm.seconds() / 2;
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// cohomology

inline KernelOptions kernel_options(const SuiteConfig& cfg, double precond_power, const std::string& tag) {
  KernelOptions o = cfg.kernel;
  o.precond_power = precond_power;
  o.seed = detail::seed_for(cfg.seed, tag);
  return o;
}

// Spectrum report for ker A via the normal equations on the band-limited space.
inline KernelReport kernel_of(const SuiteConfig& cfg, const OpContext& c, const OpPtr& A, int k, const std::string& tag) {
  auto P = std::make_shared<ProjectionOp>(c.grid, c.dim, A->bundle_in(), -1);
  return kernel_spectrum(normal_equations(A, P), k, kernel_options(cfg, 1, tag));
}

inline CheckResult kernel_check(const SuiteConfig& cfg, const OpContext& c, const std::string& id, const std::string& suite,
                                const std::string& anchor, const OpPtr& A, long expected) {
  detail::Timer tm;
  const auto rep = kernel_of(cfg, c, A, static_cast<int>(expected) + cfg.kernel.extra, id);
  auto r = detail::kernel_result(id, suite, anchor, expected, rep, cfg.kernel.min_gap_ratio);
  r.runtime_s = tm.seconds();
  return r;
}

inline std::vector<CheckResult> suite_cohomology(const SuiteConfig& cfg, const Geometry& kgeo) {
  const OpContext& c = *kgeo.ctx;
  const Grid& g = *kgeo.grid;
  std::vector<CheckResult> out;
  out.push_back(kernel_check(cfg, c, "cohomology.derham", "cohomology", "dim ker(D(L) + D(R)) = total Betti number",
                             add(assemble_chern_dirac(Side::L, c), assemble_chern_dirac(Side::R, c)), oracle::derham_total(g, -1)));
  out.push_back(kernel_check(cfg, c, "cohomology.dolbeault", "cohomology", "dim ker D(R) = total Hodge number",
                             assemble_chern_dirac(Side::R, c), oracle::dolbeault_total(g, -1)));
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// twisted

// Constant part of alpha = -theta, the only part seen by the oracle (the exact part is a gauge).
inline std::vector<cd> oracle_alpha(const ThetaTwist& th, int n) {
  std::vector<cd> a(2 * n, 0.0);
  for (std::size_t i = 0; i < th.period.size() && i < a.size(); ++i) a[i] = -th.period[i];
  return a;
}

inline CheckResult check_d_theta_square(const SuiteConfig& cfg, const Geometry& geo, const ThetaTwist& th) {
  detail::Timer tm;
  const OpContext& c = *geo.ctx;
  const OpPtr d = d_theta(c, th);
  const OpPtr P = band_projection(c, Bundle::Forms, -1);
  double res = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec s = random_section(*geo.grid, c.dim, section_band(cfg, *geo.grid), detail::seed_for(cfg.seed, "dtheta", k));
    const Vec ds = d->apply(s);
    const Vec dds = d->apply(P->apply(ds));
    const double scale = ds.squaredNorm() / s.norm();
    if (scale > 0) res = std::max(res, dds.norm() / scale);
  }
  auto r = detail::residual_result("twisted.d_theta_square", "twisted", "d_theta = d - theta∧ squares to zero", res,
                                   cfg.tol.d_theta_square);
  r.runtime_s = tm.seconds();
  return r;
}

inline std::vector<CheckResult> suite_twisted(const SuiteConfig& cfg, const Geometry& geo, const Geometry& kgeo) {
  std::vector<CheckResult> out;
  const Twist tw = Twist::from_theta(*geo.grid, cfg.twist);
  for (auto& r : check_sigma_conjugation(cfg, geo, tw, "twisted", "twisted")) out.push_back(std::move(r));
  for (auto& r : check_adjointness(cfg, geo, tw, "twisted", "twisted")) out.push_back(std::move(r));
  const Twist ex = Twist::from_theta(*geo.grid, cfg.exact_twist);
  for (auto& r : check_adjointness(cfg, geo, ex, "twisted", "twisted.exact")) out.push_back(std::move(r));
  out.push_back(check_d_theta_square(cfg, geo, cfg.twist));

  const OpContext& c = *kgeo.ctx;
  const Grid& g = *kgeo.grid;
  const int n = c.n;
  const Twist ktw = Twist::from_theta(g, cfg.twist), kex = Twist::from_theta(g, cfg.exact_twist);
  const auto a = oracle_alpha(cfg.twist, n), a0 = oracle_alpha(cfg.exact_twist, n);
  out.push_back(kernel_check(cfg, c, "twisted.derham", "twisted", "twisted D(L) + D(R) kernel matches d_theta cohomology",
                             add(assemble_chern_dirac(Side::L, c, ktw), assemble_chern_dirac(Side::R, c, ktw)),
                             oracle::derham_total(g, -1, a)));
  out.push_back(kernel_check(cfg, c, "twisted.dolbeault", "twisted", "twisted D(R) kernel matches twisted Dolbeault cohomology",
                             assemble_chern_dirac(Side::R, c, ktw), oracle::dolbeault_total(g, -1, a)));
  out.push_back(kernel_check(cfg, c, "twisted.exact.derham", "twisted", "exact twist: D(L) + D(R) kernel equals the untwisted count",
                             add(assemble_chern_dirac(Side::L, c, kex), assemble_chern_dirac(Side::R, c, kex)),
                             oracle::derham_total(g, -1, a0)));
  out.push_back(kernel_check(cfg, c, "twisted.exact.dolbeault", "twisted", "exact twist: D(R) kernel equals the untwisted count",
                             assemble_chern_dirac(Side::R, c, kex), oracle::dolbeault_total(g, -1, a0)));
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// Bott-Chern and Aeppli

// Pieces B_i with sum B_i^dagger B_i having the kernel of the fourth-order Laplacian on forms.
inline std::vector<OpPtr> bc_pieces(const OpContext& c, bool aeppli, int band) {
  const FormOps f = assemble_form_ops(c, FormRoute::Lemma);
  auto cb = [&](OpPtr a, OpPtr b) { return compose_banded(c, std::move(a), std::move(b), band); };
  if (!aeppli) return {cb(f.del, f.delbar), cb(f.delbar_star, f.del_star), cb(f.delbar_star, f.del), cb(f.del_star, f.delbar), f.delbar, f.del};
  return {f.del_star, f.delbar_star, cb(f.delbar, f.del), cb(f.del_star, f.delbar_star), cb(f.delbar, f.del_star), cb(f.del, f.delbar_star)};
}

struct BidegreeKernels {
  KernelReport spinor, forms;
};

inline BidegreeKernels bc_aeppli_kernels(const SuiteConfig& cfg, const OpContext& c, bool aeppli, int p, int q, int k) {
  const int n = c.n;
  const std::string tag = std::string(aeppli ? "aeppli" : "bc") + std::to_string(p) + std::to_string(q);
  const OpPtr Dv = aeppli ? assemble_aeppli_dirac(c, -1) : assemble_bc_dirac(c, -1);
  auto Pv = std::make_shared<ProjectionOp>(c.grid, c.dim, Bundle::V, -1, bidegree_mask(n, Bundle::V, p, q));
  auto Pf = std::make_shared<ProjectionOp>(c.grid, c.dim, Bundle::Forms, -1, bidegree_mask(n, Bundle::Forms, p, q));
  BidegreeKernels r;
  r.spinor = kernel_spectrum(normal_equations(Dv, Pv), k, kernel_options(cfg, 0, tag + "v"));
  r.forms = kernel_spectrum(stacked_normal_equations(bc_pieces(c, aeppli, -1), Pf), k, kernel_options(cfg, 0, tag + "f"));
  return r;
}

inline std::vector<CheckResult> suite_bc_aeppli(const SuiteConfig& cfg, const Geometry& kgeo) {
  const OpContext& c = *kgeo.ctx;
  const int n = c.n;
  const bool flat = cfg.manifold.is_flat();
  std::vector<CheckResult> out;
  for (bool aeppli : {false, true}) {
    const auto target = oracle::bc_aeppli_per_bidegree(*kgeo.grid, -1, aeppli);
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q) {
        detail::Timer tm;
        const long flat_count = target[p * (n + 1) + q];
        const auto ks = bc_aeppli_kernels(cfg, c, aeppli, p, q, static_cast<int>(flat_count) + cfg.kernel.extra);
        CheckResult r;
        r.id = std::string(aeppli ? "bc_aeppli.aeppli." : "bc_aeppli.bott_chern.") + std::to_string(p) + std::to_string(q);
        r.suite = "bc_aeppli";
        r.anchor = aeppli ? "ker D_A on V^{p,q} equals the Aeppli Laplacian kernel on (p,q)-forms"
                          : "ker D_BC on V^{p,q} equals the Bott-Chern Laplacian kernel on (p,q)-forms";
        r.kind = "integer";
        r.expected = ks.forms.kernel_dim;
        r.observed = ks.spinor.kernel_dim;
        r.gap_ratio = std::min(ks.spinor.gap_ratio, ks.forms.gap_ratio);
        r.tolerance = cfg.kernel.min_gap_ratio;
        r.spectrum = ks.spinor.eigenvalues;
        r.spectrum.insert(r.spectrum.end(), ks.forms.eigenvalues.begin(), ks.forms.eigenvalues.end());
        const bool unreliable = ks.spinor.unreliable || ks.forms.unreliable || !(r.gap_ratio >= cfg.kernel.min_gap_ratio);
        bool ok = ks.spinor.kernel_dim == ks.forms.kernel_dim;
        if (flat) ok = ok && ks.spinor.kernel_dim == flat_count;
        r.status = unreliable ? Status::Unreliable : (ok ? Status::Pass : Status::Fail);
        r.detail = "spinor side " + std::to_string(ks.spinor.kernel_dim) + ", form side " + std::to_string(ks.forms.kernel_dim) +
                   ", flat-torus oracle " + std::to_string(flat_count) + (flat ? " (asserted)" : " (reference)") +
                   "; spectrum lists spinor side then form side";
        r.runtime_s = tm.seconds();
        out.push_back(std::move(r));
      }
  }
  return out;
}

}  // namespace cdlab::verify
