#pragma once

#include "cdlab/ops/chern_dirac.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cdlab {

// Operator given by an apply function only; adjoint() is unavailable.
class LambdaOp : public LinearOp {
 public:
  LambdaOp(std::shared_ptr<const Grid> g, int dim, Bundle b, std::function<Vec(const Vec&)> f, std::string label)
      : LinearOp(std::move(g), dim, dim, b, b), f_(std::move(f)), label_(std::move(label)) {}
  Vec apply(const Vec& x) const override { return f_(x); }
  Vec adjoint(const Vec&) const override { throw std::logic_error("no adjoint declared for " + label_); }
  const std::string& label() const { return label_; }

 private:
  std::function<Vec(const Vec&)> f_;
  std::string label_;
};

// How the mixed-type curvature term is summed.
//  Stated: sum over j != k of c(epsbar_j eps_k) R_{eps_j, epsbar_k}.
//  FullTrace: all j, k, plus sum_j R_{eps_j, epsbar_j}; this equals half of sum_{a,b} c(e_a e_b) R_{e_a, e_b} restricted
//  to the mixed type.
enum class MixedCurvature { Stated, FullTrace };

// Sign pattern of the last pairing in the four-index torsion term.
enum class PairingSign { Stated, Alternating };

// Ingredients of the Bochner formulas on V for one Clifford structure (L or R), with optional line twist.
class BochnerOps {
 public:
  BochnerOps(std::shared_ptr<const OpContext> ctx, Side side, Twist tw = {}, int band = -1)
      : c_(std::move(ctx)), side_(side), tw_(std::move(tw)) {
    const int n = c_->n;
    band_ = band;
    proj_ = band_projection(*c_, Bundle::V, band_);
    lift_ = detail::spin_lift(n);
    for (int d = 0; d < 2 * n; ++d) D_.push_back(covariant_derivative_V(*c_, d, tw_));
    build_hat();
    build_zeroth_order();
    build_Q();
    build_brackets();
  }

  const OpContext& context() const { return *c_; }
  int band() const { return band_; }
  const OpPtr& D(int dir) const { return D_[dir]; }
  const OpPtr& Dhat(int dir) const { return Dhat_[dir]; }

  Vec project(const Vec& x) const { return proj_->apply(x); }

  // Band-projected D_X sigma for every frame direction.
  std::vector<Vec> covariant_all(const Vec& s, bool hat = false) const {
    std::vector<Vec> out;
    for (const auto& d : (hat ? Dhat_ : D_)) out.push_back(project(d->apply(s)));
    return out;
  }

  // R_{XY} sigma = D_X D_Y sigma - D_Y D_X sigma - D_{[X,Y]} sigma for frame directions X, Y.
  Vec curvature(int dx, int dy, const std::vector<Vec>& Ds) const {
    Vec r = D_[dx]->apply(Ds[dy]) - D_[dy]->apply(Ds[dx]);
    const auto& br = brackets_[dx * 2 * c_->n + dy];
    for (int m = 0; m < 2 * c_->n; ++m) r -= mul_field(br[m], Ds[m]);
    return project(r);
  }
  Vec curvature(int dx, int dy, const Vec& s) const { return curvature(dx, dy, covariant_all(s)); }

  Vec R20(const Vec& s, const std::vector<Vec>* Ds = nullptr) const { return R_pure(s, Ds, true); }
  Vec R02(const Vec& s, const std::vector<Vec>* Ds = nullptr) const { return R_pure(s, Ds, false); }
  Vec R11(const Vec& s, MixedCurvature v, const std::vector<Vec>* Ds = nullptr) const {
    const int n = c_->n;
    std::vector<Vec> local;
    if (!Ds) local = covariant_all(s), Ds = &local;
    Vec out = Vec::Zero(s.size());
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k && v == MixedCurvature::Stated) continue;
        const Vec Rs = curvature(j, n + k, *Ds);
        out += apply_const(clifford(c_->epsbar[j] * c_->eps[k]), Rs);
        if (j == k) out += Rs;
      }
    return out;
  }
  Vec R(const Vec& s, MixedCurvature v) const {
    const auto Ds = covariant_all(s);
    return R20(s, &Ds) + R02(s, &Ds) + R11(s, v, &Ds);
  }

  Vec T1(const Vec& s) const { return T1_->apply(s); }
  Vec T2(const Vec& s) const { return T2_->apply(s); }
  Vec Q(const Vec& s) const { return Q_->apply(s); }
  Vec P(const Vec& s, PairingSign ps = PairingSign::Stated) const {
    return (ps == PairingSign::Stated ? P_ : Palt_)->apply(s);
  }
  Vec Tsq(const Vec& s) const { return mul_field(tsq_, s); }

  // Rough Laplacians of D and of Dhat.
  Vec Delta(const Vec& s) const { return rough_laplacian(s, false); }
  Vec DeltaHat(const Vec& s) const { return rough_laplacian(s, true); }

  // Pointwise scalar fields.
  const ScalarField& P_field(PairingSign ps = PairingSign::Stated) const {
    return ps == PairingSign::Stated ? p_coef_ : palt_coef_;
  }
  const ScalarField& Tsq_field() const { return tsq_; }
  const ScalarField& lee_sq_field() const { return lee_sq_; }

  // D' , D'' and D = D' + D'' of this structure (with the same twist).
  OpPtr dirac_prime() const { return assemble_partial_cd(side_ == Side::L ? PartialCD::DpL : PartialCD::DpR, *c_, tw_); }
  OpPtr dirac_dprime() const {
    return assemble_partial_cd(side_ == Side::L ? PartialCD::DppL : PartialCD::DppR, *c_, tw_);
  }
  OpPtr dirac() const { return assemble_chern_dirac(side_, *c_, tw_); }
  Vec square(const OpPtr& A, const Vec& s) const { return A->apply(project(A->apply(s))); }

  // Right-hand sides of the three Bochner formulas for the full operator.
  Vec rhs_first(const Vec& s, MixedCurvature v, bool with_T2 = true) const {
    Vec r = Delta(s) + Q(s) + R(s, v) + 0.25 * T1(s);
    if (with_T2) r -= 0.5 * T2(s);
    return r;
  }
  Vec rhs_hat(const Vec& s, MixedCurvature v, PairingSign ps = PairingSign::Stated) const {
    return DeltaHat(s) + R(s, v) - 0.5 * P(s, ps) - 0.125 * Tsq(s);
  }
  Vec rhs_surface(const Vec& s, MixedCurvature v) const { return DeltaHat(s) + R(s, v) - 0.25 * mul_field(lee_sq_, s); }

  // Handles for callers wanting the LinearOp interface.
  OpPtr handle(const std::string& which, MixedCurvature v = MixedCurvature::Stated) const {
    auto self = this;
    std::function<Vec(const Vec&)> f;
    if (which == "R20") f = [self](const Vec& x) { return self->R20(x); };
    else if (which == "R02") f = [self](const Vec& x) { return self->R02(x); };
    else if (which == "R11") f = [self, v](const Vec& x) { return self->R11(x, v); };
    else if (which == "R") f = [self, v](const Vec& x) { return self->R(x, v); };
    else if (which == "T1") return T1_;
    else if (which == "T2") return T2_;
    else if (which == "Q") return Q_;
    else if (which == "P") return P_;
    else if (which == "Delta") f = [self](const Vec& x) { return self->Delta(x); };
    else if (which == "DeltaHat") f = [self](const Vec& x) { return self->DeltaHat(x); };
    else if (which == "Tsq") f = [self](const Vec& x) { return self->Tsq(x); };
    else throw std::invalid_argument("unknown Bochner operator " + which);
    return std::make_shared<LambdaOp>(c_->grid, c_->dim, Bundle::V, f, which);
  }

  Vec mul_field(const ScalarField& f, const Vec& x) const {
    const std::size_t np = c_->npts();
    Vec out(x.size());
    for (int k = 0; k < c_->dim; ++k)
      for (std::size_t i = 0; i < np; ++i) out[k * np + i] = f[i] * x[k * np + i];
    return out;
  }
  Vec apply_const(const fiber::Mat& M, const Vec& x) const {
    const auto np = static_cast<Eigen::Index>(c_->npts());
    Eigen::Map<const Eigen::MatrixXcd> X(x.data(), np, c_->dim);
    Vec out(x.size());
    Eigen::Map<Eigen::MatrixXcd> Y(out.data(), np, c_->dim);
    Y.noalias() = X * M.transpose();
    return out;
  }

 private:
  fiber::Mat clifford(const Multivector& w) const { return fiber::clifford(side_, w); }

  Vec R_pure(const Vec& s, const std::vector<Vec>* Ds, bool holo) const {
    const int n = c_->n;
    std::vector<Vec> local;
    if (!Ds) local = covariant_all(s), Ds = &local;
    Vec out = Vec::Zero(s.size());
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const Multivector w = holo ? c_->epsbar[j] * c_->epsbar[k] : c_->eps[j] * c_->eps[k];
        const int dj = holo ? j : n + j, dk = holo ? k : n + k;
        out += apply_const(clifford(w), curvature(dj, dk, *Ds));
      }
    return out;
  }

  Vec rough_laplacian(const Vec& s, bool hat) const {
    const int n = c_->n;
    const auto& ops = hat ? Dhat_ : D_;
    const auto Ds = covariant_all(s, hat);
    Vec out = Vec::Zero(s.size());
    for (int j = 0; j < n; ++j) out -= ops[j]->apply(Ds[n + j]) + ops[n + j]->apply(Ds[j]);
    // + D_{nabla_{e_a} e_a}: sum_j nabla_{eps_j} epsbar_j + nabla_{epsbar_j} eps_j = sum_l (u_l eps_l + conj(u_l) epsbar_l)
    for (int l = 0; l < n; ++l) {
      ScalarField u(c_->npts(), 0.0);
      for (int j = 0; j < n; ++j) {
        const auto& g = c_->gam(n + j, l, j);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += g[i];
      }
      out += mul_field(u, Ds[l]);
      for (auto& v : u) v = std::conj(v);
      out += mul_field(u, Ds[n + l]);
    }
    return project(out);
  }

  // Dhat_X = D_X - 1/2 sum_a c(e_a . T(X, e_a)).
  void build_hat() {
    const int n = c_->n;
    for (int d = 0; d < 2 * n; ++d) {
      auto op = std::make_shared<FirstOrderOp>(c_->grid, c_->dim, c_->dim, Bundle::V, Bundle::V);
      detail::add_covariant_V(*op, *c_, fiber::Mat::Identity(c_->dim, c_->dim), d, tw_, lift_);
      const int m = d < n ? d : d - n;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          if (d < n) {
            // T(eps_m, eps_j) = sum_l T^l_mj eps_l paired with epsbar_j
            op->add(clifford(c_->epsbar[j] * c_->eps[l]), c_->T(m, j, l), FirstOrderOp::kNoDeriv, -0.5);
          } else {
            op->add(clifford(c_->eps[j] * c_->epsbar[l]), conj(c_->T(m, j, l)), FirstOrderOp::kNoDeriv, -0.5);
          }
        }
      op->finalize();
      Dhat_.push_back(op);
    }
  }

  static ScalarField conj(ScalarField f) {
    for (auto& v : f) v = std::conj(v);
    return f;
  }

  void build_zeroth_order() {
    const int n = c_->n;
    const std::size_t np = c_->npts();
    auto mk = [&] { return std::make_shared<FirstOrderOp>(c_->grid, c_->dim, c_->dim, Bundle::V, Bundle::V); };
    // T1
    auto t1 = mk();
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int r = 0; r < n; ++r)
          for (int s = r + 1; s < n; ++s)
            for (int m = 0; m < n; ++m)
              for (int p = 0; p < n; ++p) {
                const Multivector w1 = c_->eps[j] * c_->eps[k] * c_->epsbar[r] * c_->epsbar[s] * c_->epsbar[m] * c_->eps[p];
                t1->add(clifford(w1), detail::times(conj(c_->T(j, k, m)), c_->T(r, s, p)));
                const Multivector w2 = c_->epsbar[j] * c_->epsbar[k] * c_->eps[r] * c_->eps[s] * c_->eps[m] * c_->epsbar[p];
                t1->add(clifford(w2), detail::times(c_->T(j, k, m), conj(c_->T(r, s, p))));
              }
    t1->finalize();
    T1_ = t1;

    // T2 via W^m_jk = coefficient of eps_m in (nabla_{epsbar_k} T)(eps_j, eps_k)
    auto t2 = mk();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k) continue;
        for (int m = 0; m < n; ++m) {
          ScalarField W = apply_frame_vector(n + k, c_->T(j, k, m));
          for (int l = 0; l < n; ++l) {
            const auto& gml = c_->gam(n + k, m, l);
            const auto& glj = c_->gam(n + k, l, j);
            const auto& glk = c_->gam(n + k, l, k);
            const auto& Tl = c_->T(j, k, l);
            const auto& Tm1 = c_->T(l, k, m);
            const auto& Tm2 = c_->T(j, l, m);
            for (std::size_t i = 0; i < np; ++i) W[i] += Tl[i] * gml[i] - glj[i] * Tm1[i] - glk[i] * Tm2[i];
          }
          t2->add(clifford(c_->eps[j] * c_->epsbar[m]), conj(W));
          t2->add(clifford(c_->epsbar[j] * c_->eps[m]), W);
        }
      }
    t2->finalize();
    T2_ = t2;

    // |T|^2, |lee|^2 and the four-index pairing coefficient in the real unitary frame
    const int D = 2 * n;
    tsq_.assign(np, 0.0);
    lee_sq_.assign(np, 0.0);
    p_coef_.assign(np, 0.0);
    palt_coef_.assign(np, 0.0);
    std::vector<std::array<int, 4>> quads;
    for (int a = 0; a < D; ++a)
      for (int b = a + 1; b < D; ++b)
        for (int r = b + 1; r < D; ++r)
          for (int s = r + 1; s < D; ++s) quads.push_back({a, b, r, s});
    std::vector<ScalarField> pq(quads.size(), ScalarField(np)), pqa(quads.size(), ScalarField(np));
    for (std::size_t i = 0; i < np; ++i) {
      const Eigen::MatrixXd& E = c_->fr->E[i];
      const Eigen::MatrixXd& g = c_->fr->g[i];
      // Tv(a, b) = coordinate vector T(e_a, e_b)
      std::vector<Eigen::VectorXd> Tv(D * D, Eigen::VectorXd::Zero(D));
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          for (int x = 0; x < D; ++x)
            for (int y = 0; y < D; ++y) {
              const double w = E(x, a) * E(y, b);
              if (w == 0) continue;
              for (int z = 0; z < D; ++z) Tv[a * D + b][z] += w * c_->ct->real3(c_->ct->torsion, i, x, y, z);
            }
      auto gp = [&](int a, int b, int r, int s) { return Tv[a * D + b].dot(g * Tv[r * D + s]); };
      double t = 0;
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          for (int r = 0; r < D; ++r) {
            const double v = Tv[a * D + b].dot(g * E.col(r));
            t += v * v;
          }
      tsq_[i] = t;
      double l2 = 0;
      for (int a = 0; a < D; ++a) {
        double th = 0;
        for (int x = 0; x < D; ++x) th += E(x, a) * c_->ct->lee[i * D + x];
        l2 += th * th;
      }
      lee_sq_[i] = l2;
      for (std::size_t q = 0; q < quads.size(); ++q) {
        const auto [a, b, r, s] = quads[q];
        pq[q][i] = gp(a, b, r, s) + gp(a, s, b, r) + gp(a, r, b, s);
        pqa[q][i] = gp(a, b, r, s) + gp(a, s, b, r) - gp(a, r, b, s);
      }
    }
    auto p = mk(), pa = mk();
    for (std::size_t q = 0; q < quads.size(); ++q) {
      const auto [a, b, r, s] = quads[q];
      const std::uint32_t mask = (1u << a) | (1u << b) | (1u << r) | (1u << s);
      const fiber::Mat cm = clifford(Multivector::blade(n, mask));
      p->add(cm, pq[q]);
      pa->add(cm, pqa[q]);
      for (std::size_t i = 0; i < np; ++i) {
        p_coef_[i] = std::max(std::abs(p_coef_[i]), std::abs(pq[q][i]));
        palt_coef_[i] = std::max(std::abs(palt_coef_[i]), std::abs(pqa[q][i]));
      }
    }
    p->finalize();
    pa->finalize();
    P_ = p;
    Palt_ = pa;
  }

  // X(f) for the frame vector of direction dir.
  ScalarField apply_frame_vector(int dir, const ScalarField& f) const {
    ScalarField out(c_->npts(), 0.0);
    for (int a = 0; a < c_->n; ++a) {
      const ScalarField df = dir < c_->n ? c_->grid->dz(f, a) : c_->grid->dzbar(f, a);
      const ScalarField co = c_->dir_coeff(dir, a);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += co[i] * df[i];
    }
    return out;
  }

  // Q = sum_{j != k} c(eps_k . T_{jbar kbar}) D_{eps_j} + c(epsbar_k . T_{jk}) D_{epsbar_j}
  void build_Q() {
    const int n = c_->n;
    auto q = std::make_shared<FirstOrderOp>(c_->grid, c_->dim, c_->dim, Bundle::V, Bundle::V);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k) continue;
        for (int m = 0; m < n; ++m) {
          detail::add_covariant_V(*q, *c_, clifford(c_->eps[k] * c_->epsbar[m]), j, tw_, lift_, 1.0, conj(c_->T(j, k, m)));
          detail::add_covariant_V(*q, *c_, clifford(c_->epsbar[k] * c_->eps[m]), n + j, tw_, lift_, 1.0, c_->T(j, k, m));
        }
      }
    q->finalize();
    Q_ = q;
  }

  // Components of [X, Y] in the complex frame for all pairs of frame directions.
  void build_brackets() {
    const int n = c_->n, D = 2 * n;
    const std::size_t np = c_->npts();
    // full complex frame in real coordinates and its real-coordinate derivatives
    std::vector<ScalarField> W(D * D, ScalarField(np));  // W[b * D + d]
    for (std::size_t i = 0; i < np; ++i)
      for (int b = 0; b < D; ++b)
        for (int d = 0; d < n; ++d) {
          W[b * D + d][i] = c_->fr->V[i](b, d);
          W[b * D + n + d][i] = std::conj(c_->fr->V[i](b, d));
        }
    std::vector<ScalarField> dW(D * D * D);  // dW[(b * D + d) * D + a] = d_a W[b][d]
    for (int b = 0; b < D; ++b)
      for (int d = 0; d < D; ++d)
        for (int a = 0; a < D; ++a) dW[(b * D + d) * D + a] = c_->grid->dx(W[b * D + d], a);
    brackets_.assign(D * D, std::vector<ScalarField>(D, ScalarField(np, 0.0)));
    for (std::size_t i = 0; i < np; ++i) {
      Eigen::MatrixXcd Wi(D, D);
      for (int b = 0; b < D; ++b)
        for (int d = 0; d < D; ++d) Wi(b, d) = W[b * D + d][i];
      const Eigen::MatrixXcd Winv = Wi.inverse();
      for (int x = 0; x < D; ++x)
        for (int y = 0; y < D; ++y) {
          Eigen::VectorXcd z = Eigen::VectorXcd::Zero(D);
          for (int b = 0; b < D; ++b)
            for (int a = 0; a < D; ++a)
              z[b] += Wi(a, x) * dW[(b * D + y) * D + a][i] - Wi(a, y) * dW[(b * D + x) * D + a][i];
          const Eigen::VectorXcd u = Winv * z;
          for (int m = 0; m < D; ++m) brackets_[x * D + y][m][i] = u[m];
        }
    }
  }

  std::shared_ptr<const OpContext> c_;
  Side side_;
  Twist tw_;
  int band_ = 0;
  OpPtr proj_;
  std::vector<fiber::Mat> lift_;
  std::vector<OpPtr> D_, Dhat_;
  OpPtr T1_, T2_, Q_, P_, Palt_;
  ScalarField tsq_, lee_sq_, p_coef_, palt_coef_;
  std::vector<std::vector<ScalarField>> brackets_;
};

}  // namespace cdlab
