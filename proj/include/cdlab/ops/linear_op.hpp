#pragma once

#include "cdlab/geometry/grid.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace cdlab {

using Vec = Eigen::VectorXcd;

// Which bundle a section lives in. Twisted V sections share the V tag; the twist is part of the operator.
enum class Bundle { Forms, V };

inline const char* bundle_name(Bundle b) { return b == Bundle::Forms ? "forms" : "V"; }

struct BundleMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Sections are stored component-major: data[k * npts + i] is fiber component k at grid point i.
struct SectionField {
  Bundle tag = Bundle::V;
  std::shared_ptr<const Grid> grid;
  int fiber_dim = 0;
  Vec data;

  SectionField() = default;
  SectionField(Bundle t, std::shared_ptr<const Grid> g, int d) : tag(t), grid(std::move(g)), fiber_dim(d) {
    data = Vec::Zero(static_cast<Eigen::Index>(grid->npts()) * d);
  }
  std::size_t npts() const { return grid->npts(); }
  auto comp(int k) { return data.segment(static_cast<Eigen::Index>(k * npts()), static_cast<Eigen::Index>(npts())); }
  auto comp(int k) const { return data.segment(static_cast<Eigen::Index>(k * npts()), static_cast<Eigen::Index>(npts())); }
};

// L2 product: grid average of the fiberwise Hermitian pairing, weighted by a density (empty = 1).
inline cd inner(const Grid& g, int dim, const Vec& a, const Vec& b, const ScalarField& weight = {}) {
  const std::size_t np = g.npts();
  cd s = 0;
  for (int k = 0; k < dim; ++k)
    for (std::size_t i = 0; i < np; ++i) {
      const std::size_t idx = k * np + i;
      const cd t = a[static_cast<Eigen::Index>(idx)] * std::conj(b[static_cast<Eigen::Index>(idx)]);
      s += weight.empty() ? t : t * weight[i];
    }
  return s / static_cast<double>(np);
}
inline double norm(const Grid& g, int dim, const Vec& a, const ScalarField& weight = {}) {
  return std::sqrt(std::max(0.0, inner(g, dim, a, a, weight).real()));
}

// Precomputed multipliers of d/dz_a (d = a) and d/dzbar_a (d = n + a).
struct SpectralSymbols {
  std::vector<ScalarField> sym;
  explicit SpectralSymbols(const Grid& g) {
    const int n = g.n();
    sym.assign(2 * n, ScalarField(g.npts()));
    for (std::size_t i = 0; i < g.npts(); ++i)
      for (int a = 0; a < n; ++a) {
        sym[a][i] = g.dz_symbol(a, i);
        sym[n + a][i] = g.dzbar_symbol(a, i);
      }
  }
};

class LinearOp {
 public:
  LinearOp(std::shared_ptr<const Grid> g, int din, int dout, Bundle bin, Bundle bout)
      : grid_(std::move(g)), din_(din), dout_(dout), bin_(bin), bout_(bout) {}
  virtual ~LinearOp() = default;

  virtual Vec apply(const Vec& x) const = 0;
  // Exact adjoint for the unweighted grid sum.
  virtual Vec adjoint(const Vec& y) const = 0;

  SectionField operator()(const SectionField& s) const {
    if (s.tag != bin_ || s.fiber_dim != din_)
      throw BundleMismatch(std::string("operator expects a section of ") + bundle_name(bin_) + ", got " + bundle_name(s.tag));
    SectionField out(bout_, grid_, dout_);
    out.data = apply(s.data);
    return out;
  }

  const std::shared_ptr<const Grid>& grid() const { return grid_; }
  int dim_in() const { return din_; }
  int dim_out() const { return dout_; }
  Bundle bundle_in() const { return bin_; }
  Bundle bundle_out() const { return bout_; }
  Eigen::Index size_in() const { return static_cast<Eigen::Index>(grid_->npts() * din_); }
  Eigen::Index size_out() const { return static_cast<Eigen::Index>(grid_->npts() * dout_); }

 protected:
  std::shared_ptr<const Grid> grid_;
  int din_, dout_;
  Bundle bin_, bout_;
};

using OpPtr = std::shared_ptr<const LinearOp>;

// A sigma = sum_t M_t f_t sigma + sum_a Cz_a d/dz_a sigma + Czb_a d/dzbar_a sigma with fixed sparse fiber
// matrices M_t and scalar coefficient fields f_t. Terms with the same (row, col, derivative) are merged.
class FirstOrderOp : public LinearOp {
 public:
  static constexpr int kNoDeriv = -1;

  FirstOrderOp(std::shared_ptr<const Grid> g, int din, int dout, Bundle bin, Bundle bout)
      : LinearOp(std::move(g), din, dout, bin, bout) {}

  // Adds value * M * f * (derivative d of the input); f empty means the constant 1.
  void add(const Eigen::MatrixXcd& M, const ScalarField& f, int deriv = kNoDeriv, cd value = 1.0) {
    if (finalized_) throw std::logic_error("FirstOrderOp: add after finalize");
    if (M.rows() != dout_ || M.cols() != din_) throw std::invalid_argument("FirstOrderOp: fiber matrix shape");
    const std::size_t np = grid_->npts();
    for (int r = 0; r < M.rows(); ++r)
      for (int c = 0; c < M.cols(); ++c) {
        const cd m = M(r, c) * value;
        if (std::abs(m) < 1e-15) continue;
        Acc& acc = acc_[{r, c, deriv}];
        if (f.empty()) {
          acc.constant += m;
        } else {
          if (acc.field.empty()) acc.field.assign(np, 0.0);
          for (std::size_t i = 0; i < np; ++i) acc.field[i] += m * f[i];
        }
      }
  }
  void add_constant(const Eigen::MatrixXcd& M, cd value = 1.0) { add(M, {}, kNoDeriv, value); }

  void finalize() {
    if (finalized_) return;
    const std::size_t np = grid_->npts();
    for (auto& [key, acc] : acc_) {
      Entry e;
      std::tie(e.row, e.col, e.deriv) = key;
      if (acc.field.empty()) {
        if (std::abs(acc.constant) < 1e-15) continue;
        e.constant = acc.constant;
        e.is_const = true;
      } else {
        for (std::size_t i = 0; i < np; ++i) acc.field[i] += acc.constant;
        e.field = std::move(acc.field);
      }
      entries_.push_back(std::move(e));
    }
    acc_.clear();
    symbols_ = std::make_shared<SpectralSymbols>(*grid_);
    finalized_ = true;
  }

  Vec apply(const Vec& x) const override {
    require_final();
    const std::size_t np = grid_->npts();
    Vec out = Vec::Zero(size_out());
    // spectral derivatives of each needed input component
    std::map<std::pair<int, int>, ScalarField> deriv_cache;
    std::map<int, ScalarField> spec_cache;
    ScalarField tmp(np);
    for (const auto& e : entries_) {
      if (e.deriv == kNoDeriv) continue;
      const auto key = std::make_pair(e.col, e.deriv);
      if (deriv_cache.count(key)) continue;
      auto it = spec_cache.find(e.col);
      if (it == spec_cache.end()) {
        ScalarField spec(np);
        grid_->forward(x.data() + e.col * np, spec.data());
        it = spec_cache.emplace(e.col, std::move(spec)).first;
      }
      const ScalarField& s = symbols_->sym[e.deriv];
      for (std::size_t i = 0; i < np; ++i) tmp[i] = it->second[i] * s[i];
      ScalarField d(np);
      grid_->backward(tmp.data(), d.data());
      deriv_cache.emplace(key, std::move(d));
    }
    for (const auto& e : entries_) {
      const cd* src = e.deriv == kNoDeriv ? x.data() + e.col * np : deriv_cache.at({e.col, e.deriv}).data();
      cd* dst = out.data() + e.row * np;
      if (e.is_const) {
        for (std::size_t i = 0; i < np; ++i) dst[i] += e.constant * src[i];
      } else {
        for (std::size_t i = 0; i < np; ++i) dst[i] += e.field[i] * src[i];
      }
    }
    return out;
  }

  Vec adjoint(const Vec& y) const override {
    require_final();
    const std::size_t np = grid_->npts();
    Vec out = Vec::Zero(size_in());
    std::map<std::pair<int, int>, ScalarField> buffers;
    for (const auto& e : entries_) {
      const cd* src = y.data() + e.row * np;
      cd* dst;
      if (e.deriv == kNoDeriv) {
        dst = out.data() + e.col * np;
      } else {
        auto& b = buffers[{e.col, e.deriv}];
        if (b.empty()) b.assign(np, 0.0);
        dst = b.data();
      }
      if (e.is_const) {
        const cd c = std::conj(e.constant);
        for (std::size_t i = 0; i < np; ++i) dst[i] += c * src[i];
      } else {
        for (std::size_t i = 0; i < np; ++i) dst[i] += std::conj(e.field[i]) * src[i];
      }
    }
    // adjoint of a spectral multiplier is the conjugate multiplier
    std::map<int, ScalarField> acc;
    ScalarField spec(np);
    for (const auto& [key, b] : buffers) {
      grid_->forward(b.data(), spec.data());
      auto& a = acc[key.first];
      if (a.empty()) a.assign(np, 0.0);
      const ScalarField& s = symbols_->sym[key.second];
      for (std::size_t i = 0; i < np; ++i) a[i] += spec[i] * std::conj(s[i]);
    }
    ScalarField tmp(np);
    for (const auto& [col, a] : acc) {
      grid_->backward(a.data(), tmp.data());
      cd* dst = out.data() + col * np;
      for (std::size_t i = 0; i < np; ++i) dst[i] += tmp[i];
    }
    return out;
  }

  std::size_t num_entries() const { return entries_.size(); }

 private:
  struct Acc {
    cd constant = 0.0;
    ScalarField field;
  };
  struct Entry {
    int row = 0, col = 0, deriv = kNoDeriv;
    bool is_const = false;
    cd constant = 0.0;
    ScalarField field;
  };
  void require_final() const {
    if (!finalized_) throw std::logic_error("FirstOrderOp: finalize() not called");
  }

  std::map<std::tuple<int, int, int>, Acc> acc_;
  std::vector<Entry> entries_;
  std::shared_ptr<SpectralSymbols> symbols_;
  bool finalized_ = false;
};

// a * b (apply b first).
class ComposeOp : public LinearOp {
 public:
  ComposeOp(OpPtr a, OpPtr b)
      : LinearOp(a->grid(), b->dim_in(), a->dim_out(), b->bundle_in(), a->bundle_out()), a_(std::move(a)), b_(std::move(b)) {
    if (a_->dim_in() != b_->dim_out() || a_->bundle_in() != b_->bundle_out())
      throw BundleMismatch("ComposeOp: incompatible factors");
  }
  Vec apply(const Vec& x) const override { return a_->apply(b_->apply(x)); }
  Vec adjoint(const Vec& y) const override { return b_->adjoint(a_->adjoint(y)); }

 private:
  OpPtr a_, b_;
};

class SumOp : public LinearOp {
 public:
  explicit SumOp(std::vector<std::pair<cd, OpPtr>> terms)
      : LinearOp(terms.at(0).second->grid(), terms[0].second->dim_in(), terms[0].second->dim_out(),
                 terms[0].second->bundle_in(), terms[0].second->bundle_out()),
        terms_(std::move(terms)) {
    for (const auto& [c, op] : terms_)
      if (op->dim_in() != din_ || op->dim_out() != dout_ || op->bundle_in() != bin_ || op->bundle_out() != bout_)
        throw BundleMismatch("SumOp: incompatible summands");
  }
  Vec apply(const Vec& x) const override {
    Vec out = Vec::Zero(size_out());
    for (const auto& [c, op] : terms_) out += c * op->apply(x);
    return out;
  }
  Vec adjoint(const Vec& y) const override {
    Vec out = Vec::Zero(size_in());
    for (const auto& [c, op] : terms_) out += std::conj(c) * op->adjoint(y);
    return out;
  }

 private:
  std::vector<std::pair<cd, OpPtr>> terms_;
};

class AdjointOp : public LinearOp {
 public:
  explicit AdjointOp(OpPtr a)
      : LinearOp(a->grid(), a->dim_out(), a->dim_in(), a->bundle_out(), a->bundle_in()), a_(std::move(a)) {}
  Vec apply(const Vec& x) const override { return a_->adjoint(x); }
  Vec adjoint(const Vec& y) const override { return a_->apply(y); }

 private:
  OpPtr a_;
};

// Pointwise multiplication of every component by a scalar field.
class ScalarMulOp : public LinearOp {
 public:
  ScalarMulOp(std::shared_ptr<const Grid> g, int dim, Bundle b, ScalarField f)
      : LinearOp(std::move(g), dim, dim, b, b), f_(std::move(f)) {}
  Vec apply(const Vec& x) const override { return mul(x, false); }
  Vec adjoint(const Vec& y) const override { return mul(y, true); }

 private:
  Vec mul(const Vec& x, bool conj) const {
    const std::size_t np = grid_->npts();
    Vec out(x.size());
    for (int k = 0; k < din_; ++k)
      for (std::size_t i = 0; i < np; ++i) {
        const auto idx = static_cast<Eigen::Index>(k * np + i);
        out[idx] = (conj ? std::conj(f_[i]) : f_[i]) * x[idx];
      }
    return out;
  }
  ScalarField f_;
};

// Orthogonal projection onto a band of Fourier modes (Nyquist removed) and a subset of fiber components.
// A negative band means the largest band resolvable on each axis separately.
class ProjectionOp : public LinearOp {
 public:
  ProjectionOp(std::shared_ptr<const Grid> g, int dim, Bundle b, int band, std::vector<bool> keep = {})
      : LinearOp(std::move(g), dim, dim, b, b), band_(band), keep_(std::move(keep)) {
    if (keep_.empty()) keep_.assign(dim, true);
    mask_.resize(grid_->npts());
    const std::vector<int> bands(grid_->real_dim(), band_);
    for (std::size_t i = 0; i < grid_->npts(); ++i) mask_[i] = grid_->in_band(i, bands);
  }
  Vec apply(const Vec& x) const override {
    const std::size_t np = grid_->npts();
    Vec out = Vec::Zero(x.size());
    ScalarField spec(np);
    for (int k = 0; k < din_; ++k) {
      if (!keep_[k]) continue;
      grid_->forward(x.data() + k * np, spec.data());
      for (std::size_t i = 0; i < np; ++i)
        if (!mask_[i]) spec[i] = 0.0;
      grid_->backward(spec.data(), out.data() + k * np);
    }
    return out;
  }
  Vec adjoint(const Vec& y) const override { return apply(y); }
  int band() const { return band_; }
  const std::vector<bool>& keep() const { return keep_; }

 private:
  int band_;
  std::vector<bool> keep_;
  std::vector<bool> mask_;
};

inline OpPtr compose(OpPtr a, OpPtr b) { return std::make_shared<ComposeOp>(std::move(a), std::move(b)); }
inline OpPtr compose(std::initializer_list<OpPtr> ops) {
  std::vector<OpPtr> v(ops);
  OpPtr r = v.back();
  for (int i = static_cast<int>(v.size()) - 2; i >= 0; --i) r = compose(v[i], r);
  return r;
}
inline OpPtr sum(std::vector<std::pair<cd, OpPtr>> terms) { return std::make_shared<SumOp>(std::move(terms)); }
inline OpPtr add(OpPtr a, OpPtr b) { return sum({{1.0, std::move(a)}, {1.0, std::move(b)}}); }
inline OpPtr scale(cd c, OpPtr a) { return sum({{c, std::move(a)}}); }
inline OpPtr adjoint_l2(OpPtr a) { return std::make_shared<AdjointOp>(std::move(a)); }

// Adjoint for the product weighted by the density w on both sides: w^{-1} A^dagger w.
inline OpPtr weighted_adjoint(OpPtr a, const ScalarField& w) {
  if (w.empty()) return adjoint_l2(a);
  ScalarField winv(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) winv[i] = 1.0 / w[i];
  auto W = std::make_shared<ScalarMulOp>(a->grid(), a->dim_out(), a->bundle_out(), w);
  auto Winv = std::make_shared<ScalarMulOp>(a->grid(), a->dim_in(), a->bundle_in(), winv);
  return compose({Winv, adjoint_l2(a), W});
}

// Random section with independent Gaussian Fourier coefficients in the band, optionally restricted to components.
inline Vec random_section(const Grid& g, int dim, int band, std::uint64_t seed, const std::vector<bool>& keep = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t np = g.npts();
  Vec out = Vec::Zero(static_cast<Eigen::Index>(np * dim));
  ScalarField spec(np);
  for (int k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < np; ++i) {
      const double re = nd(rng), im = nd(rng);
      spec[i] = g.in_band(i, band) ? cd(re, im) : cd(0.0);
    }
    if (!keep.empty() && !keep[k]) continue;
    g.backward(spec.data(), out.data() + k * np);
  }
  return out;
}

}  // namespace cdlab
