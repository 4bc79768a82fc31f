#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cdlab {

using cd = std::complex<double>;
using ScalarField = std::vector<cd>;

// Uniform periodic grid on the unit cube [0,1)^{2n} with FFT-based spectral calculus.
// Axis a (0-based) is the real coordinate x_{a+1}; z_j = x_{2j-1} + i x_{2j}.
class Grid {
 public:
  Grid(int n, int N) : Grid(n, std::vector<int>(2 * n, N)) {}
  Grid(int n, std::vector<int> dims) : n_(n), dims_(std::move(dims)) {
    if (n < 1 || static_cast<int>(dims_.size()) != 2 * n) throw std::invalid_argument("Grid: bad dimensions");
    npts_ = 1;
    for (int d : dims_) {
      if (d < 2) throw std::invalid_argument("Grid: resolution must be >= 2");
      npts_ *= static_cast<std::size_t>(d);
    }
    strides_.assign(dims_.size(), 1);
    for (int a = static_cast<int>(dims_.size()) - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * dims_[a + 1];
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * npts_));
    fwd_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    // integer wavenumber of each flat index along each axis
    kvec_.assign(dims_.size(), std::vector<int>(npts_));
    for (std::size_t i = 0; i < npts_; ++i)
      for (std::size_t a = 0; a < dims_.size(); ++a) {
        int ia = static_cast<int>((i / strides_[a]) % dims_[a]);
        kvec_[a][i] = ia <= dims_[a] / 2 ? ia : ia - dims_[a];
      }
  }
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;
  ~Grid() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  int n() const { return n_; }
  int real_dim() const { return 2 * n_; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t npts() const { return npts_; }
  int wavenumber(int axis, std::size_t i) const { return kvec_[axis][i]; }
  bool is_nyquist(int axis, std::size_t i) const {
    return dims_[axis] % 2 == 0 && std::abs(kvec_[axis][i]) == dims_[axis] / 2;
  }
  double coord(int axis, std::size_t i) const {
    return static_cast<double>((i / strides_[axis]) % dims_[axis]) / dims_[axis];
  }
  // Largest band representable without touching the Nyquist mode.
  int max_band(int axis) const { return (dims_[axis] - 1) / 2; }
  int max_band() const {
    int b = max_band(0);
    for (int a = 1; a < real_dim(); ++a) b = std::min(b, max_band(a));
    return b;
  }

  // Unnormalized forward transform into spec. Reentrant: plans run in place on the caller's array.
  void forward(const cd* in, cd* spec) const {
    if (spec != in) std::copy(in, in + npts_, spec);
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(spec), reinterpret_cast<fftw_complex*>(spec));
  }
  // Inverse transform including the 1/npts normalization.
  void backward(const cd* spec, cd* out) const {
    if (out != spec) std::copy(spec, spec + npts_, out);
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(out), reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / static_cast<double>(npts_);
    for (std::size_t i = 0; i < npts_; ++i) out[i] *= s;
  }

  // Multiplier of the spectral derivative along the real axis a (Nyquist mode dropped).
  cd dx_symbol(int axis, std::size_t i) const {
    if (is_nyquist(axis, i)) return 0.0;
    return cd(0.0, 2.0 * std::numbers::pi * kvec_[axis][i]);
  }
  // d/dz_j = (d/dx_{2j-1} - i d/dx_{2j}) / 2 and d/dzbar_j = (d/dx_{2j-1} + i d/dx_{2j}) / 2, j 0-based.
  cd dz_symbol(int j, std::size_t i) const {
    return 0.5 * (dx_symbol(2 * j, i) - cd(0, 1) * dx_symbol(2 * j + 1, i));
  }
  cd dzbar_symbol(int j, std::size_t i) const {
    return 0.5 * (dx_symbol(2 * j, i) + cd(0, 1) * dx_symbol(2 * j + 1, i));
  }

  ScalarField dx(const ScalarField& f, int axis) const {
    return apply_symbol(f, [&](std::size_t i) { return dx_symbol(axis, i); });
  }
  ScalarField dz(const ScalarField& f, int j) const {
    return apply_symbol(f, [&](std::size_t i) { return dz_symbol(j, i); });
  }
  ScalarField dzbar(const ScalarField& f, int j) const {
    return apply_symbol(f, [&](std::size_t i) { return dzbar_symbol(j, i); });
  }

  template <class Sym>
  ScalarField apply_symbol(const ScalarField& f, Sym sym) const {
    ScalarField spec(npts_), out(npts_);
    forward(f.data(), spec.data());
    for (std::size_t i = 0; i < npts_; ++i) spec[i] *= sym(i);
    backward(spec.data(), out.data());
    return out;
  }

  bool in_band(std::size_t i, int band) const {
    for (int a = 0; a < real_dim(); ++a) {
      if (std::abs(kvec_[a][i]) > band || is_nyquist(a, i)) return false;
    }
    return true;
  }

  // Per-axis version; band < 0 on an axis means that axis' max_band.
  bool in_band(std::size_t i, const std::vector<int>& bands) const {
    for (int a = 0; a < real_dim(); ++a) {
      const int b = bands[a] < 0 ? max_band(a) : bands[a];
      if (std::abs(kvec_[a][i]) > b || is_nyquist(a, i)) return false;
    }
    return true;
  }

  // Keep Fourier modes with max_a |k_a| <= band (Nyquist modes always removed).
  ScalarField band_project(const ScalarField& f, int band) const {
    return apply_symbol(f, [&](std::size_t i) { return in_band(i, band) ? cd(1.0) : cd(0.0); });
  }

  // Fraction of spectral energy outside the given band.
  double energy_outside(const ScalarField& f, int band) const {
    return energy_outside(f, std::vector<int>(dims_.size(), band));
  }
  // Same with a separate band per axis.
  double energy_outside(const ScalarField& f, const std::vector<int>& bands) const {
    ScalarField spec(npts_);
    forward(f.data(), spec.data());
    double tot = 0, out = 0;
    for (std::size_t i = 0; i < npts_; ++i) {
      const double e = std::norm(spec[i]);
      tot += e;
      bool inside = true;
      for (int a = 0; a < real_dim(); ++a)
        if (std::abs(kvec_[a][i]) > bands[a] || is_nyquist(a, i)) inside = false;
      if (!inside) out += e;
    }
    return tot > 0 ? out / tot : 0.0;
  }

 private:
  int n_;
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t npts_ = 0;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_{};
  fftw_plan bwd_{};
  std::vector<std::vector<int>> kvec_;
};

}  // namespace cdlab
