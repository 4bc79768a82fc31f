#pragma once

#include <gmpxx.h>

#include <complex>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cdlab {

// Real part of an element of Q[sqrt2]: a + b*sqrt2.
struct QSqrt2 {
  mpq_class a{0};
  mpq_class b{0};

  QSqrt2() = default;
  QSqrt2(mpq_class a_, mpq_class b_) : a(std::move(a_)), b(std::move(b_)) {
    a.canonicalize();
    b.canonicalize();
  }

  bool is_zero() const { return sgn(a) == 0 && sgn(b) == 0; }
  double to_double() const { return a.get_d() + b.get_d() * 1.4142135623730951; }

  friend QSqrt2 operator+(const QSqrt2& x, const QSqrt2& y) { return {x.a + y.a, x.b + y.b}; }
  friend QSqrt2 operator-(const QSqrt2& x, const QSqrt2& y) { return {x.a - y.a, x.b - y.b}; }
  friend QSqrt2 operator-(const QSqrt2& x) { return {-x.a, -x.b}; }
  friend QSqrt2 operator*(const QSqrt2& x, const QSqrt2& y) {
    return {x.a * y.a + 2 * x.b * y.b, x.a * y.b + x.b * y.a};
  }
  friend bool operator==(const QSqrt2& x, const QSqrt2& y) { return x.a == y.a && x.b == y.b; }

  QSqrt2 inverse() const {
    // (a + b r)^{-1} = (a - b r) / (a^2 - 2 b^2); the norm vanishes only at zero since sqrt2 is irrational.
    mpq_class nrm = a * a - 2 * b * b;
    if (sgn(nrm) == 0) throw std::domain_error("QSqrt2: inverse of zero");
    return {a / nrm, -b / nrm};
  }
};

// Element of Q(i)[sqrt2], stored as re + i*im with re, im in Q[sqrt2].
class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(long v) : re_{mpq_class(v), 0} {}  // NOLINT(implicit)
  ExactScalar(QSqrt2 re, QSqrt2 im) : re_(std::move(re)), im_(std::move(im)) {}
  ExactScalar(mpq_class re_rat, mpq_class re_sqrt2, mpq_class im_rat, mpq_class im_sqrt2)
      : re_{std::move(re_rat), std::move(re_sqrt2)}, im_{std::move(im_rat), std::move(im_sqrt2)} {}

  static ExactScalar i() { return {QSqrt2{}, QSqrt2{1, 0}}; }
  static ExactScalar sqrt2() { return {QSqrt2{0, 1}, QSqrt2{}}; }
  static ExactScalar inv_sqrt2() { return {QSqrt2{0, mpq_class(1, 2)}, QSqrt2{}}; }
  static ExactScalar rational(long num, long den = 1) { return {QSqrt2{mpq_class(num, den), 0}, QSqrt2{}}; }
  // 2^{k/2} for any integer k.
  static ExactScalar pow_sqrt2(int k) {
    mpq_class two_pow = 1;
    int h = k >= 0 ? k / 2 : -((-k + 1) / 2);  // floor(k/2)
    for (int j = 0; j < (h >= 0 ? h : -h); ++j) two_pow *= 2;
    if (h < 0) two_pow = 1 / two_pow;
    if (k - 2 * h == 1) return {QSqrt2{0, two_pow}, QSqrt2{}};
    return {QSqrt2{two_pow, 0}, QSqrt2{}};
  }

  const QSqrt2& re() const { return re_; }
  const QSqrt2& im() const { return im_; }
  const mpq_class& re_rat() const { return re_.a; }
  const mpq_class& re_rat_sqrt2() const { return re_.b; }
  const mpq_class& im_rat() const { return im_.a; }
  const mpq_class& im_rat_sqrt2() const { return im_.b; }

  bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
  ExactScalar conj() const { return {re_, -im_}; }
  std::complex<double> to_complex() const { return {re_.to_double(), im_.to_double()}; }

  ExactScalar inverse() const {
    QSqrt2 nrm = re_ * re_ + im_ * im_;
    if (nrm.is_zero()) throw std::domain_error("ExactScalar: inverse of zero");
    QSqrt2 inv = nrm.inverse();
    return {re_ * inv, -(im_ * inv)};
  }

  ExactScalar& operator+=(const ExactScalar& o) { re_ = re_ + o.re_; im_ = im_ + o.im_; return *this; }
  ExactScalar& operator-=(const ExactScalar& o) { re_ = re_ - o.re_; im_ = im_ - o.im_; return *this; }
  ExactScalar& operator*=(const ExactScalar& o) { *this = *this * o; return *this; }

  friend ExactScalar operator+(ExactScalar x, const ExactScalar& y) { return x += y; }
  friend ExactScalar operator-(ExactScalar x, const ExactScalar& y) { return x -= y; }
  friend ExactScalar operator-(const ExactScalar& x) { return {-x.re_, -x.im_}; }
  friend ExactScalar operator*(const ExactScalar& x, const ExactScalar& y) {
    return {x.re_ * y.re_ - x.im_ * y.im_, x.re_ * y.im_ + x.im_ * y.re_};
  }
  friend ExactScalar operator/(const ExactScalar& x, const ExactScalar& y) { return x * y.inverse(); }
  friend bool operator==(const ExactScalar& x, const ExactScalar& y) { return x.re_ == y.re_ && x.im_ == y.im_; }
  friend bool operator!=(const ExactScalar& x, const ExactScalar& y) { return !(x == y); }

  std::string str() const {
    auto part = [](const QSqrt2& q) {
      return "(" + q.a.get_str() + (sgn(q.b) < 0 ? "" : "+") + q.b.get_str() + "r2)";
    };
    return part(re_) + "+i" + part(im_);
  }
  friend std::ostream& operator<<(std::ostream& os, const ExactScalar& s) { return os << s.str(); }

 private:
  QSqrt2 re_;
  QSqrt2 im_;
};

}  // namespace cdlab
