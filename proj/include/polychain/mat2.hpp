#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <type_traits>

namespace polychain {

using cplx = std::complex<double>;

template <class T>
using Vec2T = std::array<T, 2>;
using Vec2 = Vec2T<double>;
using CVec2 = Vec2T<cplx>;

inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& x) { return std::norm(x); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
template <class T>
struct Mat2T {
  T a{}, b{}, c{}, d{};

  static Mat2T identity() { return {T(1), T(0), T(0), T(1)}; }
  static Mat2T zero() { return {}; }

  T det() const { return a * d - b * c; }
  T trace() const { return a + d; }

  /// Exact inverse via the adjugate.
  Mat2T inverse() const {
    const T det_ = det();
    return {d / det_, -b / det_, -c / det_, a / det_};
  }
  /// Inverse of a unimodular matrix (adjugate without division).
  Mat2T adjugate() const { return {d, -b, -c, a}; }

  Mat2T transpose() const { return {a, c, b, d}; }

  double max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  }

  /// Squared Frobenius norm.
  double frobenius2() const { return abs2(a) + abs2(b) + abs2(c) + abs2(d); }

  Vec2T<T> operator*(const Vec2T<T>& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }

  Mat2T& operator*=(T s) {
    a *= s; b *= s; c *= s; d *= s;
    return *this;
  }
};

using Mat2 = Mat2T<double>;
using CMat2 = Mat2T<cplx>;

template <class T>
Mat2T<T> operator*(const Mat2T<T>& x, const Mat2T<T>& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}
template <class T>
Mat2T<T> operator+(const Mat2T<T>& x, const Mat2T<T>& y) {
  return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}
template <class T>
Mat2T<T> operator-(const Mat2T<T>& x, const Mat2T<T>& y) {
  return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
}
template <class T>
Mat2T<T> operator*(T s, Mat2T<T> x) {
  x *= s;
  return x;
}

inline CMat2 to_complex(const Mat2& m) { return {m.a, m.b, m.c, m.d}; }

/// Largest singular value, closed form.
inline double spectral_norm(const Mat2& m) {
  const double p = std::hypot(m.a + m.d, m.b - m.c);
  const double q = std::hypot(m.a - m.d, m.b + m.c);
  return 0.5 * (p + q);
}

inline double spectral_norm(const CMat2& m) {
  const double f = m.frobenius2();
  const double det2 = std::norm(m.det());
  const double disc = std::max(0.0, f * f - 4.0 * det2);
  return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

/// Smallest singular value.
inline double min_singular(const Mat2& m) {
  const double p = std::hypot(m.a + m.d, m.b - m.c);
  const double q = std::hypot(m.a - m.d, m.b + m.c);
  return 0.5 * std::abs(p - q);
}

/// Commutator [x, y] = xy - yx.
template <class T>
Mat2T<T> commutator(const Mat2T<T>& x, const Mat2T<T>& y) {
  return x * y - y * x;
}

inline Mat2 rotation(double eta) {
  const double c = std::cos(eta), s = std::sin(eta);
  return {c, -s, s, c};
}

inline Vec2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double norm(const CVec2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

}  // namespace polychain
