#pragma once

#include <cmath>

namespace critcycle {

/// Phase-space vector (x, p).
struct Vec2 {
  double x{0.0};
  double p{0.0};

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

/// Dense real 2x2 matrix, row-major.
struct Matrix2 {
  double a{0.0}, b{0.0};  // row 0
  double c{0.0}, d{0.0};  // row 1

  static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Matrix2 diagonal(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }
  static Matrix2 rotation(double angle) {
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    return {cs, -sn, sn, cs};
  }

  constexpr double operator()(int row, int col) const {
    return row == 0 ? (col == 0 ? a : b) : (col == 0 ? c : d);
  }

  constexpr double trace() const { return a + d; }
  /// Kahan's fma form keeps det(R) accurate when R is strongly squeezed.
  double determinant() const {
    const double w = b * c;
    const double err = std::fma(-b, c, w);
    return std::fma(a, d, -w) + err;
  }
  constexpr Matrix2 transposed() const { return {a, c, b, d}; }
  constexpr Matrix2 symmetrized() const {
    const double off = 0.5 * (b + c);
    return {a, off, off, d};
  }
  /// Caller guarantees a non-zero determinant.
  Matrix2 inverse() const { return inverse(determinant()); }
  /// Inverse from a determinant known more accurately than the entries resolve it.
  constexpr Matrix2 inverse(double det) const { return {d / det, -b / det, -c / det, a / det}; }
  bool is_finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
  }

  constexpr Matrix2& operator+=(const Matrix2& o) {
    a += o.a;
    b += o.b;
    c += o.c;
    d += o.d;
    return *this;
  }
  friend constexpr Matrix2 operator+(Matrix2 l, const Matrix2& r) { return l += r; }
  friend constexpr Matrix2 operator-(const Matrix2& l, const Matrix2& r) {
    return {l.a - r.a, l.b - r.b, l.c - r.c, l.d - r.d};
  }
  friend constexpr Matrix2 operator*(double s, const Matrix2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend constexpr Matrix2 operator*(const Matrix2& l, const Matrix2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
  friend constexpr Vec2 operator*(const Matrix2& m, const Vec2& v) {
    return {m.a * v.x + m.b * v.p, m.c * v.x + m.d * v.p};
  }
  friend constexpr bool operator==(const Matrix2&, const Matrix2&) = default;
};

/// Largest absolute entry of l - r.
inline double max_abs_difference(const Matrix2& l, const Matrix2& r) {
  const Matrix2 diff = l - r;
  return std::fmax(std::fmax(std::fabs(diff.a), std::fabs(diff.b)),
                   std::fmax(std::fabs(diff.c), std::fabs(diff.d)));
}

}  // namespace critcycle
