#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace mdkit {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <std::size_t N>
using Vec = std::array<double, N>;

/// Phase point of the planar system: position and velocity.
struct State {
  double x = 0.0;
  double y = 0.0;

  [[nodiscard]] Vec<2> as_vec() const { return {x, y}; }
  [[nodiscard]] static State from_vec(const Vec<2>& v) { return {v[0], v[1]}; }
  [[nodiscard]] double norm() const { return std::hypot(x, y); }
  [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  friend State operator+(State a, State b) { return {a.x + b.x, a.y + b.y}; }
  friend State operator-(State a, State b) { return {a.x - b.x, a.y - b.y}; }
  friend State operator*(double s, State a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const State&, const State&) = default;
};

/// Real 2x2 matrix, row-major entries.
struct Mat2 {
  double m11 = 0.0;
  double m12 = 0.0;
  double m21 = 0.0;
  double m22 = 0.0;

  [[nodiscard]] static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  [[nodiscard]] static constexpr Mat2 zero() { return {}; }

  [[nodiscard]] double det() const { return m11 * m22 - m12 * m21; }
  [[nodiscard]] double trace() const { return m11 + m22; }

  [[nodiscard]] State operator*(State v) const {
    return {m11 * v.x + m12 * v.y, m21 * v.x + m22 * v.y};
  }
  [[nodiscard]] Mat2 operator*(const Mat2& o) const {
    return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
            m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;

  [[nodiscard]] double max_abs() const {
    return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
  }
};

/// Parameters of x'' + (omega_n^2 + eps cos(omega_p t)) x + eps alpha x^3 = eps f(t).
struct ModelParams {
  double omega_n = 1.0;
  double omega_p = 1.0;
  double epsilon = 0.0;
  double alpha = 1.0;

  /// omega_n == omega_p == omega.
  [[nodiscard]] static ModelParams resonant(double omega, double epsilon, double alpha);

  [[nodiscard]] bool is_resonant() const { return omega_n == omega_p; }
  [[nodiscard]] double period() const { return kTwoPi / omega_p; }

  /// Throws InvalidArgument unless both frequencies are positive and all fields finite.
  void validate() const;
};

/// Zero-mean truncated Fourier series sum_{n>=1} a_n cos(n w t) + b_n sin(n w t).
/// a[0] and b[0] hold the first harmonic; the two lists may differ in length.
struct ForcingSeries {
  std::vector<double> a;
  std::vector<double> b;

  [[nodiscard]] std::size_t harmonics() const { return std::max(a.size(), b.size()); }
  [[nodiscard]] double a_n(std::size_t n) const { return n >= 1 && n <= a.size() ? a[n - 1] : 0.0; }
  [[nodiscard]] double b_n(std::size_t n) const { return n >= 1 && n <= b.size() ? b[n - 1] : 0.0; }
  [[nodiscard]] bool has_first_harmonic() const { return a_n(1) != 0.0 || b_n(1) != 0.0; }
};

}  // namespace mdkit
