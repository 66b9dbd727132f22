#pragma once

// Quaternion algebra: Hamilton product, norms, phase and polar form.
//
// A quaternion q = w + xi + yj + zk is stored as its four real components.
// The phase psi is the angle between the real part and the imaginary
// vector, psi = atan2(|Im q|, Re q) in [0, pi]; the rotation angle of a unit
// quaternion is theta = 2 psi.

#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qnn {

/// Norm threshold below which a quaternion (or its imaginary part) is
/// treated as degenerate.
template <std::floating_point T>
constexpr T epsilon() {
  if constexpr (sizeof(T) >= 8) {
    return T(1e-12);
  } else {
    return T(1e-6);
  }
}

/// Strict: degenerate inputs raise DegenerateInput. Lenient: limit
/// conventions are used (axis -> zero vector, psi -> 0 at the origin).
enum class DegeneracyMode { Strict, Lenient };

class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <std::floating_point T>
struct Quaternion {
  T w{};
  T x{};
  T y{};
  T z{};

  constexpr Quaternion() = default;
  constexpr Quaternion(T w_, T x_, T y_, T z_) : w{w_}, x{x_}, y{y_}, z{z_} {}

  static constexpr Quaternion real(T w) { return {w, T(0), T(0), T(0)}; }
  static constexpr Quaternion pure(T x, T y, T z) { return {T(0), x, y, z}; }

  constexpr T operator[](std::size_t c) const {
    return c == 0 ? w : c == 1 ? x : c == 2 ? y : z;
  }
  constexpr T& operator[](std::size_t c) {
    return c == 0 ? w : c == 1 ? x : c == 2 ? y : z;
  }

  constexpr Quaternion vec() const { return {T(0), x, y, z}; }

  constexpr bool operator==(const Quaternion&) const = default;

  template <std::floating_point U>
  constexpr Quaternion<U> cast() const {
    return {U(w), U(x), U(y), U(z)};
  }
};

using Quatd = Quaternion<double>;
using Quatf = Quaternion<float>;

template <std::floating_point T>
constexpr Quaternion<T> operator+(const Quaternion<T>& p, const Quaternion<T>& q) {
  return {p.w + q.w, p.x + q.x, p.y + q.y, p.z + q.z};
}

template <std::floating_point T>
constexpr Quaternion<T> operator-(const Quaternion<T>& p, const Quaternion<T>& q) {
  return {p.w - q.w, p.x - q.x, p.y - q.y, p.z - q.z};
}

template <std::floating_point T>
constexpr Quaternion<T> operator-(const Quaternion<T>& q) {
  return {-q.w, -q.x, -q.y, -q.z};
}

template <std::floating_point T>
constexpr Quaternion<T> operator*(T s, const Quaternion<T>& q) {
  return {s * q.w, s * q.x, s * q.y, s * q.z};
}

template <std::floating_point T>
constexpr Quaternion<T> operator*(const Quaternion<T>& q, T s) {
  return s * q;
}

template <std::floating_point T>
constexpr Quaternion<T> operator/(const Quaternion<T>& q, T s) {
  return {q.w / s, q.x / s, q.y / s, q.z / s};
}

template <std::floating_point T>
constexpr Quaternion<T> add(const Quaternion<T>& p, const Quaternion<T>& q) {
  return p + q;
}

/// Hamilton product p (x) q. Not commutative.
template <std::floating_point T>
constexpr Quaternion<T> hamilton(const Quaternion<T>& p, const Quaternion<T>& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

template <std::floating_point T>
constexpr Quaternion<T> operator*(const Quaternion<T>& p, const Quaternion<T>& q) {
  return hamilton(p, q);
}

template <std::floating_point T>
constexpr Quaternion<T> conj(const Quaternion<T>& q) {
  return {q.w, -q.x, -q.y, -q.z};
}

template <std::floating_point T>
T norm(const Quaternion<T>& q) {
  return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}

template <std::floating_point T>
T imag_norm(const Quaternion<T>& q) {
  return std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
}

template <std::floating_point T>
bool is_finite(const Quaternion<T>& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

/// psi = atan2(|Im q|, Re q), in [0, pi].
template <std::floating_point T>
T phase_psi(const Quaternion<T>& q, DegeneracyMode mode = DegeneracyMode::Strict) {
  if (norm(q) <= epsilon<T>()) {
    if (mode == DegeneracyMode::Strict) {
      throw DegenerateInput("phase_psi: quaternion norm below degeneracy threshold");
    }
    return T(0);
  }
  return std::atan2(imag_norm(q), q.w);
}

/// Rotation angle theta = 2 psi, in [0, 2 pi].
template <std::floating_point T>
T angle_theta(const Quaternion<T>& q, DegeneracyMode mode = DegeneracyMode::Strict) {
  return T(2) * phase_psi(q, mode);
}

template <std::floating_point T>
struct Polar {
  T magnitude{};
  std::optional<std::array<T, 3>> axis;  ///< unset when |Im q| <= epsilon
  T phase{};                             ///< psi in [0, pi]
};

template <std::floating_point T>
Polar<T> to_polar(const Quaternion<T>& q, DegeneracyMode mode = DegeneracyMode::Strict) {
  const T r = norm(q);
  if (r <= epsilon<T>()) {
    if (mode == DegeneracyMode::Strict) {
      throw DegenerateInput("to_polar: quaternion norm below degeneracy threshold");
    }
    return {r, std::nullopt, T(0)};
  }
  const T v = imag_norm(q);
  Polar<T> p{r, std::nullopt, std::atan2(v, q.w)};
  if (v > epsilon<T>()) {
    p.axis = std::array<T, 3>{q.x / v, q.y / v, q.z / v};
  }
  return p;
}

/// |q| (cos psi + n sin psi); an undefined axis contributes nothing.
template <std::floating_point T>
Quaternion<T> from_polar(const Polar<T>& p) {
  const T c = p.magnitude * std::cos(p.phase);
  if (!p.axis) {
    return Quaternion<T>::real(c);
  }
  const T s = p.magnitude * std::sin(p.phase);
  const auto& n = *p.axis;
  return {c, s * n[0], s * n[1], s * n[2]};
}

template <std::floating_point T>
std::ostream& operator<<(std::ostream& os, const Quaternion<T>& q) {
  return os << '(' << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ')';
}

}  // namespace qnn
