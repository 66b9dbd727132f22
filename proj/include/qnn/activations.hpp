#pragma once

// Quaternion activation functions.
//
// Magnitude class (Norm, MagnitudeTanh, Cardioid): a = lambda(z) z with a
// scalar lambda >= 0, so the phase and the component ratios are preserved.
//
// Phase class (Phase*, ScaledPhase*): a = |z| (cos g(phi) + n sin g(phi)),
// where phi is psi or theta = 2 psi and n = Im z / |Im z|; the magnitude is
// preserved and only the phase is bent by the gain g.
//
// Split class: a real nonlinearity applied to each component separately.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qnn/qtensor.hpp"
#include "qnn/quaternion.hpp"

namespace qnn {

enum class ActivationKind {
  Norm,
  MagnitudeTanh,
  Cardioid,
  PhaseTanh,
  PhaseTanhshrink,
  ScaledPhaseTanh,
  ScaledPhaseTanhshrink,
  PhaseSin,
  ScaledPhaseSin,
  SplitReLU,
  SplitTanh,
};

enum class AngleConvention { Psi, Theta };

enum class ActivationClass { Magnitude, Phase, Split };

inline constexpr std::array<ActivationKind, 11> kAllActivations = {
    ActivationKind::Norm,           ActivationKind::MagnitudeTanh,
    ActivationKind::Cardioid,       ActivationKind::PhaseTanh,
    ActivationKind::PhaseTanhshrink, ActivationKind::ScaledPhaseTanh,
    ActivationKind::ScaledPhaseTanhshrink, ActivationKind::PhaseSin,
    ActivationKind::ScaledPhaseSin, ActivationKind::SplitReLU,
    ActivationKind::SplitTanh,
};

/// The nine kinds that act on the quaternion as a whole.
inline constexpr std::array<ActivationKind, 9> kQuaternionActivations = {
    ActivationKind::Norm,           ActivationKind::MagnitudeTanh,
    ActivationKind::Cardioid,       ActivationKind::PhaseTanh,
    ActivationKind::PhaseTanhshrink, ActivationKind::ScaledPhaseTanh,
    ActivationKind::ScaledPhaseTanhshrink, ActivationKind::PhaseSin,
    ActivationKind::ScaledPhaseSin,
};

constexpr ActivationClass activation_class(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Norm:
    case ActivationKind::MagnitudeTanh:
    case ActivationKind::Cardioid:
      return ActivationClass::Magnitude;
    case ActivationKind::SplitReLU:
    case ActivationKind::SplitTanh:
      return ActivationClass::Split;
    default:
      return ActivationClass::Phase;
  }
}

std::string_view to_string(ActivationKind kind);
std::string_view to_string(AngleConvention conv);
std::optional<ActivationKind> parse_activation(std::string_view name);
std::optional<AngleConvention> parse_angle(std::string_view name);

/// Raised by strict-mode tensor application; carries the flat element index.
class DegenerateElement : public DegenerateInput {
 public:
  DegenerateElement(std::size_t index, const std::string& what)
      : DegenerateInput(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

namespace detail {

template <std::floating_point T>
T tanhshrink(T x) {
  return x - std::tanh(x);
}

/// Angle fed to the nonlinearity: psi, or theta = 2 psi.
template <std::floating_point T>
constexpr T angle_factor(AngleConvention conv) {
  return conv == AngleConvention::Theta ? T(2) : T(1);
}

/// Small-argument threshold for the tanh(r)/r series.
template <std::floating_point T>
constexpr T series_cutoff() {
  return sizeof(T) >= 8 ? T(1e-3) : T(3e-2);
}

}  // namespace detail

/// Phase transfer g(angle) of a phase-class kind, in the chosen angle units.
/// Magnitude-class kinds return the angle unchanged.
template <std::floating_point T>
T output_phase(ActivationKind kind, AngleConvention conv, T angle) {
  (void)conv;
  constexpr T pi = std::numbers::pi_v<T>;
  switch (kind) {
    case ActivationKind::Norm:
    case ActivationKind::MagnitudeTanh:
    case ActivationKind::Cardioid:
      return angle;
    case ActivationKind::PhaseTanh:
      return std::tanh(angle);
    case ActivationKind::PhaseTanhshrink:
      return detail::tanhshrink(angle);
    case ActivationKind::ScaledPhaseTanh:
      return pi * std::tanh(angle) / std::tanh(pi);
    case ActivationKind::ScaledPhaseTanhshrink:
      return pi * detail::tanhshrink(angle) / detail::tanhshrink(pi);
    case ActivationKind::PhaseSin:
      return std::sin(angle);
    case ActivationKind::ScaledPhaseSin:
      return pi * std::sin(angle);
    case ActivationKind::SplitReLU:
    case ActivationKind::SplitTanh:
      break;
  }
  throw std::invalid_argument("output_phase: split activations have no phase transfer");
}

/// d g / d angle for the phase-class kinds.
template <std::floating_point T>
T output_phase_derivative(ActivationKind kind, T angle) {
  constexpr T pi = std::numbers::pi_v<T>;
  const T t = std::tanh(angle);
  switch (kind) {
    case ActivationKind::PhaseTanh:
      return T(1) - t * t;
    case ActivationKind::PhaseTanhshrink:
      return t * t;
    case ActivationKind::ScaledPhaseTanh:
      return pi * (T(1) - t * t) / std::tanh(pi);
    case ActivationKind::ScaledPhaseTanhshrink:
      return pi * t * t / detail::tanhshrink(pi);
    case ActivationKind::PhaseSin:
      return std::cos(angle);
    case ActivationKind::ScaledPhaseSin:
      return pi * std::cos(angle);
    default:
      throw std::invalid_argument("output_phase_derivative: not a phase-class activation");
  }
}

namespace detail {

template <std::floating_point T>
Quaternion<T> apply_magnitude(ActivationKind kind, AngleConvention conv, const Quaternion<T>& q,
                              DegeneracyMode mode) {
  const T r = norm(q);
  const T eps = epsilon<T>();
  switch (kind) {
    case ActivationKind::Norm:
      if (mode == DegeneracyMode::Strict) {
        if (r <= eps) throw DegenerateInput("Norm: quaternion norm below degeneracy threshold");
        return q / r;
      }
      return q / (r + eps);
    case ActivationKind::MagnitudeTanh:
      if (r < series_cutoff<T>()) {
        const T r2 = r * r;
        return (T(1) - r2 / T(3) + T(2) * r2 * r2 / T(15)) * q;
      }
      return (std::tanh(r) / r) * q;
    case ActivationKind::Cardioid: {
      if (r <= eps) return q;  // psi := 0 at the origin
      const T c = q.w / r;
      const T lambda = conv == AngleConvention::Psi ? T(0.5) * (T(1) + c) : c * c;
      return lambda * q;
    }
    default:
      break;
  }
  throw std::logic_error("apply_magnitude: not a magnitude-class activation");
}

template <std::floating_point T>
Quaternion<T> apply_phase(ActivationKind kind, AngleConvention conv, const Quaternion<T>& q,
                          DegeneracyMode mode) {
  const T r = norm(q);
  const T eps = epsilon<T>();
  if (r <= eps) {
    if (mode == DegeneracyMode::Strict) {
      throw DegenerateInput(std::string(to_string(kind)) +
                            ": quaternion norm below degeneracy threshold");
    }
    return {};
  }
  const T v = imag_norm(q);
  if (v <= eps) {
    // No axis: the imaginary output vanishes, the real part keeps cos g.
    const T psi = q.w >= T(0) ? T(0) : std::numbers::pi_v<T>;
    const T g = output_phase(kind, conv, angle_factor<T>(conv) * psi);
    return Quaternion<T>::real(r * std::cos(g));
  }
  T g;
  if (conv == AngleConvention::Psi &&
      (kind == ActivationKind::PhaseSin || kind == ActivationKind::ScaledPhaseSin)) {
    // sin(psi) = |Im z| / |z| for either sign of the real part.
    const T s = v / r;
    g = kind == ActivationKind::PhaseSin ? s : std::numbers::pi_v<T> * s;
  } else {
    g = output_phase(kind, conv, angle_factor<T>(conv) * std::atan2(v, q.w));
  }
  const T scale = r * std::sin(g) / v;
  return {r * std::cos(g), scale * q.x, scale * q.y, scale * q.z};
}

}  // namespace detail

/// Applies one activation to a single quaternion.
template <std::floating_point T>
Quaternion<T> apply(ActivationKind kind, AngleConvention conv, const Quaternion<T>& q,
                    DegeneracyMode mode = DegeneracyMode::Lenient) {
  switch (activation_class(kind)) {
    case ActivationClass::Magnitude:
      return detail::apply_magnitude(kind, conv, q, mode);
    case ActivationClass::Phase:
      return detail::apply_phase(kind, conv, q, mode);
    case ActivationClass::Split:
      if (kind == ActivationKind::SplitReLU) {
        return {std::max(q.w, T(0)), std::max(q.x, T(0)), std::max(q.y, T(0)),
                std::max(q.z, T(0))};
      }
      return {std::tanh(q.w), std::tanh(q.x), std::tanh(q.y), std::tanh(q.z)};
  }
  return q;
}

/// Vector-Jacobian product of the lenient forward map: returns J^T g where
/// J is the 4x4 real Jacobian of apply() at q. Used for training.
template <std::floating_point T>
Quaternion<T> apply_vjp(ActivationKind kind, AngleConvention conv, const Quaternion<T>& q,
                        const Quaternion<T>& g) {
  const T eps = epsilon<T>();
  const T r = norm(q);
  const auto dot4 = [](const Quaternion<T>& a, const Quaternion<T>& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  };
  switch (activation_class(kind)) {
    case ActivationClass::Split:
      if (kind == ActivationKind::SplitReLU) {
        return {q.w > T(0) ? g.w : T(0), q.x > T(0) ? g.x : T(0), q.y > T(0) ? g.y : T(0),
                q.z > T(0) ? g.z : T(0)};
      } else {
        const auto d = [](T a) {
          const T t = std::tanh(a);
          return T(1) - t * t;
        };
        return {g.w * d(q.w), g.x * d(q.x), g.y * d(q.y), g.z * d(q.z)};
      }

    case ActivationClass::Magnitude: {
      // a = lambda(q) q  =>  J^T g = lambda g + (g . q) grad(lambda)
      T lambda;
      Quaternion<T> grad_lambda{};
      const T gq = dot4(g, q);
      switch (kind) {
        case ActivationKind::Norm: {
          const T d = r + eps;
          lambda = T(1) / d;
          if (r > T(0)) grad_lambda = (-T(1) / (r * d * d)) * q;
          break;
        }
        case ActivationKind::MagnitudeTanh: {
          T dl_over_r;
          if (r < detail::series_cutoff<T>()) {
            const T r2 = r * r;
            lambda = T(1) - r2 / T(3) + T(2) * r2 * r2 / T(15);
            dl_over_r = -T(2) / T(3) + T(8) * r2 / T(15) - T(102) * r2 * r2 / T(315);
          } else {
            const T t = std::tanh(r);
            lambda = t / r;
            dl_over_r = (r * (T(1) - t * t) - t) / (r * r * r);
          }
          grad_lambda = dl_over_r * q;
          break;
        }
        case ActivationKind::Cardioid: {
          if (r <= eps) return g;
          const T r2 = r * r;
          if (conv == AngleConvention::Psi) {
            lambda = T(0.5) * (T(1) + q.w / r);
            grad_lambda = (-T(0.5) * q.w / (r2 * r)) * q;
            grad_lambda.w += T(0.5) / r;
          } else {
            lambda = q.w * q.w / r2;
            grad_lambda = (-T(2) * q.w * q.w / (r2 * r2)) * q;
            grad_lambda.w += T(2) * q.w / r2;
          }
          break;
        }
        default:
          throw std::logic_error("apply_vjp: unreachable");
      }
      return lambda * g + gq * grad_lambda;
    }

    case ActivationClass::Phase: {
      if (r <= eps) return {};
      const T v = imag_norm(q);
      const T k = detail::angle_factor<T>(conv);
      if (v <= eps) {
        const T psi = q.w >= T(0) ? T(0) : std::numbers::pi_v<T>;
        const T gval = output_phase(kind, conv, k * psi);
        return Quaternion<T>::real(g.w * (q.w / r) * std::cos(gval));
      }
      const T psi = std::atan2(v, q.w);
      const T gval = output_phase(kind, conv, k * psi);
      const T gder = output_phase_derivative(kind, k * psi) * k;
      const T cg = std::cos(gval);
      const T sg = std::sin(gval);
      const T s = r * sg / v;
      const T a_w = (q.w / r) * cg + sg * gder * v / r;
      const T a_z = cg / r - sg * gder * q.w / (v * r);
      const T s_w = q.w * sg / (r * v) - cg * gder / r;
      const T s_z = sg / (r * v) + cg * gder * q.w / (r * v * v) - r * sg / (v * v * v);
      const T gz = g.x * q.x + g.y * q.y + g.z * q.z;
      const T common = g.w * a_z + gz * s_z;
      return {g.w * a_w + gz * s_w, s * g.x + common * q.x, s * g.y + common * q.y,
              s * g.z + common * q.z};
    }
  }
  return g;
}

/// Elementwise apply over a tensor. Strict-mode failures report the flat
/// index of the offending element.
template <std::floating_point T>
QTensor<T> apply_tensor(ActivationKind kind, AngleConvention conv, const QTensor<T>& t,
                        DegeneracyMode mode = DegeneracyMode::Lenient) {
  QTensor<T> out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) {
    try {
      out.set(i, apply(kind, conv, t.at(i), mode));
    } catch (const DegenerateInput& e) {
      throw DegenerateElement(i, std::string(e.what()) + " at element " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace qnn
