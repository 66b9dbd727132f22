#include "qnn/ghr.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qnn {

namespace {

constexpr double kPi = std::numbers::pi;

double tanhshrink(double x) { return x - std::tanh(x); }

struct Terms {
  double w;     // real part z0
  double r;     // |z|
  double v;     // |Im z|
  double psi;   // phase
  Quatd z;      // full quaternion
  Quatd zv;     // imaginary vector as a pure quaternion
  Quatd zc;     // conjugate of z
  Quatd zv_zc;  // (Im z) (x) conj(z)
};

Terms terms(const Quatd& q) {
  Terms t{q.w, norm(q), imag_norm(q), 0.0, q, q.vec(), conj(q), {}};
  t.psi = std::atan2(t.v, t.w);
  t.zv_zc = hamilton(t.zv, t.zc);
  return t;
}

Quatd real(double s) { return Quatd::real(s); }

// Rows of the derivative table; each product is taken in written order.

Quatd phase_sin(const Terms& t, double scale) {
  const double r2 = t.r * t.r;
  const double ang = scale * t.v / t.r;
  const Quatd c_part = real(scale) - (scale / r2) * t.zv_zc + t.zc / t.r;
  const Quatd s_part = (scale * t.v / r2) * t.zc + (scale / t.v) * t.zv + real(2.0 * t.r / t.v) +
                       t.zv_zc / (t.v * t.r);
  return 0.25 * (std::cos(ang) * c_part + std::sin(ang) * s_part);
}

Quatd phase_tanh(const Terms& t, double scale) {
  const double th = std::tanh(t.psi);
  const double sech2 = 1.0 - th * th;
  const double ang = scale * th;
  const Quatd c_part =
      real(-scale * t.w * (th * th - 1.0) / t.r) + (scale * (th * th - 1.0) / t.r) * t.zv + t.zc / t.r;
  const Quatd s_part = (scale * t.w * sech2 / (t.v * t.r)) * t.zv + t.zv_zc / (t.v * t.r) +
                       real(scale * t.v * sech2 / t.r) + real(2.0 * t.r / t.v);
  return 0.25 * (std::cos(ang) * c_part + std::sin(ang) * s_part);
}

Quatd phase_tanhshrink(const Terms& t, double scale) {
  const double th2 = std::tanh(t.psi) * std::tanh(t.psi);
  const double ang = scale * tanhshrink(t.psi);
  const Quatd c_part = real(scale * t.w * th2 / t.r) - (scale * th2 / t.r) * t.zv + t.zc / t.r;
  const Quatd s_part = real(scale * t.v * th2 / t.r) + real(2.0 * t.r / t.v) +
                       (scale * t.w * th2 / (t.v * t.r)) * t.zv + t.zv_zc / (t.v * t.r);
  return 0.25 * (std::cos(ang) * c_part + std::sin(ang) * s_part);
}

}  // namespace

GhrDerivative analytic_ghr(ActivationKind kind, const Quatd& q, AngleConvention conv) {
  if (activation_class(kind) == ActivationClass::Split) {
    throw UnsupportedKind("analytic_ghr: split activations have no quaternion derivative row");
  }
  if (conv != AngleConvention::Psi) {
    throw UnsupportedKind("analytic_ghr: closed forms exist for the psi convention only");
  }
  const Terms t = terms(q);
  const double eps = epsilon<double>();
  if (t.r <= eps || t.v <= eps) {
    throw DegenerateInput("analytic_ghr: derivative undefined for |q| or |Im q| at or below " +
                          std::to_string(eps));
  }
  switch (kind) {
    case ActivationKind::Norm:
      return {real(3.0 / (4.0 * t.r))};
    case ActivationKind::MagnitudeTanh: {
      const double th = std::tanh(t.r);
      return {real(3.0 * th / (4.0 * t.r) + (1.0 - th * th) / 4.0)};
    }
    case ActivationKind::Cardioid:
      return {0.5 * (real(1.0 + 3.0 * t.w / (4.0 * t.r)) + t.z / (4.0 * t.r))};
    case ActivationKind::PhaseSin:
      return {phase_sin(t, 1.0)};
    case ActivationKind::ScaledPhaseSin:
      return {phase_sin(t, kPi)};
    case ActivationKind::PhaseTanh:
      return {phase_tanh(t, 1.0)};
    case ActivationKind::ScaledPhaseTanh:
      return {phase_tanh(t, kPi / std::tanh(kPi))};
    case ActivationKind::PhaseTanhshrink:
      return {phase_tanhshrink(t, 1.0)};
    case ActivationKind::ScaledPhaseTanhshrink:
      return {phase_tanhshrink(t, kPi / tanhshrink(kPi))};
    default:
      break;
  }
  throw UnsupportedKind("analytic_ghr: unsupported activation");
}

GhrDerivative numeric_ghr(const std::function<Quatd(const Quatd&)>& f, const Quatd& q, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("numeric_ghr: step must be positive");
  Quatd acc{};
  for (std::size_t c = 0; c < 4; ++c) {
    Quatd plus = q;
    Quatd minus = q;
    plus[c] += h;
    minus[c] -= h;
    const Quatd partial = (f(plus) - f(minus)) / (2.0 * h);
    Quatd unit_conj{};
    unit_conj[c] = c == 0 ? 1.0 : -1.0;
    acc = acc + hamilton(partial, unit_conj);
  }
  return {0.25 * acc};
}

std::vector<std::optional<double>> derivative_grid(ActivationKind kind, const MeshSpec& grid) {
  grid.validate();
  if (activation_class(kind) == ActivationClass::Split) {
    throw UnsupportedKind("derivative_grid: split activations are not supported");
  }
  std::vector<std::optional<double>> out(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i) {
    const Quatd z = grid.point(static_cast<std::size_t>(i));
    const double eps = epsilon<double>();
    if (norm(z) <= eps || imag_norm(z) <= eps) continue;
    out[static_cast<std::size_t>(i)] = norm(analytic_ghr(kind, z).value);
  }
  return out;
}

}  // namespace qnn
