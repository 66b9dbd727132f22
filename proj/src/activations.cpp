#include "qnn/activations.hpp"

#include <utility>

namespace qnn {

namespace {

constexpr std::array<std::pair<ActivationKind, std::string_view>, 11> kNames = {{
    {ActivationKind::Norm, "norm"},
    {ActivationKind::MagnitudeTanh, "magnitude-tanh"},
    {ActivationKind::Cardioid, "cardioid"},
    {ActivationKind::PhaseTanh, "phase-tanh"},
    {ActivationKind::PhaseTanhshrink, "phase-tanhshrink"},
    {ActivationKind::ScaledPhaseTanh, "scaled-phase-tanh"},
    {ActivationKind::ScaledPhaseTanhshrink, "scaled-phase-tanhshrink"},
    {ActivationKind::PhaseSin, "phase-sin"},
    {ActivationKind::ScaledPhaseSin, "scaled-phase-sin"},
    {ActivationKind::SplitReLU, "split-relu"},
    {ActivationKind::SplitTanh, "split-tanh"},
}};

}  // namespace

std::string_view to_string(ActivationKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::string_view to_string(AngleConvention conv) {
  return conv == AngleConvention::Psi ? "psi" : "theta";
}

std::optional<ActivationKind> parse_activation(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::optional<AngleConvention> parse_angle(std::string_view name) {
  if (name == "psi") return AngleConvention::Psi;
  if (name == "theta") return AngleConvention::Theta;
  return std::nullopt;
}

}  // namespace qnn
