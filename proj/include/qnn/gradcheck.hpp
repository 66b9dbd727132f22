#pragma once

// Central-difference checks of tape gradients with respect to parameters.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qnn/activations.hpp"
#include "qnn/autodiff.hpp"

namespace qnn {

struct GradcheckResult {
  std::string label;
  std::size_t checked = 0;
  /// max |analytic - numeric| / max(|analytic|, |numeric|, floor)
  double max_rel_error = 0;
  double max_abs_error = 0;
};

/// Builds a scalar loss from parameter leaves placed on the tape in order.
using LossBuilder = std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

inline constexpr double kGradcheckFloor = 1e-3;

/// Compares backward() against (L(p + h) - L(p - h)) / 2h at `samples`
/// seeded random scalar positions across all parameter tensors.
GradcheckResult gradcheck(const LossBuilder& build, std::vector<Tensor<double>> params,
                          std::size_t samples, double h, std::uint64_t seed,
                          Backend backend = Backend::Serial);

/// Two quaternion convolutions with activations, a pool and a real head.
GradcheckResult gradcheck_conv_model(ActivationKind kind, AngleConvention conv, std::uint64_t seed,
                                     std::size_t samples = 50, double h = 1e-5,
                                     Backend backend = Backend::Serial);

/// Two quaternion linear layers with activations and a real head.
GradcheckResult gradcheck_linear_model(ActivationKind kind, AngleConvention conv,
                                       std::uint64_t seed, std::size_t samples = 50,
                                       double h = 1e-5, Backend backend = Backend::Serial);

}  // namespace qnn
