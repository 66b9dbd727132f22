#pragma once

// GHR derivatives da/dz = 1/4 (da/dz0 - da/dz1 i - da/dz2 j - da/dz3 k) of
// the quaternion activations: closed forms and a central-difference oracle.

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qnn/activations.hpp"
#include "qnn/mesh.hpp"
#include "qnn/quaternion.hpp"

namespace qnn {

struct GhrDerivative {
  Quatd value;
};

class UnsupportedKind : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed-form GHR derivative for the nine quaternion kinds (psi convention).
/// Throws UnsupportedKind for split kinds or theta, DegenerateInput when
/// |Im q| or |q| is at or below the degeneracy threshold.
GhrDerivative analytic_ghr(ActivationKind kind, const Quatd& q,
                           AngleConvention conv = AngleConvention::Psi);

/// Central differences of f along each component, combined with conjugated
/// basis units on the right.
GhrDerivative numeric_ghr(const std::function<Quatd(const Quatd&)>& f, const Quatd& q,
                          double h = 1e-6);

/// |analytic_ghr| at each mesh point in y-major order; empty where the
/// derivative is undefined.
std::vector<std::optional<double>> derivative_grid(ActivationKind kind, const MeshSpec& grid);

}  // namespace qnn
