#pragma once

// Meshgrid data for magnitude surfaces, phase maps and GHR derivative
// magnitudes, one CSV row (re, im, norm, phase) per grid point.

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "qnn/activations.hpp"
#include "qnn/mesh.hpp"

namespace qnn {

enum class GridMode { Value, Derivative };

std::string_view to_string(GridMode mode);
std::optional<GridMode> parse_grid_mode(std::string_view name);

struct GridRow {
  double re = 0;
  double im = 0;
  std::optional<double> norm;
  std::optional<double> phase;
};

/// Rows in y-major order. `kind` = nullopt evaluates the identity map.
/// Value mode: norm = |f(z)|, phase = psi(f(z)); points where f or the phase
/// is undefined are left empty. Derivative mode: norm = |da/dz|, no phase;
/// only the nine quaternion kinds under psi. Throws UnsupportedKind otherwise.
std::vector<GridRow> emit_grid(std::optional<ActivationKind> kind, AngleConvention conv,
                               const MeshSpec& spec, GridMode mode);

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows);

}  // namespace qnn
