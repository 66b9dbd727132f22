#include "qnn/viz.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "qnn/ghr.hpp"

namespace qnn {

std::string_view to_string(GridMode mode) {
  return mode == GridMode::Value ? "value" : "derivative";
}

std::optional<GridMode> parse_grid_mode(std::string_view name) {
  if (name == "value") return GridMode::Value;
  if (name == "derivative") return GridMode::Derivative;
  return std::nullopt;
}

namespace {

GridRow value_row(std::optional<ActivationKind> kind, AngleConvention conv, const MeshSpec& spec,
                  std::size_t i) {
  const double eps = epsilon<double>();
  GridRow row;
  row.re = spec.re_at(i % spec.resolution);
  row.im = spec.im_at(i / spec.resolution);
  if (!kind) {
    row.norm = std::sqrt(row.re * row.re + row.im * row.im);
    if (*row.norm > eps) row.phase = std::atan2(row.im, row.re);
    return row;
  }
  const Quatd z = spec.point(i);
  if (activation_class(*kind) == ActivationClass::Phase && imag_norm(z) <= eps) return row;
  Quatd a;
  try {
    a = apply(*kind, conv, z, DegeneracyMode::Strict);
  } catch (const DegenerateInput&) {
    return row;
  }
  row.norm = norm(a);
  if (*row.norm > eps) row.phase = phase_psi(a);
  return row;
}

}  // namespace

std::vector<GridRow> emit_grid(std::optional<ActivationKind> kind, AngleConvention conv,
                               const MeshSpec& spec, GridMode mode) {
  spec.validate();
  std::vector<GridRow> rows(spec.size());
  if (mode == GridMode::Value) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows.size()); ++i) {
      rows[static_cast<std::size_t>(i)] = value_row(kind, conv, spec, static_cast<std::size_t>(i));
    }
    return rows;
  }

  if (kind && activation_class(*kind) == ActivationClass::Split) {
    throw UnsupportedKind("derivative grids are defined for quaternion activations only, not " +
                          std::string(to_string(*kind)));
  }
  if (conv != AngleConvention::Psi) {
    throw UnsupportedKind("derivative grids are defined for the psi convention only");
  }
  std::vector<std::optional<double>> values;
  if (kind) values = derivative_grid(*kind, spec);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].re = spec.re_at(i % spec.resolution);
    rows[i].im = spec.im_at(i / spec.resolution);
    rows[i].norm = kind ? values[i] : std::optional<double>(1.0);
  }
  return rows;
}

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows) {
  os << "re,im,norm,phase\n";
  char buf[128];
  const auto field = [&](const std::optional<double>& v) -> std::string {
    if (!v) return {};
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
  };
  for (const auto& r : rows) {
    os << field(r.re) << ',' << field(r.im) << ',' << field(r.norm) << ',' << field(r.phase) << '\n';
  }
}

}  // namespace qnn
