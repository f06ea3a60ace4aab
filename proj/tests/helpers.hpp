#pragma once

#include <cmath>
#include <complex>

#include "trimode/model.hpp"
#include "trimode/spectra.hpp"
#include "trimode/transfer.hpp"

namespace testutil {

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double rel(std::complex<double> a, std::complex<double> b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline trimode::SystemConfig table1(double gamma_m_override = -1.0) {
  auto p = trimode::presets::table1();
  if (gamma_m_override >= 0.0) p.mechanical.gamma_m = gamma_m_override;
  return trimode::SystemConfig::create(p);
}

inline trimode::SystemConfig lossless_table1() {
  auto p = trimode::presets::table1();
  p.cavity.gamma_e = 0.0;
  return trimode::SystemConfig::create(p);
}

inline trimode::MeasurementCase make_case(trimode::SqueezeConfig sq,
                                          trimode::Combination comb,
                                          trimode::QuadratureFamily fam =
                                              trimode::QuadratureFamily::amplitude()) {
  trimode::MeasurementCase c;
  c.squeeze = sq;
  c.family = fam;
  c.combination = comb;
  return c;
}

}  // namespace testutil
