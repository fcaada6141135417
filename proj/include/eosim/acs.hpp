#pragma once

// Slew geometry and the cubic maneuver-time surrogate.

#include "eosim/orbit.hpp"

namespace eosim {

struct SlewModel {
  double c3 = 6.1974e-6;  // s/deg^3
  double c2 = 1.3904e-3;  // s/deg^2
  double c1 = 1.4165e-1;  // s/deg
  double c0 = 4.6231;     // s
  double sigma = 0.2116;  // s, fit standard deviation

  /// Maneuver time for a slew of `alpha_deg` padded by `k_sigma` standard
  /// deviations. Throws on negative angles.
  double slew_time(double alpha_deg, double k_sigma = 2.0) const;
};

/// Angle at the satellite between the lines of sight to two targets.
double slew_angle_deg(const Vec3& sat, const Vec3& from, const Vec3& to);
double slew_angle(const SatelliteState& state, const GroundPoint& from,
                  const GroundPoint& to);

struct SlewBand {
  int n_min = 1;
  int n_max = 1;
};

/// Predecessor band, in scheduler steps, spanned by the fastest and the
/// slowest admissible reorientation.
SlewBand slew_band(const SlewModel& model, double dt_step_s,
                   double alpha_max_deg, double k_sigma = 2.0);

}  // namespace eosim
