#include "eosim/acs.hpp"

#include <algorithm>
#include <cmath>

#include "eosim/error.hpp"

namespace eosim {

double SlewModel::slew_time(double alpha, double k_sigma) const {
  if (!(alpha >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "slew angle must be >= 0");
  if (!(k_sigma >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "k_sigma must be >= 0");
  return ((c3 * alpha + c2) * alpha + c1) * alpha + c0 + k_sigma * sigma;
}

double slew_angle_deg(const Vec3& sat, const Vec3& from, const Vec3& to) {
  const Vec3 a = from - sat, b = to - sat;
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw Error(ErrorKind::InvalidArgument,
                "slew target coincides with the satellite position");
  // atan2 keeps precision for the near-zero angles between adjacent cells.
  return rad2deg(std::atan2(a.cross(b).norm(), a.dot(b)));
}

double slew_angle(const SatelliteState& state, const GroundPoint& from,
                  const GroundPoint& to) {
  return slew_angle_deg(state.position_ecef,
                        geodetic_to_ecef(from.lat_deg, from.lon_deg),
                        geodetic_to_ecef(to.lat_deg, to.lon_deg));
}

SlewBand slew_band(const SlewModel& model, double dt_step_s,
                   double alpha_max_deg, double k_sigma) {
  if (!(dt_step_s > 0.0))
    throw Error(ErrorKind::InvalidArgument, "scheduler step must be > 0");
  if (!(alpha_max_deg > 0.0 && alpha_max_deg <= 180.0))
    throw Error(ErrorKind::InvalidArgument, "alpha_max must lie in (0, 180]");
  // Guard against ceil() of values a hair above an integer from rounding.
  auto steps = [&](double t) {
    return std::max(1, static_cast<int>(std::ceil(t / dt_step_s - 1e-9)));
  };
  return {steps(model.slew_time(0.0, k_sigma)),
          steps(model.slew_time(alpha_max_deg, k_sigma))};
}

}  // namespace eosim
