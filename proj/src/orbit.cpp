#include "eosim/orbit.hpp"

#include <algorithm>
#include <cmath>

#include "eosim/error.hpp"

namespace eosim {

double orbital_period(double semimajor_axis_km) {
  return 2.0 * kPi * std::sqrt(std::pow(semimajor_axis_km, 3) / kMuEarth);
}

double earth_rotation_angle(double t, const PropagationOptions& opts) {
  return deg2rad(opts.gmst_at_epoch_deg) + kEarthRate * t;
}

namespace {

Vec3 eci_to_ecef(const Vec3& r, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * r.x() + s * r.y(), -s * r.x() + c * r.y(), r.z()};
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

double angle_between_deg(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return rad2deg(std::acos(clamp_unit(a.dot(b) / (na * nb))));
}

}  // namespace

SatelliteState propagate_state(const OrbitalElements& el, double t,
                               const PropagationOptions& opts, int sat_id) {
  if (el.eccentricity != 0.0)
    throw Error(ErrorKind::Unsupported,
                "only circular orbits are supported (eccentricity must be 0)");
  if (el.semimajor_axis_km <= kEarthRadiusKm)
    throw Error(ErrorKind::InvalidArgument,
                "semimajor axis must exceed the Earth radius");

  const double a = el.semimajor_axis_km;
  const double n = std::sqrt(kMuEarth / (a * a * a));
  const double inc = deg2rad(el.inclination_deg);
  double raan = deg2rad(el.raan_deg);
  const double dt = t - el.epoch_s;
  if (opts.j2_raan_drift) {
    const double ratio = kEarthRadiusKm / a;
    raan += -1.5 * n * kJ2 * ratio * ratio * std::cos(inc) * dt;
  }
  const double u =
      deg2rad(el.arg_perigee_deg + el.true_anomaly_deg) + n * dt;

  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);

  SatelliteState s;
  s.sat_id = sat_id;
  s.t = t;
  s.position_eci = a * Vec3(co * cu - so * su * ci, so * cu + co * su * ci,
                            su * si);
  s.velocity_eci = std::sqrt(kMuEarth / a) *
                   Vec3(-co * su - so * cu * ci, -so * su + co * cu * ci,
                        cu * si);
  s.position_ecef = eci_to_ecef(s.position_eci, earth_rotation_angle(t, opts));
  return s;
}

Vec3 geodetic_to_ecef(double lat_deg, double lon_deg, double radius_km) {
  const double lat = deg2rad(lat_deg), lon = deg2rad(lon_deg);
  return radius_km * Vec3(std::cos(lat) * std::cos(lon),
                          std::cos(lat) * std::sin(lon), std::sin(lat));
}

void ecef_to_geodetic(const Vec3& ecef, double& lat_deg, double& lon_deg) {
  lat_deg = rad2deg(std::asin(clamp_unit(ecef.z() / ecef.norm())));
  lon_deg = rad2deg(std::atan2(ecef.y(), ecef.x()));
}

double ground_distance_km(double lat1, double lon1, double lat2,
                          double lon2) {
  const Vec3 a = geodetic_to_ecef(lat1, lon1, 1.0);
  const Vec3 b = geodetic_to_ecef(lat2, lon2, 1.0);
  return kEarthRadiusKm * std::atan2(a.cross(b).norm(), a.dot(b));
}

double off_nadir_angle_deg(const Vec3& sat_ecef, const Vec3& target_ecef) {
  return angle_between_deg(-sat_ecef, target_ecef - sat_ecef);
}

double off_nadir_angle(const SatelliteState& state, const GroundPoint& gp) {
  return off_nadir_angle_deg(state.position_ecef,
                             geodetic_to_ecef(gp.lat_deg, gp.lon_deg));
}

double elevation_deg(const Vec3& sat_ecef, const Vec3& ground_ecef) {
  return 90.0 - angle_between_deg(ground_ecef, sat_ecef - ground_ecef);
}

bool in_field_of_regard(const Vec3& sat_ecef, const Vec3& gp_ecef,
                        double for_half_angle_deg) {
  return elevation_deg(sat_ecef, gp_ecef) > 0.0 &&
         off_nadir_angle_deg(sat_ecef, gp_ecef) <= for_half_angle_deg;
}

std::vector<GroundPoint> ground_points_in_for(const SatelliteState& state,
                                              std::span<const GroundPoint> gps,
                                              double for_half_angle_deg) {
  std::vector<GroundPoint> out;
  for (const auto& gp : gps) {
    if (in_field_of_regard(state.position_ecef,
                           geodetic_to_ecef(gp.lat_deg, gp.lon_deg),
                           for_half_angle_deg))
      out.push_back(gp);
  }
  return out;
}

double ground_range_for_off_nadir_km(double altitude_km,
                                     double off_nadir_deg) {
  const double r = kEarthRadiusKm + altitude_km;
  const double cos_elev = r * std::sin(deg2rad(off_nadir_deg)) / kEarthRadiusKm;
  if (cos_elev > 1.0) return std::nan("");
  const double elev = std::acos(cos_elev);
  const double central = kPi / 2.0 - deg2rad(off_nadir_deg) - elev;
  return kEarthRadiusKm * central;
}

bool line_of_sight(const Vec3& a, const Vec3& b, double min_radius_km) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(-a.dot(d) / len2, 0.0, 1.0);
  return (a + s * d).norm() > min_radius_km;
}

std::vector<OrbitalElements> walker_constellation(const WalkerSpec& spec) {
  if (spec.planes <= 0 || spec.sats_per_plane <= 0)
    throw Error(ErrorKind::InvalidArgument,
                "walker constellation needs at least one plane and satellite");
  std::vector<OrbitalElements> out;
  const double spread = spec.star ? 180.0 : 360.0;
  const double total = spec.planes * spec.sats_per_plane;
  for (int p = 0; p < spec.planes; ++p) {
    for (int s = 0; s < spec.sats_per_plane; ++s) {
      OrbitalElements el;
      el.semimajor_axis_km = kEarthRadiusKm + spec.altitude_km;
      el.inclination_deg = spec.inclination_deg;
      el.raan_deg = p * spread / spec.planes;
      el.true_anomaly_deg = std::fmod(
          s * 360.0 / spec.sats_per_plane + p * spec.phasing * 360.0 / total,
          360.0);
      out.push_back(el);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Access table

AccessTable::AccessTable(std::span<const OrbitalElements> constellation,
                         std::span<const GroundPoint> gps, int n_regions,
                         const AccessOptions& opts)
    : n_sats_(static_cast<int>(constellation.size())),
      n_steps_(static_cast<int>(std::llround(opts.horizon_s / opts.dt_s))),
      n_regions_(n_regions),
      dt_(opts.dt_s) {
  if (opts.dt_s <= 0.0 || opts.horizon_s <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "access step and horizon must be > 0");

  gp_ecef_.reserve(gps.size());
  for (const auto& gp : gps)
    gp_ecef_.push_back(geodetic_to_ecef(gp.lat_deg, gp.lon_deg));

  // Region bounding caps for a cheap reject before per-point checks.
  std::vector<Vec3> center(n_regions, Vec3::Zero());
  std::vector<std::vector<int>> members(n_regions);
  for (std::size_t i = 0; i < gps.size(); ++i) {
    if (gps[i].region < 0 || gps[i].region >= n_regions)
      throw Error(ErrorKind::InvalidArgument, "ground point region out of range");
    center[gps[i].region] += gp_ecef_[i].normalized();
    members[gps[i].region].push_back(static_cast<int>(i));
  }
  std::vector<double> cap_rad(n_regions, 0.0);
  for (int r = 0; r < n_regions; ++r) {
    if (members[r].empty()) continue;
    center[r].normalize();
    for (int i : members[r])
      cap_rad[r] = std::max(
          cap_rad[r],
          std::acos(clamp_unit(center[r].dot(gp_ecef_[i].normalized()))));
  }

  sat_ecef_.resize(static_cast<std::size_t>(n_sats_) * n_steps_);
  offsets_.assign(static_cast<std::size_t>(n_sats_) * n_steps_ + 1, 0);
  region_access_.assign(static_cast<std::size_t>(n_sats_) * n_regions_, {});

  for (int s = 0; s < n_sats_; ++s) {
    const double alt =
        constellation[s].semimajor_axis_km - kEarthRadiusKm;
    const double reach =
        ground_range_for_off_nadir_km(alt, opts.for_half_angle_deg);
    // Beyond-horizon FOR: anything on the visible cap qualifies.
    const double lambda_max =
        std::isnan(reach)
            ? std::acos(kEarthRadiusKm / constellation[s].semimajor_axis_km)
            : reach / kEarthRadiusKm;
    std::vector<int> open_since(n_regions, -1);
    for (int k = 0; k < n_steps_; ++k) {
      const std::size_t idx = static_cast<std::size_t>(s) * n_steps_ + k;
      const Vec3 pos =
          propagate_state(constellation[s], time_of(k), opts.propagation, s)
              .position_ecef;
      sat_ecef_[idx] = pos;
      const Vec3 nadir = pos.normalized();
      for (int r = 0; r < n_regions; ++r) {
        bool any = false;
        if (!members[r].empty()) {
          const double c = std::acos(clamp_unit(nadir.dot(center[r])));
          if (c <= lambda_max + cap_rad[r] + 1e-9) {
            for (int i : members[r]) {
              if (in_field_of_regard(pos, gp_ecef_[i],
                                     opts.for_half_angle_deg)) {
                visible_.push_back(i);
                any = true;
              }
            }
          }
        }
        auto& list = region_access_[static_cast<std::size_t>(s) * n_regions_ + r];
        if (any && open_since[r] < 0) open_since[r] = k;
        if (!any && open_since[r] >= 0) {
          list.push_back({time_of(open_since[r]), time_of(k)});
          open_since[r] = -1;
        }
      }
      // Regions are appended in order, but gp indices may interleave.
      std::sort(visible_.begin() + static_cast<std::ptrdiff_t>(offsets_[idx]),
                visible_.end());
      offsets_[idx + 1] = visible_.size();
    }
    for (int r = 0; r < n_regions; ++r) {
      if (open_since[r] >= 0)
        region_access_[static_cast<std::size_t>(s) * n_regions_ + r].push_back(
            {time_of(open_since[r]), time_of(n_steps_)});
    }
  }
}

AccessTable AccessTable::from_samples(
    int n_sats, int n_steps, double dt_s, std::vector<Vec3> sat_ecef,
    std::vector<Vec3> gp_ecef, std::span<const int> gp_region, int n_regions,
    const std::vector<std::vector<int>>& visible) {
  const auto cells = static_cast<std::size_t>(n_sats) * n_steps;
  if (n_sats < 0 || n_steps < 0 || dt_s <= 0.0 || sat_ecef.size() != cells ||
      visible.size() != cells || gp_region.size() != gp_ecef.size())
    throw Error(ErrorKind::InvalidArgument, "inconsistent access samples");
  AccessTable a;
  a.n_sats_ = n_sats;
  a.n_steps_ = n_steps;
  a.n_regions_ = n_regions;
  a.dt_ = dt_s;
  a.sat_ecef_ = std::move(sat_ecef);
  a.gp_ecef_ = std::move(gp_ecef);
  a.offsets_.assign(cells + 1, 0);
  a.region_access_.assign(static_cast<std::size_t>(n_sats) * n_regions, {});
  const int n_gp = static_cast<int>(a.gp_ecef_.size());
  for (int s = 0; s < n_sats; ++s) {
    std::vector<int> open_since(n_regions, -1);
    for (int k = 0; k <= n_steps; ++k) {
      std::vector<char> any(n_regions, 0);
      if (k < n_steps) {
        const std::size_t idx = static_cast<std::size_t>(s) * n_steps + k;
        std::vector<int> v = visible[idx];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        for (int g : v) {
          if (g < 0 || g >= n_gp || gp_region[g] < 0 || gp_region[g] >= n_regions)
            throw Error(ErrorKind::InvalidArgument, "visible gp index out of range");
          any[gp_region[g]] = 1;
        }
        a.visible_.insert(a.visible_.end(), v.begin(), v.end());
        a.offsets_[idx + 1] = a.visible_.size();
      }
      for (int r = 0; r < n_regions; ++r) {
        auto& list = a.region_access_[static_cast<std::size_t>(s) * n_regions + r];
        if (any[r] && open_since[r] < 0) open_since[r] = k;
        if (!any[r] && open_since[r] >= 0) {
          list.push_back({a.time_of(open_since[r]), a.time_of(k)});
          open_since[r] = -1;
        }
      }
    }
  }
  return a;
}

std::span<const int> AccessTable::visible(int sat, int step) const {
  const std::size_t idx = static_cast<std::size_t>(sat) * n_steps_ + step;
  return {visible_.data() + offsets_[idx], offsets_[idx + 1] - offsets_[idx]};
}

bool AccessTable::is_visible(int sat, int step, int gp_index) const {
  const auto v = visible(sat, step);
  return std::binary_search(v.begin(), v.end(), gp_index);
}

const Vec3& AccessTable::sat_ecef(int sat, int step) const {
  return sat_ecef_[static_cast<std::size_t>(sat) * n_steps_ + step];
}

std::span<const AccessInterval> AccessTable::region_access(int sat,
                                                           int region) const {
  return region_access_[static_cast<std::size_t>(sat) * n_regions_ + region];
}

// ---------------------------------------------------------------------------
// Bundle recipients

std::vector<Recipient> bundle_recipients(
    double t_gen, std::span<const std::vector<AccessInterval>> per_sat,
    int source, int max_priority) {
  std::vector<Recipient> out;
  for (int s = 0; s < static_cast<int>(per_sat.size()); ++s) {
    if (s == source) continue;
    for (const auto& iv : per_sat[s]) {
      if (iv.end > t_gen) {
        out.push_back({s, 0, std::max(iv.start, t_gen)});
        break;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Recipient& a, const Recipient& b) {
    return a.next_access != b.next_access ? a.next_access < b.next_access
                                          : a.sat < b.sat;
  });
  if (static_cast<int>(out.size()) > max_priority) out.resize(max_priority);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].priority = static_cast<int>(i) + 1;
  return out;
}

std::vector<Recipient> bundle_recipients(int region, double t_gen,
                                         const AccessTable& access, int source,
                                         int max_priority) {
  std::vector<std::vector<AccessInterval>> per_sat(access.num_sats());
  for (int s = 0; s < access.num_sats(); ++s) {
    const auto iv = access.region_access(s, region);
    per_sat[s].assign(iv.begin(), iv.end());
  }
  return bundle_recipients(t_gen, per_sat, source, max_priority);
}

}  // namespace eosim
