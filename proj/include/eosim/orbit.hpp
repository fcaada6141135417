#pragma once

// Two-body circular propagation, field-of-regard access, line-of-sight
// contact plans and bundle recipient priorities.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace eosim {

using Vec3 = Eigen::Vector3d;

inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kMuEarth = 398600.4418;      // km^3/s^2
inline constexpr double kEarthRate = 7.2921159e-5;   // rad/s
inline constexpr double kLightSpeedKmS = 299792.458;
inline constexpr double kJ2 = 1.08262668e-3;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

struct OrbitalElements {
  double semimajor_axis_km = kEarthRadiusKm + 710.0;
  double eccentricity = 0.0;
  double inclination_deg = 98.5;
  double raan_deg = 0.0;
  double arg_perigee_deg = 0.0;
  double true_anomaly_deg = 0.0;
  double epoch_s = 0.0;
};

struct SatelliteState {
  int sat_id = 0;
  double t = 0.0;
  Vec3 position_eci = Vec3::Zero();
  Vec3 velocity_eci = Vec3::Zero();
  Vec3 position_ecef = Vec3::Zero();
};

struct GroundPoint {
  int gp_id = 0;
  int region = 0;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double cell_size_km = 4.0;
};

struct GroundStation {
  std::string name;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double min_elevation_deg = 5.0;
};

/// One connectivity window, fields in contact-plan tuple order.
struct Contact {
  double t_start = 0.0;
  double t_end = 0.0;
  int origin = 0;
  int destination = 0;
  double data_rate_bps = 1000.0;
  double range_light_seconds = 0.0;

  friend bool operator==(const Contact&, const Contact&) = default;
};

struct PropagationOptions {
  bool j2_raan_drift = false;
  double gmst_at_epoch_deg = 0.0;
};

double orbital_period(double semimajor_axis_km);

/// Throws Error(Unsupported) for non-circular elements.
SatelliteState propagate_state(const OrbitalElements& elements, double t,
                               const PropagationOptions& opts = {},
                               int sat_id = 0);

/// Earth rotation angle at sim time t, radians.
double earth_rotation_angle(double t, const PropagationOptions& opts = {});

Vec3 geodetic_to_ecef(double lat_deg, double lon_deg,
                      double radius_km = kEarthRadiusKm);
void ecef_to_geodetic(const Vec3& ecef, double& lat_deg, double& lon_deg);

/// Great-circle distance on the spherical Earth.
double ground_distance_km(double lat1_deg, double lon1_deg, double lat2_deg,
                          double lon2_deg);

/// Angle at the satellite between nadir and the line of sight to `target`.
double off_nadir_angle_deg(const Vec3& sat_ecef, const Vec3& target_ecef);
double off_nadir_angle(const SatelliteState& state, const GroundPoint& gp);

/// Elevation of the satellite above the local horizon at `ground_ecef`.
double elevation_deg(const Vec3& sat_ecef, const Vec3& ground_ecef);

bool in_field_of_regard(const Vec3& sat_ecef, const Vec3& gp_ecef,
                        double for_half_angle_deg);

std::vector<GroundPoint> ground_points_in_for(const SatelliteState& state,
                                              std::span<const GroundPoint> gps,
                                              double for_half_angle_deg = 55.0);

/// Ground range from the subsatellite point at which a target appears at the
/// given off-nadir angle (spherical Earth).
double ground_range_for_off_nadir_km(double altitude_km, double off_nadir_deg);

/// True when the segment a-b stays farther than `min_radius_km` from the
/// Earth's center.
bool line_of_sight(const Vec3& a, const Vec3& b, double min_radius_km);

struct WalkerSpec {
  int planes = 3;
  int sats_per_plane = 8;
  double altitude_km = 710.0;
  double inclination_deg = 98.5;
  bool star = true;        // RAAN spread 180 deg (star) or 360 deg (delta)
  int phasing = 1;         // inter-plane phase offset = phasing*360/(P*S)
};

std::vector<OrbitalElements> walker_constellation(const WalkerSpec& spec);

struct ContactPlanOptions {
  double horizon_s = 21600.0;
  double step_s = 10.0;
  double grazing_margin_km = 100.0;
  double isl_data_rate_bps = 1000.0;
  double ground_data_rate_bps = 1000.0;
  bool include_isl = true;
  bool include_ground = true;
  PropagationOptions propagation;
};

/// Satellites are nodes 0..N-1 in list order, stations N..N+G-1.
/// Returned contacts are sorted by (t_start, origin, destination).
std::vector<Contact> build_contact_plan(
    std::span<const OrbitalElements> constellation,
    std::span<const GroundStation> stations, const ContactPlanOptions& opts);

void write_contact_plan(std::ostream& os, std::span<const Contact> plan);
std::vector<Contact> read_contact_plan(std::istream& is);

struct AccessInterval {
  double start = 0.0;
  double end = 0.0;
};

struct AccessOptions {
  double horizon_s = 21600.0;
  double dt_s = 5.0;
  double for_half_angle_deg = 55.0;
  PropagationOptions propagation;
};

/// Per-satellite, per-step ground-point visibility over the horizon plus the
/// derived per-region access intervals.
class AccessTable {
 public:
  AccessTable() = default;
  AccessTable(std::span<const OrbitalElements> constellation,
              std::span<const GroundPoint> gps, int n_regions,
              const AccessOptions& opts);

  /// Table from precomputed samples: sat_ecef is sat-major (n_sats *
  /// n_steps), visible holds one gp-index list per (sat, step) in the same
  /// order, gp_region maps each gp index to its region.
  static AccessTable from_samples(int n_sats, int n_steps, double dt_s,
                                  std::vector<Vec3> sat_ecef,
                                  std::vector<Vec3> gp_ecef,
                                  std::span<const int> gp_region, int n_regions,
                                  const std::vector<std::vector<int>>& visible);

  int num_sats() const { return n_sats_; }
  int num_steps() const { return n_steps_; }
  int num_regions() const { return n_regions_; }
  double dt() const { return dt_; }
  double time_of(int step) const { return step * dt_; }

  /// Indices into the ground-point list visible at `step`, ascending.
  std::span<const int> visible(int sat, int step) const;
  bool is_visible(int sat, int step, int gp_index) const;
  const Vec3& sat_ecef(int sat, int step) const;
  const Vec3& gp_ecef(int gp_index) const { return gp_ecef_[gp_index]; }
  std::span<const Vec3> gp_ecef_all() const { return gp_ecef_; }

  /// Continuous access windows of `sat` over any ground point of `region`.
  std::span<const AccessInterval> region_access(int sat, int region) const;

 private:
  int n_sats_ = 0;
  int n_steps_ = 0;
  int n_regions_ = 0;
  double dt_ = 5.0;
  std::vector<Vec3> sat_ecef_;                // n_sats * n_steps
  std::vector<std::size_t> offsets_;          // n_sats * n_steps + 1
  std::vector<int> visible_;
  std::vector<Vec3> gp_ecef_;
  std::vector<std::vector<AccessInterval>> region_access_;  // sat*n_regions+r
};

struct Recipient {
  int sat = 0;
  int priority = 1;
  double next_access = 0.0;

  friend bool operator==(const Recipient&, const Recipient&) = default;
};

inline constexpr int kMaxPriority = 15;

/// Recipients of a bundle generated over `region` at `t_gen`, ranked by their
/// next access to the region. `source` is skipped; satellites that never
/// revisit are dropped; at most `max_priority` entries.
std::vector<Recipient> bundle_recipients(int region, double t_gen,
                                         const AccessTable& access, int source,
                                         int max_priority = kMaxPriority);

/// Same ranking from raw per-satellite interval lists (index = sat id).
std::vector<Recipient> bundle_recipients(
    double t_gen, std::span<const std::vector<AccessInterval>> per_sat,
    int source, int max_priority = kMaxPriority);

}  // namespace eosim
