#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "eosim/error.hpp"
#include "eosim/orbit.hpp"

using namespace eosim;

namespace {
const double kA = kEarthRadiusKm + 710.0;
}

TEST_CASE("circular two-body motion") {
  const double period = orbital_period(kA);
  CHECK(period == doctest::Approx(2 * kPi * std::sqrt(kA * kA * kA / kMuEarth)));
  CHECK(period == doctest::Approx(5937.6).epsilon(1e-3));

  OrbitalElements el;
  el.semimajor_axis_km = kA;
  for (double t : {0.0, 123.4, 2000.0, period}) {
    const auto s = propagate_state(el, t);
    CHECK(s.position_eci.norm() == doctest::Approx(kA));
    CHECK(s.velocity_eci.norm() == doctest::Approx(std::sqrt(kMuEarth / kA)));
    CHECK(std::abs(s.position_eci.dot(s.velocity_eci)) < 1e-6);
  }
  const auto s0 = propagate_state(el, 0.0);
  const auto s1 = propagate_state(el, period);
  CHECK((s0.position_eci - s1.position_eci).norm() < 1e-6);
  CHECK(s0.position_eci.x() == doctest::Approx(kA));
  CHECK((s0.position_ecef - s0.position_eci).norm() < 1e-9);

  el.eccentricity = 0.01;
  CHECK_THROWS_AS(propagate_state(el, 0.0), Error);
}

TEST_CASE("earth rotation and frames") {
  CHECK(earth_rotation_angle(0.0) == 0.0);
  CHECK(earth_rotation_angle(86164.0905) == doctest::Approx(2 * kPi).epsilon(1e-6));
  PropagationOptions o;
  o.gmst_at_epoch_deg = 90.0;
  CHECK(earth_rotation_angle(0.0, o) == doctest::Approx(kPi / 2));

  // A point fixed in ECI drifts west in ECEF.
  OrbitalElements el;
  el.semimajor_axis_km = kA;
  el.inclination_deg = 0.0;
  const auto s = propagate_state(el, 600.0);
  double lat, lon;
  ecef_to_geodetic(s.position_ecef, lat, lon);
  CHECK(lat == doctest::Approx(0.0).epsilon(1e-9));
  const double inertial = rad2deg(600.0 * std::sqrt(kMuEarth / kA) / kA);
  CHECK(lon == doctest::Approx(inertial - rad2deg(600.0 * kEarthRate)));
}

TEST_CASE("geodetic conversions and distances") {
  for (double lat : {-80.0, -23.0, 0.0, 45.5, 89.0})
    for (double lon : {-179.0, -10.0, 0.0, 100.0}) {
      double la, lo;
      ecef_to_geodetic(geodetic_to_ecef(lat, lon), la, lo);
      CHECK(la == doctest::Approx(lat));
      CHECK(lo == doctest::Approx(lon));
    }
  CHECK(ground_distance_km(0, 0, 1, 0) == doctest::Approx(kEarthRadiusKm * kPi / 180));
  CHECK(ground_distance_km(10, 20, 10, 20) == 0.0);
  CHECK(ground_distance_km(0, 0, 0, 180) == doctest::Approx(kEarthRadiusKm * kPi));
}

TEST_CASE("field of regard geometry") {
  const Vec3 sat = geodetic_to_ecef(10.0, 20.0, kA);
  CHECK(off_nadir_angle_deg(sat, geodetic_to_ecef(10.0, 20.0)) ==
        doctest::Approx(0.0).epsilon(1e-9));
  const double r55 = ground_range_for_off_nadir_km(710.0, 55.0);
  CHECK(r55 == doctest::Approx(1174.0).epsilon(1e-3));
  // The boundary point lies at exactly the FOR half-angle.
  const double dlat = rad2deg(r55 / kEarthRadiusKm);
  const Vec3 edge = geodetic_to_ecef(10.0 + dlat, 20.0);
  CHECK(off_nadir_angle_deg(sat, edge) == doctest::Approx(55.0).epsilon(1e-6));
  CHECK(in_field_of_regard(sat, geodetic_to_ecef(10.0 + 0.99 * dlat, 20.0), 55.0));
  CHECK_FALSE(in_field_of_regard(sat, geodetic_to_ecef(10.0 + 1.01 * dlat, 20.0), 55.0));
  CHECK(elevation_deg(sat, geodetic_to_ecef(10.0, 20.0)) == doctest::Approx(90.0));

  SatelliteState st;
  st.position_ecef = sat;
  std::vector<GroundPoint> gps = {{0, 0, 10.0, 20.0}, {1, 0, 10.0 + 2 * dlat, 20.0}};
  const auto in = ground_points_in_for(st, gps);
  REQUIRE(in.size() == 1);
  CHECK(in[0].gp_id == 0);
}

TEST_CASE("line of sight above the grazing altitude") {
  const double r = kEarthRadiusKm + 100.0;
  const Vec3 a(kA, 0, 0);
  CHECK(line_of_sight(a, Vec3(kA * std::cos(0.5), kA * std::sin(0.5), 0), r));
  CHECK_FALSE(line_of_sight(a, Vec3(0, kA, 0), r));
  CHECK_FALSE(line_of_sight(a, Vec3(-kA, 0, 0), r));
  const double half = std::acos(r / kA);
  const Vec3 b(kA * std::cos(2 * half * 0.999), kA * std::sin(2 * half * 0.999), 0);
  const Vec3 c(kA * std::cos(2 * half * 1.001), kA * std::sin(2 * half * 1.001), 0);
  CHECK(line_of_sight(a, b, r));
  CHECK_FALSE(line_of_sight(a, c, r));
}

TEST_CASE("walker star layout") {
  const auto els = walker_constellation({});
  REQUIRE(els.size() == 24);
  CHECK(els[0].raan_deg == 0.0);
  CHECK(els[8].raan_deg == doctest::Approx(60.0));
  CHECK(els[16].raan_deg == doctest::Approx(120.0));
  CHECK(els[1].true_anomaly_deg == doctest::Approx(45.0));
  CHECK(els[8].true_anomaly_deg == doctest::Approx(15.0));
  for (const auto& e : els) {
    CHECK(e.semimajor_axis_km == doctest::Approx(kA));
    CHECK(e.inclination_deg == 98.5);
  }
  WalkerSpec delta;
  delta.star = false;
  CHECK(walker_constellation(delta)[8].raan_deg == doctest::Approx(120.0));
  delta.planes = 0;
  CHECK_THROWS_AS(walker_constellation(delta), Error);
}

TEST_CASE("contact plan structure") {
  const auto els = walker_constellation({});
  std::vector<GroundStation> st = {{"north", 78.23, 15.39, 5.0}};
  ContactPlanOptions o;
  o.horizon_s = 3600.0;
  const auto plan = build_contact_plan(els, st, o);
  REQUIRE(!plan.empty());
  const double max_isl = 2 * std::sqrt(kA * kA - std::pow(kEarthRadiusKm + 100.0, 2));
  bool ground = false;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& c = plan[i];
    CHECK(c.t_start < c.t_end);
    CHECK(c.t_end <= o.horizon_s);
    CHECK(c.origin != c.destination);
    if (i) {
      const auto& p = plan[i - 1];
      CHECK(std::tie(p.t_start, p.origin, p.destination) <=
            std::tie(c.t_start, c.origin, c.destination));
    }
    if (c.origin < 24 && c.destination < 24)
      CHECK(c.range_light_seconds * kLightSpeedKmS <= max_isl + 1e-3);
    else
      ground = true;
    // Links are bidirectional.
    const bool mirrored = std::any_of(plan.begin(), plan.end(), [&](const Contact& m) {
      return m.origin == c.destination && m.destination == c.origin &&
             m.t_start == c.t_start && m.t_end == c.t_end;
    });
    CHECK(mirrored);
  }
  CHECK(ground);

  std::stringstream ss;
  write_contact_plan(ss, plan);
  const auto back = read_contact_plan(ss);
  REQUIRE(back.size() == plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    CHECK(back[i].origin == plan[i].origin);
    CHECK(back[i].t_start == doctest::Approx(plan[i].t_start));
    CHECK(back[i].range_light_seconds == doctest::Approx(plan[i].range_light_seconds));
  }

  std::istringstream bad("0,10,0,1,1000\n");
  CHECK_THROWS_AS(read_contact_plan(bad), Error);
}

TEST_CASE("access table matches the field-of-regard test") {
  const auto els = walker_constellation({});
  std::vector<GroundPoint> gps;
  for (int i = 0; i < 10; ++i) gps.push_back({i, i % 2, -40.0 + 9.0 * i, 10.0 * i});
  AccessOptions o;
  o.horizon_s = 3000.0;
  o.dt_s = 10.0;
  const AccessTable t(els, gps, 2, o);
  CHECK(t.num_steps() == 300);
  int hits = 0;
  for (int s = 0; s < t.num_sats(); s += 5)
    for (int k = 0; k < t.num_steps(); k += 7) {
      const Vec3 pos = propagate_state(els[s], t.time_of(k)).position_ecef;
      CHECK((pos - t.sat_ecef(s, k)).norm() < 1e-6);
      for (int g = 0; g < 10; ++g) {
        const bool in = in_field_of_regard(pos, geodetic_to_ecef(gps[g].lat_deg, gps[g].lon_deg), 55.0);
        CHECK(in == t.is_visible(s, k, g));
        hits += in;
      }
    }
  CHECK(hits > 0);

  for (int s = 0; s < t.num_sats(); ++s)
    for (int r = 0; r < 2; ++r)
      for (const auto& iv : t.region_access(s, r)) {
        CHECK(iv.start < iv.end);
        const int k = static_cast<int>(std::lround(iv.start / o.dt_s));
        bool any = false;
        for (int g : t.visible(s, k)) any = any || gps[g].region == r;
        CHECK(any);
      }
}

TEST_CASE("from_samples validates its input") {
  std::vector<Vec3> sat(2, Vec3(kA, 0, 0)), gp(1, Vec3(kEarthRadiusKm, 0, 0));
  const std::vector<int> region{0};
  CHECK_NOTHROW(AccessTable::from_samples(1, 2, 5.0, sat, gp, region, 1, {{0}, {}}));
  CHECK_THROWS_AS(AccessTable::from_samples(1, 2, 5.0, sat, gp, region, 1, {{1}, {}}), Error);
  CHECK_THROWS_AS(AccessTable::from_samples(1, 3, 5.0, sat, gp, region, 1, {{0}, {}}), Error);
}

TEST_CASE("bundle recipients ranked by next access") {
  std::vector<std::vector<AccessInterval>> per_sat = {
      {{100, 200}},            // source
      {{50, 80}, {500, 600}},  // next at 500
      {{120, 300}},            // already inside: now
      {},                      // never
      {{400, 450}},
  };
  const auto r = bundle_recipients(150.0, per_sat, 0);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == Recipient{2, 1, 150.0});
  CHECK(r[1] == Recipient{4, 2, 400.0});
  CHECK(r[2] == Recipient{1, 3, 500.0});
  CHECK(bundle_recipients(150.0, per_sat, 0, 2).size() == 2);
}
