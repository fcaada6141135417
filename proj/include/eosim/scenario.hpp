#pragma once

// Scenario configuration (structured text with unit-suffixed keys) and the
// assembled, immutable simulation inputs derived from it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eosim/acs.hpp"
#include "eosim/orbit.hpp"
#include "eosim/value.hpp"

namespace eosim {

struct NatureSource {
  bool from_file = false;
  std::string path;                  // file source
  std::optional<std::uint64_t> seed;  // synthetic; derived from the master seed if unset
  int n_blobs = 16;
  double timestep_s = 900.0;
  double transiency_s = 900.0;
  bool static_field = false;
};

struct RegionConfig {
  std::string id;
  double center_lat_deg = 0.0;
  double center_lon_deg = 0.0;
  double extent_km = 80.0;
  double cell_size_km = 4.0;
  NatureSource nature;
};

enum class GroundContactModel { Stations, Continuous };

struct ScenarioConfig {
  std::uint64_t seed = 1;

  WalkerSpec constellation;
  PropagationOptions propagation;

  double for_half_angle_deg = 55.0;
  double footprint_km = 8.0;

  std::vector<RegionConfig> regions;

  double horizon_s = 21600.0;
  double dt_step_s = 5.0;
  double reschedule_period_s = 600.0;
  double planning_horizon_s = 21600.0;

  bool isl_enabled = true;
  double isl_data_rate_bps = 1000.0;
  double ground_data_rate_bps = 1000.0;
  double contact_step_s = 10.0;
  double grazing_margin_km = 100.0;
  double bundle_payload_bits = 1645.0;
  double bundle_size_bits = 2000.0;
  double batch_window_s = 60.0;
  int max_priority = 15;

  GroundContactModel ground_contact = GroundContactModel::Stations;
  std::vector<GroundStation> stations;

  SlewModel slew;
  double k_sigma = 2.0;
  std::optional<double> alpha_max_deg;  // unset: twice the FOR half-angle

  ValueParams value;

  bool joint_overlap = true;
  int max_overlap_set = 2;

  double nonagile_substep_s = 0.5;

  double resolved_alpha_max_deg() const {
    return alpha_max_deg.value_or(2.0 * for_half_angle_deg);
  }
};

/// Reference scenario: 3x8 Walker star, five city regions, two polar
/// stations.
ScenarioConfig default_config();

/// Parses a JSON document; absent keys keep their defaults. Throws
/// Error(Config) naming the offending field.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
/// Fully resolved configuration; parsing it reproduces the same scenario.
std::string config_to_json(const ScenarioConfig& config);
void validate_config(const ScenarioConfig& config);

/// Per-region nature seed when the region does not pin one.
std::uint64_t derived_nature_seed(std::uint64_t master_seed, int region_index);

struct Scenario {
  ScenarioConfig config;
  std::vector<OrbitalElements> constellation;
  NatureField nature;
  AccessTable access;
  std::vector<Contact> contact_plan;  // satellites 0..N-1, stations N..
  std::string fingerprint;            // hash of the resolved configuration

  int num_sats() const { return static_cast<int>(constellation.size()); }
};

/// Validates the configuration, loads or synthesizes nature runs and builds
/// access and contact geometry.
Scenario build_scenario(const ScenarioConfig& config);

}  // namespace eosim
