#pragma once

// Co-simulation of the three operating modes and their metrics.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eosim/dtn.hpp"
#include "eosim/scenario.hpp"
#include "eosim/scheduler.hpp"

namespace eosim {

enum class RunMode { Decentralized, Centralized, NonAgile };

const char* to_string(RunMode mode);
/// Throws Error(InvalidArgument) for unknown names.
RunMode parse_run_mode(const std::string& name);

struct BundleStats {
  std::size_t generated = 0;
  std::size_t delivered = 0;
  std::size_t dropped_ttl = 0;
  std::size_t unroutable = 0;
  std::size_t discarded_copies = 0;
  std::vector<dtn::PriorityStats> latency;
};

struct RunMetrics {
  RunMode mode = RunMode::Decentralized;
  std::uint64_t seed = 0;
  std::string scenario_fingerprint;
  double cumulative_recorded_value = 0.0;
  double cumulative_assumed_value = 0.0;
  double pct_gp_observed = 0.0;
  double divergence_pct = 0.0;  // sum |assumed - recorded| / sum recorded
  std::size_t n_observations = 0;
  std::size_t n_gp_observed = 0;
  std::size_t n_gp_total = 0;
  BundleStats bundles;
  std::size_t scheduler_calls = 0;
  DpCounters dp;
};

/// Wall-clock measurements, kept apart from the deterministic metrics.
struct RunTiming {
  double total_s = 0.0;
  double scheduler_s = 0.0;
  std::vector<double> scheduler_s_per_sat;
  double max_call_s = 0.0;
};

struct ExecutedObservation {
  int sat = 0;
  int gp = 0;
  double t = 0.0;
  double assumed_value = 0.0;
  double recorded_value = 0.0;
  double slew_angle_deg = 0.0;
  double slew_time_s = 0.0;
};

struct RunResult {
  RunMetrics metrics;
  RunTiming timing;
  std::vector<ExecutedObservation> observations;  // ordered by (t, sat, gp)
  std::vector<SchedulePath> schedules;            // executed, one per satellite
  std::vector<dtn::DeliveryRecord> deliveries;
};

RunResult run_decentralized(const Scenario& scenario);
RunResult run_centralized(const Scenario& scenario);
RunResult run_nonagile(const Scenario& scenario);
RunResult run_mode(const Scenario& scenario, RunMode mode);

/// Scores executed observations against the nature run: absval at the
/// observation time over the number of earlier observations by anyone,
/// zero inside the refresh window of an earlier observation.
void score_observations(const Scenario& scenario,
                        std::vector<ExecutedObservation>& observations);

std::string metrics_to_json(const RunMetrics& metrics);
RunMetrics metrics_from_json(const std::string& text);
std::string timing_to_json(const RunTiming& timing);

/// Ratio and difference report of two runs of the same scenario and seed.
/// Throws Error(Mismatch) otherwise.
std::string compare_metrics(const RunMetrics& a, const RunMetrics& b);

/// Columns: sat_id, t, gp_id, slew_angle_deg, slew_time_s.
void write_schedule_csv(std::ostream& os, const std::vector<ExecutedObservation>& obs);

}  // namespace eosim
