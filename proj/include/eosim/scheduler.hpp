#pragma once

// Dynamic-programming observation scheduler over the (ground point, time
// step) lattice with slew-band predecessor search and joint evaluation of
// overlapping fields of regard.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eosim/acs.hpp"
#include "eosim/orbit.hpp"
#include "eosim/value.hpp"

namespace eosim {

struct PathNode {
  int gp = 0;
  double t = 0.0;
  int step = 0;
  double value = 0.0;           // value the planner assigned when committing
  double slew_angle_deg = 0.0;  // from the previous pointing, 0 if none
  double slew_time_s = 0.0;

  friend bool operator==(const PathNode&, const PathNode&) = default;
};

struct SchedulePath {
  int sat = 0;
  std::vector<PathNode> nodes;
  double cumulative_value = 0.0;

  friend bool operator==(const SchedulePath&, const SchedulePath&) = default;
};

struct ScenarioClock {
  double t_plan = 0.0;
  double planning_horizon_s = 21600.0;
  double dt_step_s = 5.0;
  double reschedule_period_s = 600.0;

  int horiz_tsteps() const;
  /// Throws Error(Config) unless dt divides the reschedule period and the
  /// planning horizon is a whole number of steps.
  void validate() const;
};

struct DpOptions {
  SlewModel slew;
  double k_sigma = 2.0;
  double alpha_max_deg = 110.0;
  bool joint_overlap = true;
  int max_overlap_set = 2;     // n(S) cap, the scheduling satellite included
  int stop_after_steps = -1;   // anytime truncation, < 0 sweeps everything
};

/// Pointing the satellite already holds when the plan starts.
struct Anchor {
  int gp = 0;
  int step = 0;
};

struct DpCounters {
  std::uint64_t nodes_expanded = 0;        // (gpNow, tNow) pairs visited
  std::uint64_t band_slots = 0;            // predecessor slots offered
  std::uint64_t candidates_evaluated = 0;  // exact values computed
  std::uint64_t overlap_nodes = 0;
  std::uint64_t overlap_truncated = 0;     // overlap sets above the cap
  std::uint64_t shadow_plans = 0;

  DpCounters& operator+=(const DpCounters& o);
};

struct DpProblem {
  int sat = 0;
  ScenarioClock clock;
  const AccessTable* access = nullptr;
  const ValueModel* values = nullptr;
  const KnowledgeState* knowledge = nullptr;
  /// Further known or planned observations (other satellites' schedules).
  /// Must not repeat entries of the knowledge log.
  const ObservationLog* extra = nullptr;
  std::optional<Anchor> anchor;
};

/// Forward DP sweep from clock.t_plan over the planning horizon. Each
/// lattice node keeps the single path of its first feasible candidate in
/// descending candidate value; the result is the best terminal path.
SchedulePath dp_schedule(const DpProblem& problem, const DpOptions& opts = {},
                         DpCounters* counters = nullptr);

/// Other satellites with `gp` inside their field of regard at `step`.
std::vector<int> sats_with_overlapping_for(const AccessTable& access, int sat,
                                           int gp, int step);

/// Objective of a path: nodes valued in time order against the knowledge
/// log, the others' fragments and the path's own earlier nodes.
double compute_value(const SchedulePath& path, const ValueModel& values,
                     const KnowledgeState& knowledge,
                     std::span<const SchedulePath> others = {});

/// Index of the first node whose slew from its predecessor (or the anchor)
/// does not fit the time gap, recomputed from geometry; nullopt if feasible.
std::optional<std::size_t> first_infeasible(const SchedulePath& path,
                                            const AccessTable& access,
                                            const SlewModel& slew,
                                            double k_sigma,
                                            std::optional<Anchor> anchor = {});

}  // namespace eosim
