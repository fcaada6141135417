#pragma once

// Brute-force references and small instance builders shared by the unit and
// acceptance suites. Nothing here calls the routines it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "eosim/dtn.hpp"
#include "eosim/orbit.hpp"
#include "eosim/scheduler.hpp"
#include "eosim/value.hpp"

namespace testsupport {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Earliest arrival by enumerating every loop-free chain of contacts.
inline double brute_force_arrival(const std::vector<eosim::Contact>& plan, int src, int dst,
                                  double t0, double bits) {
  if (src == dst) return t0;
  double best = kInf;
  std::vector<char> on_path(64, 0);
  std::function<void(int, double)> walk = [&](int node, double t) {
    if (node == dst) {
      best = std::min(best, t);
      return;
    }
    on_path[node] = 1;
    for (const auto& c : plan) {
      if (c.origin != node || on_path[c.destination]) continue;
      const double start = std::max(t, c.t_start);
      const double tx = bits / c.data_rate_bps;
      if (start + tx > c.t_end) continue;
      walk(c.destination, start + tx + c.range_light_seconds);
    }
    on_path[node] = 0;
  };
  walk(src, t0);
  return best;
}

inline std::vector<eosim::Contact> random_plan(std::mt19937_64& rng, int n_nodes,
                                               int n_contacts) {
  std::uniform_int_distribution<int> node(0, n_nodes - 1);
  std::uniform_real_distribution<double> start(0.0, 100.0), len(1.0, 30.0);
  std::uniform_real_distribution<double> owlt(0.0, 0.05);
  std::uniform_int_distribution<int> rate(0, 2);
  std::vector<eosim::Contact> plan;
  int guard = 0;
  while (static_cast<int>(plan.size()) < n_contacts && guard++ < 10000) {
    eosim::Contact c;
    c.origin = node(rng);
    c.destination = node(rng);
    if (c.origin == c.destination) continue;
    c.t_start = std::round(start(rng) * 10) / 10;
    c.t_end = c.t_start + std::round(len(rng) * 10) / 10;
    c.data_rate_bps = std::array<double, 3>{100.0, 500.0, 1000.0}[rate(rng)];
    c.range_light_seconds = owlt(rng);
    const bool clash = std::any_of(plan.begin(), plan.end(), [&](const eosim::Contact& o) {
      return o.origin == c.origin && o.destination == c.destination &&
             c.t_start < o.t_end && o.t_start < c.t_end;
    });
    if (!clash) plan.push_back(c);
  }
  return plan;
}

// One satellite passing over a handful of ground points, with a randomly
// thinned visibility pattern.
struct ToyInstance {
  eosim::NatureField nature;
  eosim::AccessTable access;
  eosim::ValueParams params;
  eosim::KnowledgeState knowledge;
  eosim::DpOptions opts;
  eosim::ScenarioClock clock;
  std::vector<eosim::Vec3> sat_ecef;
  std::vector<eosim::Vec3> gp_ecef;
  std::vector<std::vector<int>> visible;
  std::vector<int> absval;
};

inline ToyInstance make_toy(std::uint64_t seed, int n_gp = 4, int n_steps = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-6.0, 6.0);
  std::uniform_int_distribution<int> val(1, 256);
  std::bernoulli_distribution vis(0.7);
  const double dt = 5.0;

  ToyInstance ti;
  eosim::NatureRun run;
  run.region_id = "toy";
  run.timestep_s = 3600.0;
  run.n_frames = 1;
  for (int g = 0; g < n_gp; ++g) {
    eosim::GroundPoint p;
    p.gp_id = g;
    p.lat_deg = off(rng);
    p.lon_deg = off(rng);
    run.grid.push_back(p);
    ti.absval.push_back(val(rng));
    run.values.push_back(static_cast<std::uint16_t>(ti.absval.back()));
    ti.gp_ecef.push_back(eosim::geodetic_to_ecef(p.lat_deg, p.lon_deg));
  }
  ti.nature = eosim::NatureField({run});

  for (int s = 0; s < n_steps; ++s) {
    ti.sat_ecef.push_back(
        eosim::geodetic_to_ecef(-4.0 + s * 1.0, 0.5, eosim::kEarthRadiusKm + 700.0));
    std::vector<int> v;
    for (int g = 0; g < n_gp; ++g)
      if (vis(rng)) v.push_back(g);
    ti.visible.push_back(v);
  }
  const std::vector<int> region(n_gp, 0);
  ti.access = eosim::AccessTable::from_samples(1, n_steps, dt, ti.sat_ecef, ti.gp_ecef,
                                               region, 1, ti.visible);

  // A slew model slow enough that large reorientations need several steps.
  ti.opts.slew = {0.0, 0.0, 0.1, 1.0, 0.0};
  ti.opts.k_sigma = 0.0;
  ti.opts.alpha_max_deg = 180.0;
  ti.opts.joint_overlap = false;
  const double windows[] = {0.0, 12.0, 900.0};
  ti.params.zero_window_s = windows[std::uniform_int_distribution<int>(0, 2)(rng)];
  ti.clock = {0.0, n_steps * dt, dt, n_steps * dt};
  return ti;
}

inline double toy_slew_angle(const ToyInstance& ti, int step, int from, int to) {
  const eosim::Vec3 a = ti.gp_ecef[from] - ti.sat_ecef[step];
  const eosim::Vec3 b = ti.gp_ecef[to] - ti.sat_ecef[step];
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / 3.14159265358979323846;
}

inline double toy_slew_time(const ToyInstance& ti, double alpha) {
  const auto& m = ti.opts.slew;
  return m.c3 * alpha * alpha * alpha + m.c2 * alpha * alpha + m.c1 * alpha + m.c0 +
         ti.opts.k_sigma * m.sigma;
}

struct Visit {
  int gp;
  int step;
};

// Objective recomputed from the raw values: zero inside the refresh window of
// any earlier visit, otherwise absval over the number of earlier visits.
inline double toy_value(const ToyInstance& ti, const std::vector<Visit>& path) {
  const double dt = ti.access.dt();
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    int n_before = 0;
    bool blocked = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (path[j].gp != path[i].gp) continue;
      ++n_before;
      if ((path[i].step - path[j].step) * dt < ti.params.zero_window_s) blocked = true;
    }
    if (!blocked) total += ti.absval[path[i].gp] / double(std::max(1, n_before));
  }
  return total;
}

inline bool toy_feasible(const ToyInstance& ti, const std::vector<Visit>& path) {
  const double dt = ti.access.dt();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto& vis = ti.visible[path[i].step];
    if (std::find(vis.begin(), vis.end(), path[i].gp) == vis.end()) return false;
    if (i == 0) continue;
    if (path[i].step <= path[i - 1].step) return false;
    const double alpha = toy_slew_angle(ti, path[i - 1].step, path[i - 1].gp, path[i].gp);
    if (toy_slew_time(ti, alpha) > (path[i].step - path[i - 1].step) * dt + 1e-9)
      return false;
  }
  return true;
}

// Exhaustive optimum over all feasible visit sequences.
inline double toy_optimum(const ToyInstance& ti) {
  const int n_steps = static_cast<int>(ti.visible.size());
  double best = 0.0;
  std::vector<Visit> path;
  std::function<void(int)> extend = [&](int from_step) {
    best = std::max(best, toy_value(ti, path));
    for (int s = from_step; s < n_steps; ++s) {
      for (int g : ti.visible[s]) {
        path.push_back({g, s});
        if (toy_feasible(ti, path)) extend(s + 1);
        path.pop_back();
      }
    }
  };
  extend(0);
  return best;
}

inline std::vector<Visit> visits_of(const eosim::SchedulePath& p) {
  std::vector<Visit> v;
  for (const auto& n : p.nodes) v.push_back({n.gp, n.step});
  return v;
}

// Slew re-check from raw geometry: visibility, ordering and slew time against
// the step gap, starting from an optional held pointing.
inline bool path_feasible(const eosim::SchedulePath& p, const eosim::AccessTable& access,
                          const eosim::SlewModel& m, double k_sigma,
                          std::optional<eosim::Anchor> anchor = {}) {
  int prev_gp = anchor ? anchor->gp : -1;
  int prev_step = anchor ? anchor->step : -1;
  for (const auto& n : p.nodes) {
    const auto vis = access.visible(p.sat, n.step);
    if (std::find(vis.begin(), vis.end(), n.gp) == vis.end()) return false;
    if (prev_gp >= 0) {
      if (n.step <= prev_step) return false;
      const eosim::Vec3 sat = access.sat_ecef(p.sat, prev_step);
      const eosim::Vec3 a = access.gp_ecef(prev_gp) - sat;
      const eosim::Vec3 b = access.gp_ecef(n.gp) - sat;
      const double alpha =
          std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)) * 180.0 /
          3.14159265358979323846;
      const double need = m.c3 * alpha * alpha * alpha + m.c2 * alpha * alpha +
                          m.c1 * alpha + m.c0 + k_sigma * m.sigma;
      if (need > (n.step - prev_step) * access.dt() + 1e-9) return false;
    }
    prev_gp = n.gp;
    prev_step = n.step;
  }
  return true;
}

}  // namespace testsupport
