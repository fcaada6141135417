#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>

#include "eosim/cosim.hpp"
#include "eosim/error.hpp"

namespace eosim {

namespace {

using WallClock = std::chrono::steady_clock;

double seconds_since(WallClock::time_point t0) {
  return std::chrono::duration<double>(WallClock::now() - t0).count();
}

DpOptions dp_options(const ScenarioConfig& c, bool joint) {
  DpOptions o;
  o.slew = c.slew;
  o.k_sigma = c.k_sigma;
  o.alpha_max_deg = c.resolved_alpha_max_deg();
  o.joint_overlap = joint;
  o.max_overlap_set = c.max_overlap_set;
  return o;
}

ScenarioClock make_clock(const ScenarioConfig& c, double t_plan, double window_s) {
  ScenarioClock clk;
  clk.t_plan = t_plan;
  clk.dt_step_s = c.dt_step_s;
  clk.reschedule_period_s = c.reschedule_period_s;
  clk.planning_horizon_s =
      std::max(1.0, std::ceil(window_s / c.dt_step_s - 1e-9)) * c.dt_step_s;
  return clk;
}

// Runs one scheduler call and books its cost.
SchedulePath timed_plan(const DpProblem& pb, const DpOptions& opts,
                        RunResult& res) {
  const auto t0 = WallClock::now();
  const SchedulePath path = dp_schedule(pb, opts, &res.metrics.dp);
  const double dt = seconds_since(t0);
  ++res.metrics.scheduler_calls;
  res.timing.scheduler_s += dt;
  res.timing.scheduler_s_per_sat[pb.sat] += dt;
  res.timing.max_call_s = std::max(res.timing.max_call_s, dt);
  return path;
}

void init_result(const Scenario& sc, RunMode mode, RunResult& res) {
  res.metrics.mode = mode;
  res.metrics.seed = sc.config.seed;
  res.metrics.scenario_fingerprint = sc.fingerprint;
  res.metrics.n_gp_total = static_cast<std::size_t>(sc.nature.num_gp());
  res.timing.scheduler_s_per_sat.assign(sc.num_sats(), 0.0);
  res.schedules.resize(sc.num_sats());
  for (int s = 0; s < sc.num_sats(); ++s) res.schedules[s].sat = s;
}

// Scores the executed schedules and fills the value and coverage metrics.
void finalize(const Scenario& sc, RunResult& res) {
  auto& obs = res.observations;
  obs.clear();
  for (const auto& path : res.schedules) {
    for (const auto& n : path.nodes)
      obs.push_back({path.sat, n.gp, n.t, n.value, 0.0, n.slew_angle_deg, n.slew_time_s});
  }
  score_observations(sc, obs);
  auto& m = res.metrics;
  double diff = 0.0;
  std::vector<char> seen(sc.nature.num_gp(), 0);
  for (const auto& o : obs) {
    m.cumulative_recorded_value += o.recorded_value;
    m.cumulative_assumed_value += o.assumed_value;
    diff += std::abs(o.assumed_value - o.recorded_value);
    seen[o.gp] = 1;
  }
  m.n_observations = obs.size();
  m.n_gp_observed = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
  m.pct_gp_observed =
      m.n_gp_total ? 100.0 * static_cast<double>(m.n_gp_observed) / m.n_gp_total : 0.0;
  m.divergence_pct =
      m.cumulative_recorded_value > 0.0 ? 100.0 * diff / m.cumulative_recorded_value : 0.0;
  for (auto& path : res.schedules) {
    path.cumulative_value = 0.0;
    for (const auto& n : path.nodes) path.cumulative_value += n.value;
  }
}

void fill_bundle_stats(const dtn::Simulator& sim, std::size_t generated,
                       RunResult& res) {
  auto& b = res.metrics.bundles;
  b.generated = generated;
  res.deliveries = sim.records();
  std::sort(res.deliveries.begin(), res.deliveries.end(),
            [](const dtn::DeliveryRecord& x, const dtn::DeliveryRecord& y) {
              return x.bundle_id < y.bundle_id;
            });
  for (const auto& r : res.deliveries) {
    switch (r.outcome) {
      case dtn::Outcome::Delivered: ++b.delivered; break;
      case dtn::Outcome::DroppedTtl: ++b.dropped_ttl; break;
      case dtn::Outcome::Unroutable: ++b.unroutable; break;
    }
  }
  b.discarded_copies = sim.discarded_copies();
  b.latency = dtn::latency_stats(res.deliveries);
}

}  // namespace

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Decentralized: return "decentralized";
    case RunMode::Centralized: return "centralized";
    case RunMode::NonAgile: return "nonagile";
  }
  return "unknown";
}

RunMode parse_run_mode(const std::string& name) {
  if (name == "decentralized") return RunMode::Decentralized;
  if (name == "centralized") return RunMode::Centralized;
  if (name == "nonagile") return RunMode::NonAgile;
  throw Error(ErrorKind::InvalidArgument,
              "unknown mode '" + name + "' (decentralized, centralized, nonagile)");
}

void score_observations(const Scenario& sc,
                        std::vector<ExecutedObservation>& obs) {
  std::sort(obs.begin(), obs.end(),
            [](const ExecutedObservation& a, const ExecutedObservation& b) {
              if (a.t != b.t) return a.t < b.t;
              if (a.sat != b.sat) return a.sat < b.sat;
              return a.gp < b.gp;
            });
  const ValueModel truth(sc.nature, sc.config.value);
  KnowledgeState omniscient;  // noiseless, sees the current frame
  ObservationLog log;
  for (auto& o : obs) {
    o.recorded_value = truth.value(o.gp, o.t, log, omniscient);
    log.add(o.gp, o.sat, o.t);
  }
}

// ---------------------------------------------------------------------------
// Onboard scheduling with knowledge shared over inter-satellite links.

RunResult run_decentralized(const Scenario& sc) {
  const auto t_start = WallClock::now();
  const auto& c = sc.config;
  const int n_sats = sc.num_sats();
  const int n_regions = sc.nature.num_regions();
  RunResult res;
  init_result(sc, RunMode::Decentralized, res);

  const ValueModel vm(sc.nature, c.value);
  const DpOptions opts = dp_options(c, c.joint_overlap);

  std::vector<KnowledgeState> know(n_sats);
  for (int s = 0; s < n_sats; ++s) {
    know[s].owner = s;
    know[s].sigma = assign_satellite_noise(s, c.seed);
    know[s].seed = c.seed;
    know[s].region_model_time.assign(n_regions, 0.0);
  }

  std::vector<Contact> isl;
  if (c.isl_enabled)
    for (const auto& ct : sc.contact_plan)
      if (ct.origin < n_sats && ct.destination < n_sats) isl.push_back(ct);
  dtn::Simulator sim{dtn::ContactGraph(std::move(isl))};

  struct Batch {
    int sat;
    int region;
    double t_created;
    std::vector<Observation> obs;
  };
  std::vector<Batch> batches;
  std::uint64_t next_bundle = 0;
  std::size_t ingested = 0;
  std::vector<std::optional<Anchor>> anchor(n_sats);

  const double horizon = c.horizon_s;
  const double period = c.reschedule_period_s;
  const int n_periods = static_cast<int>(std::ceil(horizon / period - 1e-9));

  for (int k = 0; k < n_periods; ++k) {
    const double t_plan = k * period;
    const double t_next = std::min(horizon, t_plan + period);

    sim.run_until(t_plan);
    const auto& records = sim.records();
    for (; ingested < records.size(); ++ingested) {
      const auto& r = records[ingested];
      if (r.outcome != dtn::Outcome::Delivered) continue;
      const Batch& b = batches[r.payload_ref];
      auto& kd = know[r.destination];
      double t_src = 0.0;
      for (const auto& o : b.obs) {
        if (!kd.log.contains(o.gp, o.sat, o.t)) kd.log.add(o);
        t_src = std::max(t_src, o.t);
      }
      kd.ingest_model_params(b.region, t_src);
    }

    std::vector<Batch> fresh;
    for (int s = 0; s < n_sats; ++s) {
      DpProblem pb;
      pb.sat = s;
      pb.clock = make_clock(c, t_plan, std::min(c.planning_horizon_s, horizon - t_plan));
      pb.access = &sc.access;
      pb.values = &vm;
      pb.knowledge = &know[s];
      pb.anchor = anchor[s];
      const SchedulePath path = timed_plan(pb, opts, res);

      std::map<std::pair<int, long long>, std::size_t> open;  // (region, window)
      for (const auto& n : path.nodes) {
        if (n.t >= t_next - 1e-9) break;
        const int region = sc.nature.region_of(n.gp);
        res.schedules[s].nodes.push_back(n);
        know[s].log.add(n.gp, s, n.t);
        know[s].ingest_model_params(region, n.t);
        anchor[s] = Anchor{n.gp, n.step};
        const auto w = static_cast<long long>(std::floor(n.t / c.batch_window_s));
        auto [it, inserted] = open.try_emplace({region, w}, fresh.size());
        if (inserted)
          fresh.push_back({s, region, static_cast<double>(w + 1) * c.batch_window_s, {}});
        fresh[it->second].obs.push_back({n.gp, n.t, s});
      }
    }

    std::stable_sort(fresh.begin(), fresh.end(), [](const Batch& a, const Batch& b) {
      if (a.t_created != b.t_created) return a.t_created < b.t_created;
      if (a.sat != b.sat) return a.sat < b.sat;
      return a.region < b.region;
    });
    for (auto& b : fresh) {
      const auto batch_id = static_cast<std::uint64_t>(batches.size());
      const auto recipients =
          bundle_recipients(b.region, b.t_created, sc.access, b.sat, c.max_priority);
      for (const auto& r : recipients) {
        dtn::Bundle bundle = dtn::Bundle::make(next_bundle++, b.sat, r.sat, r.priority,
                                               b.t_created, c.bundle_size_bits);
        bundle.payload_ref = batch_id;
        sim.inject(bundle);
      }
      batches.push_back(std::move(b));
    }
  }
  sim.finish();
  fill_bundle_stats(sim, next_bundle, res);
  finalize(sc, res);
  res.timing.total_s = seconds_since(t_start);
  return res;
}

// ---------------------------------------------------------------------------
// Ground scheduling, synchronized only while a satellite sees a station.

RunResult run_centralized(const Scenario& sc) {
  const auto t_start = WallClock::now();
  const auto& c = sc.config;
  const int n_sats = sc.num_sats();
  const int n_regions = sc.nature.num_regions();
  RunResult res;
  init_result(sc, RunMode::Centralized, res);

  const ValueModel vm(sc.nature, c.value);
  const DpOptions opts = dp_options(c, false);
  const double horizon = c.horizon_s;
  const double period = c.reschedule_period_s;

  // Sync instants: contact start, then every reschedule period in contact.
  std::vector<std::pair<double, int>> syncs;
  if (c.ground_contact == GroundContactModel::Continuous) {
    for (int s = 0; s < n_sats; ++s)
      for (double t = period; t < horizon - 1e-9; t += period) syncs.push_back({t, s});
  } else {
    for (const auto& ct : sc.contact_plan) {
      if (ct.origin >= n_sats || ct.destination < n_sats) continue;
      for (double t = ct.t_start; t < ct.t_end && t < horizon; t += period)
        if (t > 0.0) syncs.push_back({t, ct.origin});
    }
  }
  std::sort(syncs.begin(), syncs.end());
  syncs.erase(std::unique(syncs.begin(), syncs.end()), syncs.end());

  KnowledgeState ground;
  ground.owner = n_sats;
  ground.sigma = assign_satellite_noise(n_sats, c.seed);
  ground.seed = c.seed;
  ground.region_model_time.assign(n_regions, 0.0);

  std::vector<SchedulePath> plans(n_sats);
  auto next_sync = [&](int s, double t) {
    for (const auto& [ts, sat] : syncs)
      if (sat == s && ts > t) return ts;
    return horizon;
  };
  auto plan_for = [&](int s, double t_c) {
    KnowledgeState k = ground;
    k.owner = s;
    for (int o = 0; o < n_sats; ++o) {
      for (const auto& n : res.schedules[o].nodes) k.log.add(n.gp, o, n.t);
      if (o != s)
        for (const auto& n : plans[o].nodes) k.log.add(n.gp, o, n.t);
    }
    DpProblem pb;
    pb.sat = s;
    const double until =
        std::min(horizon, std::max(t_c + c.planning_horizon_s, next_sync(s, t_c)));
    pb.clock = make_clock(c, t_c, until - t_c);
    pb.access = &sc.access;
    pb.values = &vm;
    pb.knowledge = &k;
    const auto& done = res.schedules[s].nodes;
    if (!done.empty()) pb.anchor = Anchor{done.back().gp, done.back().step};
    plans[s] = timed_plan(pb, opts, res);
  };
  auto commit_before = [&](int s, double t) {
    for (const auto& n : plans[s].nodes)
      if (n.t < t - 1e-9) res.schedules[s].nodes.push_back(n);
    plans[s].nodes.clear();
  };

  for (int s = 0; s < n_sats; ++s) plan_for(s, 0.0);
  for (const auto& [t_c, s] : syncs) {
    commit_before(s, t_c);
    for (const auto& n : res.schedules[s].nodes)
      ground.ingest_model_params(sc.nature.region_of(n.gp), n.t);
    plan_for(s, t_c);
  }
  for (int s = 0; s < n_sats; ++s) commit_before(s, horizon);

  finalize(sc, res);
  res.timing.total_s = seconds_since(t_start);
  return res;
}

// ---------------------------------------------------------------------------
// Fixed nadir pointing: every cell swept by the footprint is observed.

RunResult run_nonagile(const Scenario& sc) {
  const auto t_start = WallClock::now();
  const auto& c = sc.config;
  const int n_sats = sc.num_sats();
  const int n_regions = sc.nature.num_regions();
  RunResult res;
  init_result(sc, RunMode::NonAgile, res);

  const auto gps = sc.nature.ground_points();
  std::vector<Vec3> unit(gps.size());
  for (std::size_t i = 0; i < gps.size(); ++i)
    unit[i] = geodetic_to_ecef(gps[i].lat_deg, gps[i].lon_deg, 1.0);
  std::vector<Vec3> center(n_regions, Vec3::Zero());
  std::vector<double> cap(n_regions, 0.0);
  for (int r = 0; r < n_regions; ++r) {
    const int b = sc.nature.first_gp(r), e = b + sc.nature.run(r).n_gp();
    for (int g = b; g < e; ++g) center[r] += unit[g];
    center[r].normalize();
    for (int g = b; g < e; ++g)
      cap[r] = std::max(cap[r], std::acos(std::clamp(center[r].dot(unit[g]), -1.0, 1.0)));
  }

  const double radius = c.footprint_km / 2.0 / kEarthRadiusKm;
  const auto n_samples =
      static_cast<long long>(std::ceil(c.horizon_s / c.nonagile_substep_s - 1e-9));
  for (int s = 0; s < n_sats; ++s) {
    std::vector<long long> last(gps.size(), -2);
    for (long long i = 0; i < n_samples; ++i) {
      const double t = static_cast<double>(i) * c.nonagile_substep_s;
      const Vec3 nadir =
          propagate_state(sc.constellation[s], t, c.propagation, s).position_ecef.normalized();
      for (int r = 0; r < n_regions; ++r) {
        const double cell = sc.nature.run(r).cell_size_km / kEarthRadiusKm;
        const double reach = std::max(radius, cell * std::sqrt(0.5));
        if (std::acos(std::clamp(nadir.dot(center[r]), -1.0, 1.0)) > cap[r] + reach)
          continue;
        const int b = sc.nature.first_gp(r), e = b + sc.nature.run(r).n_gp();
        int nearest = -1;
        double nearest_ang = 1e9;
        std::vector<int> hit;
        for (int g = b; g < e; ++g) {
          const double ang = std::acos(std::clamp(nadir.dot(unit[g]), -1.0, 1.0));
          if (ang <= radius) hit.push_back(g);
          if (ang < nearest_ang) {
            nearest_ang = ang;
            nearest = g;
          }
        }
        // The cell holding the subsatellite point, if inside the grid.
        if (nearest >= 0 && nearest_ang <= cell * std::sqrt(0.5) &&
            std::find(hit.begin(), hit.end(), nearest) == hit.end())
          hit.push_back(nearest);
        std::sort(hit.begin(), hit.end());
        for (int g : hit) {
          if (last[g] != i - 1) {
            PathNode n;
            n.gp = g;
            n.t = t;
            n.step = static_cast<int>(std::floor(t / c.dt_step_s));
            res.schedules[s].nodes.push_back(n);
          }
          last[g] = i;
        }
      }
    }
  }
  finalize(sc, res);
  // No planner: the assumed value is what was recorded.
  for (auto& o : res.observations) o.assumed_value = o.recorded_value;
  res.metrics.cumulative_assumed_value = res.metrics.cumulative_recorded_value;
  res.metrics.divergence_pct = 0.0;
  res.timing.total_s = seconds_since(t_start);
  return res;
}

RunResult run_mode(const Scenario& scenario, RunMode mode) {
  switch (mode) {
    case RunMode::Decentralized: return run_decentralized(scenario);
    case RunMode::Centralized: return run_centralized(scenario);
    case RunMode::NonAgile: return run_nonagile(scenario);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown run mode");
}

}  // namespace eosim
