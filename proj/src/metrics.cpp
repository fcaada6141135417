#include <ostream>

#include "eosim/cosim.hpp"
#include "eosim/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace eosim {

using json = nlohmann::ordered_json;

namespace {

json latency_json(const std::vector<dtn::PriorityStats>& stats) {
  json arr = json::array();
  for (const auto& s : stats)
    arr.push_back({{"priority", s.priority},
                   {"delivered", s.delivered},
                   {"min_s", s.min},
                   {"q25_s", s.q25},
                   {"median_s", s.median},
                   {"q75_s", s.q75},
                   {"max_s", s.max},
                   {"dropped_ttl", s.dropped_ttl},
                   {"unroutable", s.unroutable}});
  return arr;
}

// Ratio that reads 1 for identical values, including two zeros.
json ratio(double a, double b) {
  if (a == b) return 1.0;
  if (b == 0.0) return nullptr;
  return a / b;
}

std::string dominant(double a, double b, bool higher_is_better) {
  if (a == b) return "tie";
  return (a > b) == higher_is_better ? "A" : "B";
}

}  // namespace

std::string metrics_to_json(const RunMetrics& m) {
  json j;
  j["mode"] = to_string(m.mode);
  j["seed"] = m.seed;
  j["scenario_fingerprint"] = m.scenario_fingerprint;
  j["cumulative_recorded_value"] = m.cumulative_recorded_value;
  j["cumulative_assumed_value"] = m.cumulative_assumed_value;
  j["pct_gp_observed"] = m.pct_gp_observed;
  j["assumed_vs_recorded_divergence_pct"] = m.divergence_pct;
  j["n_observations"] = m.n_observations;
  j["n_gp_observed"] = m.n_gp_observed;
  j["n_gp_total"] = m.n_gp_total;
  j["bundles"] = {{"generated", m.bundles.generated},
                  {"delivered", m.bundles.delivered},
                  {"dropped_ttl", m.bundles.dropped_ttl},
                  {"unroutable", m.bundles.unroutable},
                  {"discarded_copies", m.bundles.discarded_copies},
                  {"latency_by_priority", latency_json(m.bundles.latency)}};
  j["scheduler"] = {{"calls", m.scheduler_calls},
                    {"nodes_expanded", m.dp.nodes_expanded},
                    {"band_slots", m.dp.band_slots},
                    {"candidates_evaluated", m.dp.candidates_evaluated},
                    {"overlap_nodes", m.dp.overlap_nodes},
                    {"overlap_truncated", m.dp.overlap_truncated},
                    {"shadow_plans", m.dp.shadow_plans}};
  return j.dump(2) + "\n";
}

RunMetrics metrics_from_json(const std::string& text) {
  RunMetrics m;
  try {
    const json j = json::parse(text);
    m.mode = parse_run_mode(j.at("mode").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.scenario_fingerprint = j.at("scenario_fingerprint").get<std::string>();
    m.cumulative_recorded_value = j.at("cumulative_recorded_value").get<double>();
    m.cumulative_assumed_value = j.at("cumulative_assumed_value").get<double>();
    m.pct_gp_observed = j.at("pct_gp_observed").get<double>();
    m.divergence_pct = j.at("assumed_vs_recorded_divergence_pct").get<double>();
    m.n_observations = j.at("n_observations").get<std::size_t>();
    m.n_gp_observed = j.at("n_gp_observed").get<std::size_t>();
    m.n_gp_total = j.at("n_gp_total").get<std::size_t>();
    const auto& b = j.at("bundles");
    m.bundles.generated = b.at("generated").get<std::size_t>();
    m.bundles.delivered = b.at("delivered").get<std::size_t>();
    m.bundles.dropped_ttl = b.at("dropped_ttl").get<std::size_t>();
    m.bundles.unroutable = b.at("unroutable").get<std::size_t>();
    m.bundles.discarded_copies = b.at("discarded_copies").get<std::size_t>();
    for (const auto& p : b.at("latency_by_priority")) {
      dtn::PriorityStats s;
      s.priority = p.at("priority").get<int>();
      s.delivered = p.at("delivered").get<std::size_t>();
      s.min = p.at("min_s").get<double>();
      s.q25 = p.at("q25_s").get<double>();
      s.median = p.at("median_s").get<double>();
      s.q75 = p.at("q75_s").get<double>();
      s.max = p.at("max_s").get<double>();
      s.dropped_ttl = p.at("dropped_ttl").get<std::size_t>();
      s.unroutable = p.at("unroutable").get<std::size_t>();
      m.bundles.latency.push_back(s);
    }
    const auto& s = j.at("scheduler");
    m.scheduler_calls = s.at("calls").get<std::size_t>();
    m.dp.nodes_expanded = s.at("nodes_expanded").get<std::uint64_t>();
    m.dp.band_slots = s.at("band_slots").get<std::uint64_t>();
    m.dp.candidates_evaluated = s.at("candidates_evaluated").get<std::uint64_t>();
    m.dp.overlap_nodes = s.at("overlap_nodes").get<std::uint64_t>();
    m.dp.overlap_truncated = s.at("overlap_truncated").get<std::uint64_t>();
    m.dp.shadow_plans = s.at("shadow_plans").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedHeader, std::string("metrics file: ") + e.what());
  }
  return m;
}

std::string timing_to_json(const RunTiming& t) {
  json j;
  j["total_s"] = t.total_s;
  j["scheduler_s"] = t.scheduler_s;
  j["max_call_s"] = t.max_call_s;
  j["scheduler_s_per_sat"] = t.scheduler_s_per_sat;
  return j.dump(2) + "\n";
}

std::string compare_metrics(const RunMetrics& a, const RunMetrics& b) {
  if (a.scenario_fingerprint != b.scenario_fingerprint || a.seed != b.seed)
    throw Error(ErrorKind::Mismatch,
                "metrics come from different scenarios or seeds (" +
                    a.scenario_fingerprint + "/" + std::to_string(a.seed) + " vs " +
                    b.scenario_fingerprint + "/" + std::to_string(b.seed) + ")");
  auto row = [](double x, double y) {
    return json{{"a", x}, {"b", y}, {"ratio", ratio(x, y)}, {"difference", x - y}};
  };
  json j;
  j["a_mode"] = to_string(a.mode);
  j["b_mode"] = to_string(b.mode);
  j["seed"] = a.seed;
  j["scenario_fingerprint"] = a.scenario_fingerprint;
  j["cumulative_recorded_value"] = row(a.cumulative_recorded_value, b.cumulative_recorded_value);
  j["pct_gp_observed"] = row(a.pct_gp_observed, b.pct_gp_observed);
  j["assumed_vs_recorded_divergence_pct"] = row(a.divergence_pct, b.divergence_pct);

  json lat = json::array();
  for (const auto& pa : a.bundles.latency) {
    for (const auto& pb : b.bundles.latency) {
      if (pa.priority != pb.priority) continue;
      json r = row(pa.median, pb.median);
      r["priority"] = pa.priority;
      lat.push_back(r);
    }
  }
  j["median_latency_by_priority"] = lat;
  j["dominant"] = {
      {"value", dominant(a.cumulative_recorded_value, b.cumulative_recorded_value, true)},
      {"coverage", dominant(a.pct_gp_observed, b.pct_gp_observed, true)},
      {"divergence", dominant(a.divergence_pct, b.divergence_pct, false)}};
  return j.dump(2) + "\n";
}

void write_schedule_csv(std::ostream& os, const std::vector<ExecutedObservation>& obs) {
  os << "sat_id,t,gp_id,slew_angle_deg,slew_time_s\n";
  for (const auto& o : obs)
    os << o.sat << ',' << text::fmt(o.t) << ',' << o.gp << ','
       << text::fmt(o.slew_angle_deg) << ',' << text::fmt(o.slew_time_s) << '\n';
}

}  // namespace eosim
