#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "eosim/cosim.hpp"
#include "eosim/dtn.hpp"
#include "eosim/eosim.h"
#include "eosim/error.hpp"
#include "eosim/scenario.hpp"

struct eosim_scenario {
  eosim::Scenario scenario;
};

struct eosim_result {
  eosim::RunResult result;
};

namespace {

thread_local std::string g_last_error;

eosim_status status_of(eosim::ErrorKind k) {
  using eosim::ErrorKind;
  switch (k) {
    case ErrorKind::InvalidArgument: return EOSIM_ERR_INVALID_ARGUMENT;
    case ErrorKind::Io: return EOSIM_ERR_IO;
    case ErrorKind::MalformedHeader:
    case ErrorKind::FrameLengthMismatch:
    case ErrorKind::BadNumber: return EOSIM_ERR_PARSE;
    case ErrorKind::ValueOutOfRange: return EOSIM_ERR_RANGE;
    case ErrorKind::Config: return EOSIM_ERR_CONFIG;
    case ErrorKind::Mismatch: return EOSIM_ERR_MISMATCH;
    case ErrorKind::Unsupported: return EOSIM_ERR_UNSUPPORTED;
  }
  return EOSIM_ERR_INTERNAL;
}

eosim_status fail(eosim_status st, std::string msg) {
  g_last_error = std::move(msg);
  return st;
}

template <class F>
eosim_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return EOSIM_OK;
  } catch (const eosim::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EOSIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EOSIM_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw eosim::Error(eosim::ErrorKind::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw eosim::Error(eosim::ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw eosim::Error(eosim::ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw eosim::Error(eosim::ErrorKind::Io, "write failed: " + path.string());
}

template <class W>
void write_file(const std::filesystem::path& path, W&& writer) {
  auto out = open_out(path);
  writer(out);
  close_out(out, path);
}

bool scalar_metric(const eosim::RunResult& r, const std::string& name, double& v) {
  const auto& m = r.metrics;
  if (name == "cumulative_recorded_value") v = m.cumulative_recorded_value;
  else if (name == "cumulative_assumed_value") v = m.cumulative_assumed_value;
  else if (name == "pct_gp_observed") v = m.pct_gp_observed;
  else if (name == "assumed_vs_recorded_divergence_pct") v = m.divergence_pct;
  else if (name == "n_observations") v = double(m.n_observations);
  else if (name == "n_gp_observed") v = double(m.n_gp_observed);
  else if (name == "n_gp_total") v = double(m.n_gp_total);
  else if (name == "seed") v = double(m.seed);
  else if (name == "bundles.generated") v = double(m.bundles.generated);
  else if (name == "bundles.delivered") v = double(m.bundles.delivered);
  else if (name == "bundles.dropped_ttl") v = double(m.bundles.dropped_ttl);
  else if (name == "bundles.unroutable") v = double(m.bundles.unroutable);
  else if (name == "bundles.discarded_copies") v = double(m.bundles.discarded_copies);
  else if (name == "scheduler.calls") v = double(m.scheduler_calls);
  else if (name == "scheduler.nodes_expanded") v = double(m.dp.nodes_expanded);
  else if (name == "scheduler.candidates_evaluated") v = double(m.dp.candidates_evaluated);
  else if (name == "scheduler.overlap_nodes") v = double(m.dp.overlap_nodes);
  else if (name == "timing.total_s") v = r.timing.total_s;
  else if (name == "timing.scheduler_s") v = r.timing.scheduler_s;
  else if (name == "timing.max_call_s") v = r.timing.max_call_s;
  else return false;
  return true;
}

}  // namespace

extern "C" {

const char* eosim_version(void) { return "1.0.0"; }

const char* eosim_status_name(eosim_status status) {
  switch (status) {
    case EOSIM_OK: return "ok";
    case EOSIM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EOSIM_ERR_IO: return "i/o error";
    case EOSIM_ERR_PARSE: return "parse error";
    case EOSIM_ERR_CONFIG: return "configuration error";
    case EOSIM_ERR_RANGE: return "value out of range";
    case EOSIM_ERR_MISMATCH: return "mismatch";
    case EOSIM_ERR_UNSUPPORTED: return "unsupported";
    case EOSIM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* eosim_last_error(void) { return g_last_error.c_str(); }

void eosim_string_free(char* s) { delete[] s; }

eosim_status eosim_default_config_json(char** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = dup_string(eosim::config_to_json(eosim::default_config()));
  });
}

eosim_status eosim_scenario_create(const char* config_json, eosim_scenario** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = nullptr;
    auto cfg = config_json ? eosim::parse_config(config_json) : eosim::default_config();
    *out = new eosim_scenario{eosim::build_scenario(cfg)};
  });
}

eosim_status eosim_scenario_load(const char* path, eosim_scenario** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new eosim_scenario{eosim::build_scenario(eosim::load_config(path))};
  });
}

eosim_status eosim_scenario_set_seed(eosim_scenario* s, uint64_t seed) {
  return guarded([&] {
    require(s, "scenario is null");
    auto cfg = s->scenario.config;
    cfg.seed = seed;
    s->scenario = eosim::build_scenario(cfg);
  });
}

void eosim_scenario_destroy(eosim_scenario* s) { delete s; }

eosim_status eosim_scenario_config_json(const eosim_scenario* s, char** out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = dup_string(eosim::config_to_json(s->scenario.config));
  });
}

eosim_status eosim_scenario_fingerprint(const eosim_scenario* s, char** out) {
  return guarded([&] {
    require(s && out, "null argument");
    *out = dup_string(s->scenario.fingerprint);
  });
}

eosim_status eosim_scenario_counts(const eosim_scenario* s, int* n_sats, int* n_gp,
                                   size_t* n_contacts) {
  return guarded([&] {
    require(s, "scenario is null");
    if (n_sats) *n_sats = s->scenario.num_sats();
    if (n_gp) *n_gp = s->scenario.nature.num_gp();
    if (n_contacts) *n_contacts = s->scenario.contact_plan.size();
  });
}

eosim_status eosim_scenario_write_contact_plan(const eosim_scenario* s, const char* path) {
  return guarded([&] {
    require(s && path, "null argument");
    write_file(path, [&](std::ostream& os) {
      eosim::write_contact_plan(os, s->scenario.contact_plan);
    });
  });
}

eosim_status eosim_scenario_write_config(const eosim_scenario* s, const char* path) {
  return guarded([&] {
    require(s && path, "null argument");
    write_file(path, [&](std::ostream& os) { os << eosim::config_to_json(s->scenario.config); });
  });
}

eosim_status eosim_run(const eosim_scenario* s, const char* mode, eosim_result** out) {
  return guarded([&] {
    require(s && mode && out, "null argument");
    *out = nullptr;
    const auto m = eosim::parse_run_mode(mode);
    *out = new eosim_result{eosim::run_mode(s->scenario, m)};
  });
}

void eosim_result_destroy(eosim_result* r) { delete r; }

eosim_status eosim_result_metric(const eosim_result* r, const char* name, double* out) {
  return guarded([&] {
    require(r && name && out, "null argument");
    if (!scalar_metric(r->result, name, *out))
      throw eosim::Error(eosim::ErrorKind::InvalidArgument,
                         std::string("unknown metric '") + name + "'");
  });
}

eosim_status eosim_result_metrics_json(const eosim_result* r, char** out) {
  return guarded([&] {
    require(r && out, "null argument");
    *out = dup_string(eosim::metrics_to_json(r->result.metrics));
  });
}

eosim_status eosim_result_write(const eosim_result* r, const char* dir) {
  return guarded([&] {
    require(r && dir, "null argument");
    namespace fs = std::filesystem;
    const fs::path base(dir);
    std::error_code ec;
    fs::create_directories(base, ec);
    if (ec) throw eosim::Error(eosim::ErrorKind::Io, "cannot create " + base.string());
    const auto& res = r->result;
    const std::string tag = eosim::to_string(res.metrics.mode);
    write_file(base / ("metrics_" + tag + ".json"),
               [&](std::ostream& os) { os << eosim::metrics_to_json(res.metrics); });
    write_file(base / ("timing_" + tag + ".json"),
               [&](std::ostream& os) { os << eosim::timing_to_json(res.timing); });
    write_file(base / ("schedule_" + tag + ".csv"),
               [&](std::ostream& os) { eosim::write_schedule_csv(os, res.observations); });
    write_file(base / ("deliveries_" + tag + ".csv"),
               [&](std::ostream& os) { eosim::dtn::write_delivery_records(os, res.deliveries); });
    write_file(base / ("latency_" + tag + ".json"), [&](std::ostream& os) {
      eosim::dtn::write_latency_summary(os, res.metrics.bundles.latency);
    });
  });
}

eosim_status eosim_compare_files(const char* metrics_a, const char* metrics_b, char** out) {
  return guarded([&] {
    require(metrics_a && metrics_b && out, "null argument");
    const auto a = eosim::metrics_from_json(read_file(metrics_a));
    const auto b = eosim::metrics_from_json(read_file(metrics_b));
    *out = dup_string(eosim::compare_metrics(a, b));
  });
}

eosim_status eosim_dtn_simulate_files(const char* traffic_path, const char* plan_path,
                                      const char* records_path, const char* summary_path) {
  return guarded([&] {
    require(traffic_path && plan_path && records_path && summary_path, "null argument");
    std::istringstream traffic_in(read_file(traffic_path));
    std::istringstream plan_in(read_file(plan_path));
    const auto traffic = eosim::dtn::read_traffic(traffic_in);
    const auto plan = eosim::read_contact_plan(plan_in);
    const auto records = eosim::dtn::simulate(traffic, plan);
    const auto stats = eosim::dtn::latency_stats(records);
    write_file(records_path,
               [&](std::ostream& os) { eosim::dtn::write_delivery_records(os, records); });
    write_file(summary_path,
               [&](std::ostream& os) { eosim::dtn::write_latency_summary(os, stats); });
  });
}

}  // extern "C"
