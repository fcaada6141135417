#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "eosim/error.hpp"
#include "eosim/scenario.hpp"
#include "json.hpp"

namespace eosim {

using json = nlohmann::ordered_json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, field + ": " + msg);
}

// Reads the keys of one JSON object, remembering which were consumed so
// that misspelled keys are reported instead of silently ignored.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(field(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(field(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(field(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(field(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

RegionConfig make_region(const char* id, double lat, double lon) {
  RegionConfig r;
  r.id = id;
  r.center_lat_deg = lat;
  r.center_lon_deg = lon;
  return r;
}

void parse_region(const json& j, const std::string& path, RegionConfig& r) {
  Section s(j, path);
  s.get("id", r.id);
  s.get("center_lat_deg", r.center_lat_deg);
  s.get("center_lon_deg", r.center_lon_deg);
  s.get("extent_km", r.extent_km);
  s.get("cell_size_km", r.cell_size_km);
  if (const json* n = s.find("nature")) {
    Section ns(*n, s.field("nature"));
    std::string source = r.nature.from_file ? "file" : "synthetic";
    ns.get("source", source);
    if (source == "file") {
      r.nature.from_file = true;
    } else if (source == "synthetic") {
      r.nature.from_file = false;
    } else {
      fail(ns.field("source"), "expected \"file\" or \"synthetic\"");
    }
    ns.get("path", r.nature.path);
    if (const json* seed = ns.find("seed")) {
      if (seed->is_null()) {
        r.nature.seed.reset();
      } else if (seed->is_number_unsigned()) {
        r.nature.seed = seed->get<std::uint64_t>();
      } else {
        fail(ns.field("seed"), "expected a non-negative integer or null");
      }
    }
    ns.get("n_blobs", r.nature.n_blobs);
    ns.get("timestep_s", r.nature.timestep_s);
    ns.get("transiency_s", r.nature.transiency_s);
    ns.get("static", r.nature.static_field);
    ns.finish();
  }
  s.finish();
}

void parse_station(const json& j, const std::string& path, GroundStation& g) {
  Section s(j, path);
  s.get("name", g.name);
  s.get("lat_deg", g.lat_deg);
  s.get("lon_deg", g.lon_deg);
  s.get("min_elevation_deg", g.min_elevation_deg);
  s.finish();
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig c;
  c.regions = {make_region("dhaka", 23.81, 90.41), make_region("sydney", -33.87, 151.21),
               make_region("dallas", 32.78, -96.80), make_region("london", 51.51, -0.13),
               make_region("rio_de_janeiro", -22.91, -43.17)};
  c.stations = {{"svalbard", 78.23, 15.39, 5.0}, {"troll", -72.01, 2.53, 5.0}};
  return c;
}

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c = default_config();
  Section s(root, "");
  s.get("seed", c.seed);

  if (const json* j = s.find("constellation")) {
    Section cs(*j, "constellation");
    cs.get("planes", c.constellation.planes);
    cs.get("sats_per_plane", c.constellation.sats_per_plane);
    cs.get("altitude_km", c.constellation.altitude_km);
    cs.get("inclination_deg", c.constellation.inclination_deg);
    std::string type = c.constellation.star ? "star" : "delta";
    cs.get("walker_type", type);
    if (type != "star" && type != "delta")
      fail(cs.field("walker_type"), "expected \"star\" or \"delta\"");
    c.constellation.star = type == "star";
    cs.get("phasing", c.constellation.phasing);
    cs.get("j2_raan_drift", c.propagation.j2_raan_drift);
    cs.get("gmst_at_epoch_deg", c.propagation.gmst_at_epoch_deg);
    cs.finish();
  }
  if (const json* j = s.find("sensor")) {
    Section ss(*j, "sensor");
    ss.get("for_half_angle_deg", c.for_half_angle_deg);
    ss.get("footprint_km", c.footprint_km);
    ss.finish();
  }
  if (const json* j = s.find("regions")) {
    if (!j->is_array()) fail("regions", "expected an array");
    c.regions.clear();
    for (std::size_t i = 0; i < j->size(); ++i) {
      RegionConfig r;
      r.id = "region" + std::to_string(i);
      parse_region((*j)[i], "regions[" + std::to_string(i) + "]", r);
      c.regions.push_back(r);
    }
  }
  if (const json* j = s.find("clock")) {
    Section cs(*j, "clock");
    cs.get("horizon_s", c.horizon_s);
    cs.get("dt_step_s", c.dt_step_s);
    cs.get("reschedule_period_s", c.reschedule_period_s);
    cs.get("planning_horizon_s", c.planning_horizon_s);
    cs.finish();
  }
  if (const json* j = s.find("network")) {
    Section ns(*j, "network");
    ns.get("isl_enabled", c.isl_enabled);
    ns.get("isl_data_rate_bps", c.isl_data_rate_bps);
    ns.get("ground_data_rate_bps", c.ground_data_rate_bps);
    ns.get("contact_step_s", c.contact_step_s);
    ns.get("grazing_margin_km", c.grazing_margin_km);
    ns.get("bundle_payload_bits", c.bundle_payload_bits);
    ns.get("bundle_size_bits", c.bundle_size_bits);
    ns.get("batch_window_s", c.batch_window_s);
    ns.get("max_priority", c.max_priority);
    ns.finish();
  }
  if (const json* j = s.find("ground")) {
    Section gs(*j, "ground");
    std::string model = c.ground_contact == GroundContactModel::Stations ? "stations"
                                                                         : "continuous";
    gs.get("contact_model", model);
    if (model == "stations")
      c.ground_contact = GroundContactModel::Stations;
    else if (model == "continuous")
      c.ground_contact = GroundContactModel::Continuous;
    else
      fail(gs.field("contact_model"), "expected \"stations\" or \"continuous\"");
    if (const json* st = gs.find("stations")) {
      if (!st->is_array()) fail(gs.field("stations"), "expected an array");
      c.stations.clear();
      for (std::size_t i = 0; i < st->size(); ++i) {
        GroundStation g;
        g.name = "station" + std::to_string(i);
        parse_station((*st)[i], "ground.stations[" + std::to_string(i) + "]", g);
        c.stations.push_back(g);
      }
    }
    gs.finish();
  }
  if (const json* j = s.find("slew")) {
    Section ss(*j, "slew");
    ss.get("c3_s_per_deg3", c.slew.c3);
    ss.get("c2_s_per_deg2", c.slew.c2);
    ss.get("c1_s_per_deg", c.slew.c1);
    ss.get("c0_s", c.slew.c0);
    ss.get("sigma_s", c.slew.sigma);
    ss.get("k_sigma", c.k_sigma);
    if (const json* a = ss.find("alpha_max_deg")) {
      if (a->is_null())
        c.alpha_max_deg.reset();
      else if (a->is_number())
        c.alpha_max_deg = a->get<double>();
      else
        fail(ss.field("alpha_max_deg"), "expected a number or null");
    }
    ss.finish();
  }
  if (const json* j = s.find("value")) {
    Section vs(*j, "value");
    std::string mode = c.value.mode == ValueMode::Count ? "count" : "distance";
    vs.get("mode", mode);
    if (mode == "count")
      c.value.mode = ValueMode::Count;
    else if (mode == "distance")
      c.value.mode = ValueMode::Distance;
    else
      fail(vs.field("mode"), "expected \"count\" or \"distance\"");
    vs.get("count_includes_current", c.value.count_includes_current);
    vs.get("zero_window_s", c.value.zero_window_s);
    vs.get("distance_ref_km", c.value.distance_ref_km);
    vs.finish();
  }
  if (const json* j = s.find("scheduler")) {
    Section ss(*j, "scheduler");
    ss.get("joint_overlap", c.joint_overlap);
    ss.get("max_overlap_set", c.max_overlap_set);
    ss.finish();
  }
  if (const json* j = s.find("nonagile")) {
    Section ns(*j, "nonagile");
    ns.get("substep_s", c.nonagile_substep_s);
    ns.finish();
  }
  s.finish();
  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["constellation"] = {{"planes", c.constellation.planes},
                        {"sats_per_plane", c.constellation.sats_per_plane},
                        {"altitude_km", c.constellation.altitude_km},
                        {"inclination_deg", c.constellation.inclination_deg},
                        {"walker_type", c.constellation.star ? "star" : "delta"},
                        {"phasing", c.constellation.phasing},
                        {"j2_raan_drift", c.propagation.j2_raan_drift},
                        {"gmst_at_epoch_deg", c.propagation.gmst_at_epoch_deg}};
  j["sensor"] = {{"for_half_angle_deg", c.for_half_angle_deg},
                 {"footprint_km", c.footprint_km}};
  json regions = json::array();
  for (const auto& r : c.regions) {
    json nature;
    if (r.nature.from_file) {
      nature = {{"source", "file"}, {"path", r.nature.path}};
    } else {
      nature = {{"source", "synthetic"},
                {"seed", r.nature.seed ? json(*r.nature.seed) : json(nullptr)},
                {"n_blobs", r.nature.n_blobs},
                {"timestep_s", r.nature.timestep_s},
                {"transiency_s", r.nature.transiency_s},
                {"static", r.nature.static_field}};
    }
    regions.push_back({{"id", r.id},
                       {"center_lat_deg", r.center_lat_deg},
                       {"center_lon_deg", r.center_lon_deg},
                       {"extent_km", r.extent_km},
                       {"cell_size_km", r.cell_size_km},
                       {"nature", nature}});
  }
  j["regions"] = regions;
  j["clock"] = {{"horizon_s", c.horizon_s},
                {"dt_step_s", c.dt_step_s},
                {"reschedule_period_s", c.reschedule_period_s},
                {"planning_horizon_s", c.planning_horizon_s}};
  j["network"] = {{"isl_enabled", c.isl_enabled},
                  {"isl_data_rate_bps", c.isl_data_rate_bps},
                  {"ground_data_rate_bps", c.ground_data_rate_bps},
                  {"contact_step_s", c.contact_step_s},
                  {"grazing_margin_km", c.grazing_margin_km},
                  {"bundle_payload_bits", c.bundle_payload_bits},
                  {"bundle_size_bits", c.bundle_size_bits},
                  {"batch_window_s", c.batch_window_s},
                  {"max_priority", c.max_priority}};
  json stations = json::array();
  for (const auto& g : c.stations)
    stations.push_back({{"name", g.name},
                        {"lat_deg", g.lat_deg},
                        {"lon_deg", g.lon_deg},
                        {"min_elevation_deg", g.min_elevation_deg}});
  j["ground"] = {{"contact_model", c.ground_contact == GroundContactModel::Stations
                                       ? "stations"
                                       : "continuous"},
                 {"stations", stations}};
  j["slew"] = {{"c3_s_per_deg3", c.slew.c3},
               {"c2_s_per_deg2", c.slew.c2},
               {"c1_s_per_deg", c.slew.c1},
               {"c0_s", c.slew.c0},
               {"sigma_s", c.slew.sigma},
               {"k_sigma", c.k_sigma},
               {"alpha_max_deg", c.resolved_alpha_max_deg()}};
  j["value"] = {{"mode", c.value.mode == ValueMode::Count ? "count" : "distance"},
                {"count_includes_current", c.value.count_includes_current},
                {"zero_window_s", c.value.zero_window_s},
                {"distance_ref_km", c.value.distance_ref_km}};
  j["scheduler"] = {{"joint_overlap", c.joint_overlap},
                    {"max_overlap_set", c.max_overlap_set}};
  j["nonagile"] = {{"substep_s", c.nonagile_substep_s}};
  return j.dump(2) + "\n";
}

void validate_config(const ScenarioConfig& c) {
  const auto& w = c.constellation;
  if (w.planes < 1) fail("constellation.planes", "must be >= 1");
  if (w.sats_per_plane < 1) fail("constellation.sats_per_plane", "must be >= 1");
  if (!(w.altitude_km > 0.0) || !std::isfinite(w.altitude_km))
    fail("constellation.altitude_km", "must be > 0");
  if (!(w.inclination_deg >= 0.0 && w.inclination_deg <= 180.0))
    fail("constellation.inclination_deg", "must lie in [0, 180]");
  if (w.phasing < 0) fail("constellation.phasing", "must be >= 0");
  if (!std::isfinite(c.propagation.gmst_at_epoch_deg))
    fail("constellation.gmst_at_epoch_deg", "must be finite");

  if (!(c.for_half_angle_deg > 0.0 && c.for_half_angle_deg < 90.0))
    fail("sensor.for_half_angle_deg", "must lie in (0, 90)");
  if (!(c.footprint_km > 0.0) || !std::isfinite(c.footprint_km))
    fail("sensor.footprint_km", "must be > 0");

  if (c.regions.empty()) fail("regions", "at least one region is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.regions.size(); ++i) {
    const auto& r = c.regions[i];
    const std::string p = "regions[" + std::to_string(i) + "]";
    if (r.id.empty()) fail(p + ".id", "must not be empty");
    if (!ids.insert(r.id).second) fail(p + ".id", "duplicate region id '" + r.id + "'");
    if (!(r.center_lat_deg >= -90.0 && r.center_lat_deg <= 90.0))
      fail(p + ".center_lat_deg", "must lie in [-90, 90]");
    if (!(r.center_lon_deg >= -180.0 && r.center_lon_deg <= 360.0))
      fail(p + ".center_lon_deg", "must lie in [-180, 360]");
    if (!(r.extent_km > 0.0) || !std::isfinite(r.extent_km))
      fail(p + ".extent_km", "must be > 0");
    if (!(r.cell_size_km > 0.0) || !std::isfinite(r.cell_size_km))
      fail(p + ".cell_size_km", "must be > 0");
    if (r.cell_size_km > c.footprint_km / 2.0 + 1e-12)
      fail(p + ".cell_size_km", "must not exceed half the footprint");
    if (r.nature.from_file) {
      if (r.nature.path.empty()) fail(p + ".nature.path", "required for file sources");
    } else {
      if (r.nature.n_blobs < 1) fail(p + ".nature.n_blobs", "must be >= 1");
      if (!(r.nature.timestep_s > 0.0)) fail(p + ".nature.timestep_s", "must be > 0");
      if (!(r.nature.transiency_s > 0.0)) fail(p + ".nature.transiency_s", "must be > 0");
    }
  }

  if (!(c.horizon_s > 0.0) || !std::isfinite(c.horizon_s))
    fail("clock.horizon_s", "must be > 0");
  if (!(c.dt_step_s > 0.0)) fail("clock.dt_step_s", "must be > 0");
  if (!(c.reschedule_period_s > 0.0)) fail("clock.reschedule_period_s", "must be > 0");
  if (!(c.planning_horizon_s > 0.0)) fail("clock.planning_horizon_s", "must be > 0");
  auto multiple = [](double x, double u) {
    const double q = x / u;
    return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
  };
  if (!multiple(c.reschedule_period_s, c.dt_step_s))
    fail("clock.reschedule_period_s", "must be a multiple of dt_step_s");
  if (!multiple(c.planning_horizon_s, c.dt_step_s))
    fail("clock.planning_horizon_s", "must be a multiple of dt_step_s");
  if (!multiple(c.horizon_s, c.dt_step_s))
    fail("clock.horizon_s", "must be a multiple of dt_step_s");

  if (!(c.isl_data_rate_bps > 0.0)) fail("network.isl_data_rate_bps", "must be > 0");
  if (!(c.ground_data_rate_bps > 0.0)) fail("network.ground_data_rate_bps", "must be > 0");
  if (!(c.contact_step_s > 0.0)) fail("network.contact_step_s", "must be > 0");
  if (!(c.grazing_margin_km >= 0.0)) fail("network.grazing_margin_km", "must be >= 0");
  if (!(c.bundle_payload_bits > 0.0)) fail("network.bundle_payload_bits", "must be > 0");
  if (!(c.bundle_size_bits >= c.bundle_payload_bits))
    fail("network.bundle_size_bits", "must be >= bundle_payload_bits");
  if (!(c.batch_window_s > 0.0)) fail("network.batch_window_s", "must be > 0");
  if (c.max_priority < 1 || c.max_priority > 15)
    fail("network.max_priority", "must lie in [1, 15]");

  for (std::size_t i = 0; i < c.stations.size(); ++i) {
    const auto& g = c.stations[i];
    const std::string p = "ground.stations[" + std::to_string(i) + "]";
    if (!(g.lat_deg >= -90.0 && g.lat_deg <= 90.0)) fail(p + ".lat_deg", "must lie in [-90, 90]");
    if (!std::isfinite(g.lon_deg)) fail(p + ".lon_deg", "must be finite");
    if (!(g.min_elevation_deg >= 0.0 && g.min_elevation_deg < 90.0))
      fail(p + ".min_elevation_deg", "must lie in [0, 90)");
  }

  if (!finite_all({c.slew.c3, c.slew.c2, c.slew.c1, c.slew.c0, c.slew.sigma}))
    fail("slew", "coefficients must be finite");
  if (!(c.slew.c0 > 0.0)) fail("slew.c0_s", "must be > 0");
  if (!(c.slew.sigma >= 0.0)) fail("slew.sigma_s", "must be >= 0");
  if (!(c.k_sigma >= 0.0)) fail("slew.k_sigma", "must be >= 0");
  const double a = c.resolved_alpha_max_deg();
  if (!(a > 0.0 && a <= 180.0)) fail("slew.alpha_max_deg", "must lie in (0, 180]");

  if (!(c.value.zero_window_s >= 0.0)) fail("value.zero_window_s", "must be >= 0");
  if (!(c.value.distance_ref_km > 0.0)) fail("value.distance_ref_km", "must be > 0");
  if (c.max_overlap_set < 1) fail("scheduler.max_overlap_set", "must be >= 1");
  if (!(c.nonagile_substep_s > 0.0)) fail("nonagile.substep_s", "must be > 0");
}

std::uint64_t derived_nature_seed(std::uint64_t master_seed, int region_index) {
  return splitmix(splitmix(master_seed ^ 0x6e61747572ULL) +
                  static_cast<std::uint64_t>(region_index));
}

Scenario build_scenario(const ScenarioConfig& config) {
  validate_config(config);
  Scenario sc;
  sc.config = config;

  std::vector<NatureRun> runs;
  for (std::size_t i = 0; i < config.regions.size(); ++i) {
    const auto& r = config.regions[i];
    NatureRun run;
    if (r.nature.from_file) {
      run = load_nature_run(r.nature.path);
      if (run.horizon_s() + 1e-9 < config.horizon_s)
        throw Error(ErrorKind::Config,
                    "regions[" + std::to_string(i) + "].nature: run covers " +
                        std::to_string(run.horizon_s()) + " s, horizon is " +
                        std::to_string(config.horizon_s) + " s");
    } else {
      SynthParams p;
      p.region_id = r.id;
      p.center_lat_deg = r.center_lat_deg;
      p.center_lon_deg = r.center_lon_deg;
      p.extent_km = r.extent_km;
      p.cell_size_km = r.cell_size_km;
      p.n_blobs = r.nature.n_blobs;
      p.timestep_s = r.nature.timestep_s;
      p.n_frames = std::max(1, static_cast<int>(std::ceil(config.horizon_s /
                                                           r.nature.timestep_s - 1e-9)));
      p.transiency_s = r.nature.transiency_s;
      p.static_field = r.nature.static_field;
      run = synth_nature_run(
          r.nature.seed.value_or(derived_nature_seed(config.seed, static_cast<int>(i))), p);
    }
    run.region_id = r.id;
    runs.push_back(std::move(run));
  }
  sc.nature = NatureField(std::move(runs));

  sc.constellation = walker_constellation(config.constellation);

  AccessOptions ao;
  ao.horizon_s = config.horizon_s;
  ao.dt_s = config.dt_step_s;
  ao.for_half_angle_deg = config.for_half_angle_deg;
  ao.propagation = config.propagation;
  sc.access = AccessTable(sc.constellation, sc.nature.ground_points(),
                          sc.nature.num_regions(), ao);

  ContactPlanOptions co;
  co.horizon_s = config.horizon_s;
  co.step_s = config.contact_step_s;
  co.grazing_margin_km = config.grazing_margin_km;
  co.isl_data_rate_bps = config.isl_data_rate_bps;
  co.ground_data_rate_bps = config.ground_data_rate_bps;
  co.propagation = config.propagation;
  sc.contact_plan = build_contact_plan(sc.constellation, config.stations, co);

  // FNV-1a over the resolved configuration.
  const std::string text = config_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  sc.fingerprint = os.str();
  return sc;
}

}  // namespace eosim
