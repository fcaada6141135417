#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "eosim/error.hpp"
#include "eosim/value.hpp"
#include "text_util.hpp"

namespace eosim {

int NatureRun::frame_index(double t) const {
  const int f = static_cast<int>(std::floor(t / timestep_s));
  return std::clamp(f, 0, n_frames - 1);
}

int NatureRun::absval(int local_gp, double t) const {
  return at(frame_index(t), local_gp);
}

NatureRun read_nature_run(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!text::skippable(line)) return true;
    }
    return false;
  };
  auto fail = [&](ErrorKind k, const std::string& msg) {
    throw Error(k, "nature run line " + std::to_string(lineno) + ": " + msg);
  };

  if (!next_line()) fail(ErrorKind::MalformedHeader, "missing header");
  const auto hdr = text::split_ws(line);
  if (hdr.size() != 5)
    fail(ErrorKind::MalformedHeader,
         "header needs region_id n_gp n_frames timestep_s cell_size_km");
  NatureRun run;
  run.region_id = std::string(hdr[0]);
  const auto n_gp = text::parse<int>(hdr[1]);
  const auto n_frames = text::parse<int>(hdr[2]);
  const auto step = text::parse<double>(hdr[3]);
  const auto cell = text::parse<double>(hdr[4]);
  if (!n_gp || !n_frames || !step || !cell || *n_gp < 1 || *n_frames < 1 ||
      !(*step > 0.0) || !(*cell > 0.0))
    fail(ErrorKind::MalformedHeader, "invalid header values");
  run.n_frames = *n_frames;
  run.timestep_s = *step;
  run.cell_size_km = *cell;
  run.grid.reserve(*n_gp);
  std::vector<std::uint16_t> gp_major;
  gp_major.reserve(static_cast<std::size_t>(*n_gp) * *n_frames);
  std::set<int> ids;

  while (next_line()) {
    const auto f = text::split_ws(line);
    if (static_cast<int>(f.size()) != 3 + run.n_frames)
      fail(ErrorKind::FrameLengthMismatch,
           "expected " + std::to_string(run.n_frames) + " frame values, got " +
               std::to_string(static_cast<int>(f.size()) - 3));
    const auto id = text::parse<int>(f[0]);
    const auto lat = text::parse<double>(f[1]);
    const auto lon = text::parse<double>(f[2]);
    if (!id || !lat || !lon) fail(ErrorKind::BadNumber, "bad gp id or coordinate");
    if (!ids.insert(*id).second) fail(ErrorKind::MalformedHeader, "duplicate gp id");
    if (static_cast<int>(run.grid.size()) == *n_gp)
      fail(ErrorKind::MalformedHeader, "more ground points than the header declares");
    run.grid.push_back({*id, 0, *lat, *lon, run.cell_size_km});
    for (int k = 0; k < run.n_frames; ++k) {
      const auto v = text::parse<int>(f[3 + k]);
      if (!v) fail(ErrorKind::BadNumber, "bad value");
      if (*v < kMinAbsval || *v > kMaxAbsval)
        fail(ErrorKind::ValueOutOfRange,
             "value " + std::to_string(*v) + " outside [1, 256]");
      gp_major.push_back(static_cast<std::uint16_t>(*v));
    }
  }
  if (static_cast<int>(run.grid.size()) != *n_gp)
    fail(ErrorKind::MalformedHeader, "header declares " + std::to_string(*n_gp) +
                                         " ground points, file has " +
                                         std::to_string(run.grid.size()));
  run.values.resize(gp_major.size());
  const std::size_t ng = run.grid.size();
  for (std::size_t g = 0; g < ng; ++g)
    for (int k = 0; k < run.n_frames; ++k)
      run.values[k * ng + g] = gp_major[g * run.n_frames + k];
  return run;
}

NatureRun load_nature_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open nature run file: " + path);
  return read_nature_run(in);
}

void write_nature_run(std::ostream& os, const NatureRun& run) {
  if (run.region_id.empty() ||
      run.region_id.find_first_of(" \t\r\n#") != std::string::npos)
    throw Error(ErrorKind::InvalidArgument,
                "region id must be non-empty without whitespace");
  os << "# region_id n_gp n_frames timestep_s cell_size_km; then per gp: "
        "gp_id lat lon values...\n";
  os << run.region_id << ' ' << run.n_gp() << ' ' << run.n_frames << ' '
     << text::fmt(run.timestep_s) << ' ' << text::fmt(run.cell_size_km) << '\n';
  for (int g = 0; g < run.n_gp(); ++g) {
    const auto& gp = run.grid[g];
    os << gp.gp_id << ' ' << text::fmt(gp.lat_deg) << ' ' << text::fmt(gp.lon_deg);
    for (int k = 0; k < run.n_frames; ++k) os << ' ' << run.at(k, g);
    os << '\n';
  }
}

std::vector<GroundPoint> region_grid(double center_lat_deg,
                                     double center_lon_deg, double extent_km,
                                     double cell_size_km) {
  if (!(extent_km > 0.0) || !(cell_size_km > 0.0))
    throw Error(ErrorKind::InvalidArgument, "region extent and cell size must be > 0");
  const int n = std::max(1, static_cast<int>(std::lround(extent_km / cell_size_km)));
  const double half = 0.5 * n * cell_size_km;
  const double coslat = std::cos(deg2rad(center_lat_deg));
  std::vector<GroundPoint> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int row = 0; row < n; ++row) {
    const double dy = (row + 0.5) * cell_size_km - half;
    for (int col = 0; col < n; ++col) {
      const double dx = (col + 0.5) * cell_size_km - half;
      GroundPoint gp;
      gp.gp_id = row * n + col;
      gp.lat_deg = center_lat_deg + rad2deg(dy / kEarthRadiusKm);
      gp.lon_deg = center_lon_deg + rad2deg(dx / (kEarthRadiusKm * coslat));
      gp.cell_size_km = cell_size_km;
      out.push_back(gp);
    }
  }
  return out;
}

NatureRun synth_nature_run(std::uint64_t seed, const SynthParams& p) {
  if (p.n_blobs < 1 || p.n_frames < 1 || !(p.timestep_s > 0.0))
    throw Error(ErrorKind::InvalidArgument,
                "synthetic nature run needs blobs, frames and a positive step");
  NatureRun run;
  run.region_id = p.region_id;
  run.timestep_s = p.timestep_s;
  run.cell_size_km = p.cell_size_km;
  run.n_frames = p.n_frames;
  run.grid = region_grid(p.center_lat_deg, p.center_lon_deg, p.extent_km,
                         p.cell_size_km);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-0.5 * p.extent_km, 0.5 * p.extent_km);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::pair<double, double>> seeds(p.n_blobs);
  for (auto& s : seeds) s = {pos(rng), pos(rng)};

  // Watershed membership: nearest seed in local km offsets.
  const int n_side = std::max(1, static_cast<int>(std::lround(p.extent_km / p.cell_size_km)));
  const double half = 0.5 * n_side * p.cell_size_km;
  std::vector<int> blob_of(run.grid.size());
  for (std::size_t g = 0; g < run.grid.size(); ++g) {
    const double dx = (static_cast<int>(g) % n_side + 0.5) * p.cell_size_km - half;
    const double dy = (static_cast<int>(g) / n_side + 0.5) * p.cell_size_km - half;
    double best = 1e300;
    for (int b = 0; b < p.n_blobs; ++b) {
      const double d = std::hypot(dx - seeds[b].first, dy - seeds[b].second);
      if (d < best) {
        best = d;
        blob_of[g] = b;
      }
    }
  }

  const double rho = p.static_field || !(p.transiency_s > 0.0)
                         ? (p.static_field ? 1.0 : 0.0)
                         : std::exp(-p.timestep_s / p.transiency_s);
  const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  std::vector<double> z(p.n_blobs);
  for (auto& x : z) x = normal(rng);

  run.values.resize(static_cast<std::size_t>(p.n_frames) * run.grid.size());
  std::vector<int> order(p.n_blobs);
  std::vector<int> level_value(p.n_blobs);
  for (int k = 0; k < p.n_frames; ++k) {
    if (k > 0)
      for (auto& x : z) x = rho * x + innov * normal(rng);
    // Activity rank -> stratified log2 level, so every frame spans the scale.
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return z[a] < z[b]; });
    for (int r = 0; r < p.n_blobs; ++r) {
      const double level = 8.0 * (r + 0.5) / p.n_blobs;
      level_value[order[r]] = std::clamp(
          static_cast<int>(std::lround(std::exp2(level))), kMinAbsval, kMaxAbsval);
    }
    for (std::size_t g = 0; g < run.grid.size(); ++g)
      run.values[k * run.grid.size() + g] =
          static_cast<std::uint16_t>(level_value[blob_of[g]]);
  }
  return run;
}

NatureField::NatureField(std::vector<NatureRun> runs) : runs_(std::move(runs)) {
  for (int r = 0; r < static_cast<int>(runs_.size()); ++r) {
    offsets_.push_back(static_cast<int>(gps_.size()));
    for (auto gp : runs_[r].grid) {
      gp.region = r;
      gp.gp_id = static_cast<int>(gps_.size());
      gps_.push_back(gp);
    }
  }
}

int NatureField::absval(int gp, double t) const {
  const int r = gps_[gp].region;
  return runs_[r].absval(gp - offsets_[r], t);
}

}  // namespace eosim
