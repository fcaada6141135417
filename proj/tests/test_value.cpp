#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "eosim/error.hpp"
#include "eosim/value.hpp"

using namespace eosim;

namespace {

NatureRun single(int value, int n_gp = 1, int n_frames = 1) {
  NatureRun r;
  r.region_id = "r";
  r.n_frames = n_frames;
  for (int g = 0; g < n_gp; ++g) r.grid.push_back({g, 0, 0.01 * g, 0.0});
  r.values.assign(static_cast<std::size_t>(n_gp) * n_frames, static_cast<std::uint16_t>(value));
  return r;
}

ErrorKind parse_kind(const std::string& text) {
  std::istringstream in(text);
  try {
    read_nature_run(in);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised for: " << text);
  return ErrorKind::Unsupported;
}

}  // namespace

TEST_CASE("nature run file format") {
  std::istringstream one("r1 1 1 900 4\n0 23.5 90.1 256\n");
  const auto run = read_nature_run(one);
  CHECK(run.region_id == "r1");
  CHECK(run.absval(0, 0.0) == 256);

  CHECK(parse_kind("r1 1 1 900 4\n0 23.5 90.1 0\n") == ErrorKind::ValueOutOfRange);
  CHECK(parse_kind("r1 1 1 900 4\n0 23.5 90.1 257\n") == ErrorKind::ValueOutOfRange);
  CHECK(parse_kind("r1 1 2 900 4\n0 23.5 90.1 5\n") == ErrorKind::FrameLengthMismatch);
  CHECK(parse_kind("r1 1 x 900 4\n") == ErrorKind::MalformedHeader);
  CHECK(parse_kind("r1 2 1 900 4\n0 23.5 90.1 5\n") == ErrorKind::MalformedHeader);
  CHECK(parse_kind("") == ErrorKind::MalformedHeader);
  CHECK(parse_kind("r1 1 1 900 4\n0 abc 90.1 5\n") == ErrorKind::BadNumber);

  CHECK_THROWS_AS(load_nature_run("/nonexistent/run.txt"), Error);
}

TEST_CASE("a six-hour run at fifteen-minute frames") {
  SynthParams p;
  p.n_frames = 24;
  p.extent_km = 40.0;
  const auto run = synth_nature_run(3, p);
  CHECK(run.n_gp() == 100);
  CHECK(run.horizon_s() == 21600.0);
  CHECK(run.frame_index(0.0) == 0);
  CHECK(run.frame_index(899.9) == 0);
  CHECK(run.frame_index(900.0) == 1);
  CHECK(run.frame_index(21599.0) == 23);

  std::ostringstream out;
  write_nature_run(out, run);
  std::istringstream in(out.str());
  const auto back = read_nature_run(in);
  CHECK(back.values == run.values);
  CHECK(back.n_frames == run.n_frames);
  std::ostringstream again;
  write_nature_run(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("synthetic generator properties") {
  SynthParams p;
  const auto a = synth_nature_run(11, p);
  const auto b = synth_nature_run(11, p);
  CHECK(a.values == b.values);
  CHECK(synth_nature_run(12, p).values != a.values);
  for (auto v : a.values) {
    CHECK(v >= kMinAbsval);
    CHECK(v <= kMaxAbsval);
  }
  // Default parameters span at least four octaves in every frame.
  for (int k = 0; k < a.n_frames; ++k) {
    int lo = kMaxAbsval, hi = kMinAbsval;
    for (int g = 0; g < a.n_gp(); ++g) {
      lo = std::min(lo, a.at(k, g));
      hi = std::max(hi, a.at(k, g));
    }
    CHECK(std::log2(double(hi) / lo) >= 4.0);
  }
  // Watersheds: far fewer distinct values than cells.
  std::set<int> distinct;
  for (int g = 0; g < a.n_gp(); ++g) distinct.insert(a.at(0, g));
  CHECK(distinct.size() <= static_cast<std::size_t>(p.n_blobs));

  SynthParams flat;
  flat.n_blobs = 1;
  flat.static_field = true;
  const auto s = synth_nature_run(5, flat);
  const int v0 = s.at(0, 0);
  for (auto v : s.values) CHECK(v == v0);
}

TEST_CASE("region grid covers the extent") {
  const auto g = region_grid(23.81, 90.41, 80.0, 4.0);
  CHECK(g.size() == 400);
  double lat_min = 90, lat_max = -90;
  for (const auto& p : g) {
    lat_min = std::min(lat_min, p.lat_deg);
    lat_max = std::max(lat_max, p.lat_deg);
  }
  CHECK((lat_max - lat_min) * kPi / 180 * kEarthRadiusKm == doctest::Approx(76.0).epsilon(0.01));
}

TEST_CASE("observation log bookkeeping") {
  ObservationLog log;
  log.add(3, 1, 100.0);
  log.add(3, 2, 50.0);
  log.add(5, 1, 70.0);
  CHECK(log.size() == 3);
  CHECK(log.n_seen(3) == 2);
  CHECK(log.n_seen(4) == 0);
  CHECK(*log.last_seen(3) == 100.0);
  CHECK_FALSE(log.last_seen(4));
  CHECK(log.n_seen_before(3, 100.0) == 1);
  CHECK(log.n_seen_before(3, 100.1) == 2);
  CHECK(log.within_window(3, 120.0, 900.0));
  CHECK_FALSE(log.within_window(3, 1000.0, 900.0));
  CHECK(log.within_window(3, 949.0, 900.0));
  CHECK(log.contains(5, 1, 70.0));
  CHECK_FALSE(log.contains(5, 2, 70.0));
  CHECK(log.observed_gps() == std::vector<int>{3, 5});
  const auto obs = log.observers(3);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].t <= obs[1].t);

  ObservationLog other;
  other.add(3, 1, 100.0);
  other.add(7, 4, 10.0);
  log.merge(other);
  CHECK(log.n_seen(3) == 2);
  CHECK(log.n_seen(7) == 1);
}

TEST_CASE("recomputed value rules") {
  const NatureField nf({single(200)});
  KnowledgeState know;
  ObservationLog log;
  CHECK(recompute_value(0, 5000.0, nf, log, know) == 200.0);

  log.add(0, 1, 5000.0 - 600.0);
  CHECK(recompute_value(0, 5000.0, nf, log, know) == 0.0);

  ObservationLog four;
  for (int i = 0; i < 4; ++i) four.add(0, i, 100.0 + i);
  CHECK(recompute_value(0, 3700.0, nf, four, know) == 50.0);

  ValueParams inc;
  inc.count_includes_current = true;
  CHECK(recompute_value(0, 3700.0, nf, four, know, inc) == 40.0);

  // Non-increasing in the number of earlier sightings.
  ObservationLog grow;
  double prev = recompute_value(0, 20000.0, nf, grow, know);
  for (int i = 0; i < 10; ++i) {
    grow.add(0, 0, 100.0 * i);
    const double v = recompute_value(0, 20000.0, nf, grow, know);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("stale model parameters freeze the believed frame") {
  NatureRun r = single(1, 1, 3);
  r.values = {10, 20, 30};
  const NatureField nf({r});
  KnowledgeState know;
  know.region_model_time = {0.0};
  const ValueModel vm(nf, {});
  CHECK(vm.base(0, 2000.0, know) == 10.0);
  know.ingest_model_params(0, 950.0);
  CHECK(vm.base(0, 2000.0, know) == 20.0);
  know.ingest_model_params(0, 100.0);
  CHECK(know.believed_time(0, 2000.0) == 950.0);
  CHECK(know.believed_time(0, 500.0) == 500.0);
}

TEST_CASE("distance decay") {
  NatureRun r = single(100, 2);
  r.grid[1].lat_deg = 8.0 / (kEarthRadiusKm * kPi / 180.0);
  const NatureField nf({r});
  ObservationLog log;
  CHECK(distance_decay_value(0, 10.0, nf, log) == 100.0);
  log.add(1, 0, 5.0);
  CHECK(distance_decay_value(0, 10.0, nf, log, 16.0) == doctest::Approx(50.0));
  CHECK(distance_decay_value(1, 10.0, nf, log) == 0.0);
  CHECK(distance_decay_value(0, 1.0, nf, log) == 100.0);
  CHECK(distance_fraction(0, 10.0, nf, log, 4.0) == 1.0);
}

TEST_CASE("per-satellite noise levels") {
  std::set<double> seen;
  for (int s = 0; s < 24; ++s) {
    const double a = assign_satellite_noise(s, 9);
    CHECK(a == assign_satellite_noise(s, 9));
    CHECK(a >= 0.02);
    CHECK(a <= 0.08);
    seen.insert(a);
  }
  CHECK(seen.size() == 24);
  for (std::uint64_t seed = 1; seed < 50; ++seed) {
    bool changed = false;
    for (int s = 0; s < 24; ++s)
      changed = changed || assign_satellite_noise(s, seed) != assign_satellite_noise(s, seed + 1);
    CHECK(changed);
  }
}

TEST_CASE("noise draws are normal and bounded") {
  const NatureField nf({single(128)});
  const ValueModel vm(nf, {});
  KnowledgeState know;
  know.sigma = 0.05;
  know.seed = 77;
  const int n = 1000000;
  int beyond = 0;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = keyed_normal(77, i % 24, i / 24, 5.0 * (i % 1000));
    sum += z;
    sq += z * z;
    const double v = vm.base(0, 5.0 * i, know);
    if (std::abs(v / 128.0 - 1.0) > 4 * know.sigma) ++beyond;
  }
  CHECK(beyond < n / 10000);
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(keyed_normal(1, 2, 3, 4.0) == keyed_normal(1, 2, 3, 4.0));
  CHECK(keyed_normal(1, 2, 3, 4.0) != keyed_normal(1, 2, 3, 5.0));

  know.sigma = 5.0;
  for (int i = 0; i < 1000; ++i) CHECK(vm.base(0, i, know) >= 0.0);
}

TEST_CASE("nature field indexing across regions") {
  const NatureField nf({single(10, 3), single(20, 2)});
  CHECK(nf.num_gp() == 5);
  CHECK(nf.num_regions() == 2);
  CHECK(nf.first_gp(1) == 3);
  CHECK(nf.region_of(4) == 1);
  CHECK(nf.absval(4, 0.0) == 20);
  CHECK(nf.ground_points()[4].region == 1);
}
