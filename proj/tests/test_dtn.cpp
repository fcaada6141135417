#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "eosim/dtn.hpp"
#include "eosim/error.hpp"
#include "support.hpp"

using namespace eosim;
using namespace eosim::dtn;

namespace {

Contact link(double a, double b, int o, int d, double rate = 1000.0, double owlt = 0.0) {
  return {a, b, o, d, rate, owlt};
}

// Each transmission inside its contact and no two overlapping on one link.
void check_capacity(const Simulator& sim) {
  const auto& plan = sim.graph().contacts();
  std::map<std::pair<int, int>, std::vector<Transmission>> per_link;
  for (const auto& tx : sim.transmissions()) {
    const auto& c = plan[tx.contact];
    CHECK(tx.start >= c.t_start - 1e-9);
    CHECK(tx.end <= c.t_end + 1e-9);
    CHECK(tx.end - tx.start == doctest::Approx(tx.bits / c.data_rate_bps));
    per_link[{c.origin, c.destination}].push_back(tx);
  }
  for (auto& [key, txs] : per_link) {
    std::sort(txs.begin(), txs.end(),
              [](const Transmission& a, const Transmission& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < txs.size(); ++i) CHECK(txs[i].start >= txs[i - 1].end - 1e-9);
  }
}

}  // namespace

TEST_CASE("time to live by priority") {
  CHECK(ttl_for_priority(1) == 900.0);
  CHECK(ttl_for_priority(2) == 1800.0);
  CHECK(ttl_for_priority(3) == 1800.0);
  for (int p = 4; p <= 15; ++p) CHECK(ttl_for_priority(p) == 3000.0);
  CHECK_THROWS_AS(ttl_for_priority(0), Error);
  CHECK_THROWS_AS(ttl_for_priority(16), Error);
  const auto b = Bundle::make(7, 1, 2, 3, 10.0);
  CHECK(b.ttl == 1800.0);
  CHECK(b.size_bits == 2000.0);
}

TEST_CASE("routing matches exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto plan = testsupport::random_plan(rng, n, 1 + static_cast<int>(rng() % 20));
    const ContactGraph g(plan);
    const int src = static_cast<int>(rng() % n), dst = static_cast<int>(rng() % n);
    const double t0 = static_cast<double>(rng() % 60);
    const double bits = std::array<double, 3>{100.0, 2000.0, 5000.0}[rng() % 3];
    const double expect = testsupport::brute_force_arrival(plan, src, dst, t0, bits);
    const auto r = compute_route(g, src, dst, t0, bits);
    if (expect == testsupport::kInf) {
      CHECK_FALSE(r);
      continue;
    }
    REQUIRE(r);
    CHECK(r->arrival == expect);
    // The returned hops form a chain from src to dst.
    int at = src;
    for (auto c : r->contacts) {
      CHECK(plan[c].origin == at);
      at = plan[c].destination;
    }
    CHECK(at == dst);
  }
}

TEST_CASE("route corner cases") {
  const ContactGraph g({link(10, 20, 0, 1), link(30, 40, 1, 2, 1000, 0.5)});
  auto r = compute_route(g, 0, 2, 0.0, 2000.0);
  REQUIRE(r);
  CHECK(r->arrival == doctest::Approx(32.5));
  CHECK(compute_route(g, 0, 0, 5.0, 1.0)->arrival == 5.0);
  CHECK_FALSE(compute_route(g, 2, 0, 0.0, 1.0));
  CHECK_FALSE(compute_route(g, 0, 2, 0.0, 2000.0, 30.0));
  CHECK_FALSE(compute_route(g, 0, 1, 19.0, 2000.0));
  CHECK_FALSE(compute_route(g, 0, 9, 0.0, 1.0));
  CHECK_THROWS_AS(ContactGraph({link(0, 10, 0, 1), link(5, 15, 0, 1)}), Error);
  CHECK_THROWS_AS(ContactGraph({link(10, 0, 0, 1)}), Error);
}

TEST_CASE("uncongested single hop") {
  const double owlt = 6000.0 / kLightSpeedKmS;
  const std::vector<Contact> plan{link(0, 100, 0, 1, 1000.0, owlt)};
  const std::vector<Bundle> t{Bundle::make(1, 0, 1, 1, 10.0)};
  const auto rec = simulate(t, plan);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0].outcome == Outcome::Delivered);
  CHECK(std::abs(rec[0].latency - 2.02) < 1e-3);
  CHECK(rec[0].hops == std::vector<int>{0, 1});
}

TEST_CASE("priority order on a shared link") {
  const std::vector<Contact> plan{link(100, 200, 0, 1)};
  std::vector<Bundle> t;
  for (int i = 0; i < 5; ++i) t.push_back(Bundle::make(i, 0, 1, 5 - i, 0.0));
  const auto rec = simulate(t, plan);
  REQUIRE(rec.size() == 5);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(rec[i].priority == static_cast<int>(i) + 1);
    CHECK(rec[i].t_terminal == doctest::Approx(102.0 + 2.0 * i));
  }
}

TEST_CASE("expiry, unroutable and capacity limits") {
  // Link capacity 5 bundles; ttl 900 for priority 1.
  const std::vector<Contact> plan{link(800, 910, 0, 1, 100.0)};
  std::vector<Bundle> t;
  for (int i = 0; i < 8; ++i) t.push_back(Bundle::make(i, 0, 1, 1, 0.0));
  t.push_back(Bundle::make(99, 1, 0, 1, 0.0));
  Simulator sim{ContactGraph(plan)};
  for (const auto& b : t) sim.inject(b);
  sim.finish();
  std::map<Outcome, int> count;
  for (const auto& r : sim.records()) {
    ++count[r.outcome];
    if (r.outcome == Outcome::Delivered) CHECK(r.latency <= 900.0);
  }
  CHECK(sim.records().size() == t.size());
  CHECK(count[Outcome::Unroutable] == 1);
  CHECK(count[Outcome::Delivered] == 5);
  CHECK(count[Outcome::DroppedTtl] == 3);
  check_capacity(sim);
}

TEST_CASE("multi-hop store and forward with overheard copies") {
  const std::vector<Contact> plan{link(0, 50, 0, 1), link(0, 50, 0, 2), link(60, 100, 1, 3),
                                  link(0, 50, 1, 0), link(0, 50, 2, 0)};
  Simulator sim(ContactGraph(plan), {true});
  sim.inject(Bundle::make(1, 0, 3, 2, 0.0));
  sim.finish();
  REQUIRE(sim.records().size() == 1);
  const auto& r = sim.records()[0];
  CHECK(r.outcome == Outcome::Delivered);
  CHECK(r.hops == std::vector<int>{0, 1, 3});
  CHECK(r.t_terminal == doctest::Approx(62.0));
  CHECK(sim.discarded_copies() == 1);
}

TEST_CASE("incremental injection") {
  Simulator sim(ContactGraph({link(0, 1000, 0, 1)}));
  sim.inject(Bundle::make(1, 0, 1, 1, 5.0));
  sim.run_until(100.0);
  CHECK(sim.records().size() == 1);
  CHECK_THROWS_AS(sim.inject(Bundle::make(2, 0, 1, 1, 50.0)), Error);
  CHECK_THROWS_AS(sim.inject(Bundle::make(1, 0, 1, 1, 150.0)), Error);
  Bundle bad = Bundle::make(3, 0, 1, 1, 150.0);
  bad.priority = 0;
  CHECK_THROWS_AS(sim.inject(bad), Error);
  sim.inject(Bundle::make(4, 0, 1, 1, 150.0));
  sim.finish();
  CHECK(sim.records().size() == 2);
}

TEST_CASE("random traffic keeps every invariant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Contact> plan;
    for (auto c : testsupport::random_plan(rng, 6, 20)) {
      c.t_end = c.t_start + (c.t_end - c.t_start) * 3;
      const bool clash = std::any_of(plan.begin(), plan.end(), [&](const Contact& o) {
        return o.origin == c.origin && o.destination == c.destination &&
               c.t_start < o.t_end && o.t_start < c.t_end;
      });
      if (!clash) plan.push_back(c);
    }
    Simulator sim{ContactGraph(plan)};
    std::vector<Bundle> traffic;
    for (int i = 0; i < 40; ++i) {
      auto b = Bundle::make(i, rng() % 6, rng() % 6, 1 + rng() % 15, rng() % 100, 500.0);
      b.ttl = 20.0 + rng() % 100;
      traffic.push_back(b);
    }
    std::sort(traffic.begin(), traffic.end(),
              [](const Bundle& a, const Bundle& b) { return a.t_created < b.t_created; });
    for (const auto& b : traffic) sim.inject(b);
    sim.finish();
    std::map<std::uint64_t, int> terminal;
    for (const auto& r : sim.records()) {
      ++terminal[r.bundle_id];
      if (r.outcome == Outcome::Delivered) CHECK(r.hops.back() == r.destination);
    }
    CHECK(terminal.size() == traffic.size());
    for (const auto& [id, n] : terminal) CHECK(n == 1);
    for (const auto& r : sim.records()) {
      const auto it = std::find_if(traffic.begin(), traffic.end(),
                                   [&](const Bundle& b) { return b.id == r.bundle_id; });
      if (r.outcome == Outcome::Delivered) CHECK(r.latency <= it->ttl);
    }
    check_capacity(sim);
  }
}

TEST_CASE("latency statistics") {
  const std::vector<double> s{1, 2, 3, 4};
  CHECK(quantile(s, 0.5) == 2.5);
  CHECK(quantile(s, 0.25) == 1.75);
  CHECK(quantile(s, 0.0) == 1.0);
  CHECK(quantile(s, 1.0) == 4.0);

  std::vector<DeliveryRecord> recs;
  for (int i = 1; i <= 5; ++i) {
    DeliveryRecord r;
    r.priority = 2;
    r.latency = i * 10.0;
    recs.push_back(r);
  }
  DeliveryRecord d;
  d.priority = 1;
  d.outcome = Outcome::DroppedTtl;
  recs.push_back(d);
  d.outcome = Outcome::Unroutable;
  recs.push_back(d);
  const auto st = latency_stats(recs);
  REQUIRE(st.size() == 2);
  CHECK(st[0].priority == 1);
  CHECK(st[0].delivered == 0);
  CHECK(st[0].dropped_ttl == 1);
  CHECK(st[0].unroutable == 1);
  CHECK(st[1].median == 30.0);
  CHECK(st[1].q25 == 20.0);
  CHECK(st[1].max == 50.0);
}

TEST_CASE("traffic and record files") {
  std::vector<Bundle> t{Bundle::make(1, 0, 3, 2, 12.5, 1645), Bundle::make(2, 4, 1, 9, 0.0)};
  std::stringstream ss;
  write_traffic(ss, t);
  const auto back = read_traffic(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].size_bits == 1645.0);
  CHECK(back[0].ttl == 1800.0);
  CHECK(back[1].priority == 9);
  CHECK(back[0].t_created == 12.5);

  std::istringstream bad("1,0,3,2000,1\n");
  CHECK_THROWS_AS(read_traffic(bad), Error);
  std::istringstream bad_prio("1,0,3,2000,0,5\n");
  CHECK_THROWS_AS(read_traffic(bad_prio), Error);

  const auto recs = simulate(t, std::vector<Contact>{link(0, 100, 0, 3)});
  std::ostringstream out;
  write_delivery_records(out, recs);
  CHECK(out.str().find("delivered") != std::string::npos);
  CHECK(out.str().find("unroutable") != std::string::npos);
}
