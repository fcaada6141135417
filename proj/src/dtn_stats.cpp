#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include "json.hpp"
#include <ostream>
#include <string>

#include "eosim/dtn.hpp"
#include "eosim/error.hpp"
#include "text_util.hpp"

namespace eosim::dtn {

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<PriorityStats> latency_stats(std::span<const DeliveryRecord> records) {
  std::map<int, std::vector<double>> latencies;
  std::map<int, PriorityStats> stats;
  for (const auto& r : records) {
    auto& s = stats[r.priority];
    s.priority = r.priority;
    switch (r.outcome) {
      case Outcome::Delivered: latencies[r.priority].push_back(r.latency); break;
      case Outcome::DroppedTtl: ++s.dropped_ttl; break;
      case Outcome::Unroutable: ++s.unroutable; break;
    }
  }
  std::vector<PriorityStats> out;
  for (auto& [p, s] : stats) {
    auto& lat = latencies[p];
    std::sort(lat.begin(), lat.end());
    s.delivered = lat.size();
    if (!lat.empty()) {
      s.min = lat.front();
      s.max = lat.back();
      s.q25 = quantile(lat, 0.25);
      s.median = quantile(lat, 0.5);
      s.q75 = quantile(lat, 0.75);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<Bundle> read_traffic(std::istream& is) {
  std::vector<Bundle> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (text::skippable(line)) continue;
    const auto f = text::split(line, ',');
    const auto where = " at line " + std::to_string(lineno);
    if (f.size() != 6)
      throw Error(ErrorKind::MalformedHeader, "traffic: expected 6 fields" + where);
    const auto id = text::parse<std::uint64_t>(f[0]);
    const auto src = text::parse<int>(f[1]), dst = text::parse<int>(f[2]);
    const auto size = text::parse<double>(f[3]);
    const auto prio = text::parse<int>(f[4]);
    const auto t = text::parse<double>(f[5]);
    if (!id || !src || !dst || !size || !prio || !t)
      throw Error(ErrorKind::BadNumber, "traffic: bad number" + where);
    if (*prio < 1 || *prio > kMaxPriority || !(*size > 0.0))
      throw Error(ErrorKind::ValueOutOfRange, "traffic: invalid bundle" + where);
    out.push_back(Bundle::make(*id, *src, *dst, *prio, *t, *size));
  }
  return out;
}

void write_traffic(std::ostream& os, std::span<const Bundle> traffic) {
  os << "# bundle_id,source,destination,size_bits,priority,t_created\n";
  for (const auto& b : traffic)
    os << b.id << ',' << b.source << ',' << b.destination << ','
       << text::fmt(b.size_bits) << ',' << b.priority << ','
       << text::fmt(b.t_created) << '\n';
}

void write_delivery_records(std::ostream& os,
                            std::span<const DeliveryRecord> records) {
  os << "# bundle_id,source,destination,priority,t_created,outcome,t_terminal,"
        "latency_s,hops\n";
  for (const auto& r : records) {
    os << r.bundle_id << ',' << r.source << ',' << r.destination << ','
       << r.priority << ',' << text::fmt(r.t_created) << ',' << to_string(r.outcome)
       << ',' << text::fmt(r.t_terminal) << ',' << text::fmt(r.latency) << ',';
    for (std::size_t i = 0; i < r.hops.size(); ++i)
      os << (i ? ";" : "") << r.hops[i];
    os << '\n';
  }
}

void write_latency_summary(std::ostream& os,
                           std::span<const PriorityStats> stats) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : stats) {
    j.push_back({{"priority", s.priority},
                 {"delivered", s.delivered},
                 {"min_s", s.min},
                 {"q25_s", s.q25},
                 {"median_s", s.median},
                 {"q75_s", s.q75},
                 {"max_s", s.max},
                 {"dropped_ttl", s.dropped_ttl},
                 {"unroutable", s.unroutable}});
  }
  os << j.dump(2) << '\n';
}

}  // namespace eosim::dtn
