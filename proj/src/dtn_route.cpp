#include <algorithm>
#include <queue>
#include <string>

#include "eosim/dtn.hpp"
#include "eosim/error.hpp"

namespace eosim::dtn {

double ttl_for_priority(int priority) {
  if (priority < 1 || priority > kMaxPriority)
    throw Error(ErrorKind::ValueOutOfRange,
                "bundle priority must lie in [1, 15], got " +
                    std::to_string(priority));
  if (priority == 1) return 900.0;
  if (priority <= 3) return 1800.0;
  return 3000.0;
}

Bundle Bundle::make(std::uint64_t id, int source, int destination,
                    int priority, double t_created, double size_bits) {
  Bundle b;
  b.id = id;
  b.source = source;
  b.destination = destination;
  b.priority = priority;
  b.t_created = t_created;
  b.size_bits = size_bits;
  b.ttl = ttl_for_priority(priority);
  return b;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Delivered: return "delivered";
    case Outcome::DroppedTtl: return "dropped_ttl";
    case Outcome::Unroutable: return "unroutable";
  }
  return "unknown";
}

ContactGraph::ContactGraph(std::vector<Contact> plan) : plan_(std::move(plan)) {
  for (const auto& c : plan_) {
    if (c.origin < 0 || c.destination < 0 || c.origin == c.destination ||
        !(c.t_start < c.t_end) || !(c.data_rate_bps > 0.0) ||
        c.range_light_seconds < 0.0)
      throw Error(ErrorKind::InvalidArgument, "malformed contact in plan");
    n_nodes_ = std::max({n_nodes_, c.origin + 1, c.destination + 1});
  }
  out_.resize(n_nodes_);
  for (std::size_t i = 0; i < plan_.size(); ++i)
    out_[plan_[i].origin][plan_[i].destination].push_back(i);
  for (auto& links : out_) {
    for (auto& [dst, idx] : links) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return plan_[a].t_start < plan_[b].t_start;
      });
      for (std::size_t k = 1; k < idx.size(); ++k) {
        if (plan_[idx[k]].t_start < plan_[idx[k - 1]].t_end)
          throw Error(ErrorKind::InvalidArgument,
                      "overlapping contacts on link " +
                          std::to_string(plan_[idx[k]].origin) + "->" +
                          std::to_string(dst));
      }
    }
  }
}

const std::map<int, std::vector<std::size_t>>& ContactGraph::links_from(
    int origin) const {
  static const std::map<int, std::vector<std::size_t>> empty;
  if (origin < 0 || origin >= n_nodes_) return empty;
  return out_[origin];
}

std::optional<std::size_t> ContactGraph::open_contact(int origin,
                                                      int destination,
                                                      double t) const {
  const auto& links = links_from(origin);
  auto it = links.find(destination);
  if (it == links.end()) return std::nullopt;
  const auto& idx = it->second;
  // Last contact starting at or before t.
  auto pos = std::upper_bound(idx.begin(), idx.end(), t,
                              [&](double x, std::size_t i) {
                                return x < plan_[i].t_start;
                              });
  if (pos == idx.begin()) return std::nullopt;
  const std::size_t c = *(pos - 1);
  if (t < plan_[c].t_end) return c;
  return std::nullopt;
}

std::optional<Route> compute_route(const ContactGraph& graph, int src, int dst,
                                   double t_now, double size_bits,
                                   double deadline) {
  if (src == dst) return Route{{}, t_now};
  const int n = graph.num_nodes();
  if (src < 0 || dst < 0 || src >= n || dst >= n) return std::nullopt;
  const auto& plan = graph.contacts();

  std::vector<double> arrival(n, kInf);
  std::vector<std::ptrdiff_t> via(n, -1);
  std::vector<char> settled(n, 0);
  using Label = std::pair<double, int>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> open;
  arrival[src] = t_now;
  open.push({t_now, src});

  while (!open.empty()) {
    const auto [t_u, u] = open.top();
    open.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    if (u == dst) break;
    for (const auto& [v, idx] : graph.links_from(u)) {
      if (settled[v]) continue;
      // Contacts on a link are disjoint and sorted, so ends are sorted too.
      auto first = std::lower_bound(idx.begin(), idx.end(), t_u,
                                    [&](std::size_t i, double x) {
                                      return plan[i].t_end < x;
                                    });
      double best = arrival[v];
      std::ptrdiff_t best_c = -1;
      for (auto it = first; it != idx.end(); ++it) {
        const Contact& c = plan[*it];
        if (c.t_start >= best) break;
        const double tx = size_bits / c.data_rate_bps;
        const double depart = std::max(t_u, c.t_start);
        if (depart + tx > c.t_end) continue;
        const double arr = depart + tx + c.range_light_seconds;
        if (arr < best) {
          best = arr;
          best_c = static_cast<std::ptrdiff_t>(*it);
        }
      }
      if (best_c >= 0 && best <= deadline) {
        arrival[v] = best;
        via[v] = best_c;
        open.push({best, v});
      }
    }
  }
  if (!settled[dst] || arrival[dst] > deadline) return std::nullopt;

  Route r;
  r.arrival = arrival[dst];
  for (int v = dst; v != src;) {
    const auto c = static_cast<std::size_t>(via[v]);
    r.contacts.push_back(c);
    v = plan[c].origin;
  }
  std::reverse(r.contacts.begin(), r.contacts.end());
  return r;
}

}  // namespace eosim::dtn
