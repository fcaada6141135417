#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>

#include "eosim/dtn.hpp"
#include "eosim/error.hpp"

namespace eosim::dtn {

namespace {

// Same-instant ordering: arrivals settle before new traffic, contact closings
// before openings, and expiry timers last so a bundle aged exactly ttl may
// still move.
enum class EventKind : int {
  Arrival = 0,
  Inject = 1,
  ContactEnd = 2,
  ContactStart = 3,
  LinkFree = 4,
  Expiry = 5,
};

struct Event {
  double t;
  EventKind kind;
  int node;
  std::uint64_t bundle;
  std::size_t ref;  // contact index or link id
  std::uint64_t seq;
  int tag = -1;     // next-hop extension block carried by an arrival

  bool operator>(const Event& o) const {
    if (t != o.t) return t > o.t;
    if (kind != o.kind) return kind > o.kind;
    if (node != o.node) return node > o.node;
    if (bundle != o.bundle) return bundle > o.bundle;
    return seq > o.seq;
  }
};

enum class BundleState { Pending, Queued, Limbo, InFlight, Done };

struct Entry {
  Bundle b;
  BundleState state = BundleState::Pending;
  int node = 0;
  std::size_t link = 0;
  std::vector<int> hops;
};

struct QueueKey {
  int priority;
  double t_created;
  std::uint64_t id;
  bool operator<(const QueueKey& o) const {
    if (priority != o.priority) return priority < o.priority;
    if (t_created != o.t_created) return t_created < o.t_created;
    return id < o.id;
  }
};

struct Link {
  int origin;
  int destination;
  std::set<QueueKey> queue;
  double busy_until = -kInf;
};

}  // namespace

struct Simulator::Impl {
  ContactGraph graph;
  SimOptions opts;
  double now = -kInf;
  std::uint64_t seq = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::unordered_map<std::uint64_t, Entry> bundles;
  std::vector<Link> links;
  std::map<std::pair<int, int>, std::size_t> link_index;
  std::vector<DeliveryRecord> records;
  std::vector<Transmission> transmissions;
  std::size_t discarded = 0;

  Impl(ContactGraph g, SimOptions o) : graph(std::move(g)), opts(o) {
    const auto& plan = graph.contacts();
    for (std::size_t i = 0; i < plan.size(); ++i) {
      link_of(plan[i].origin, plan[i].destination);
      push({plan[i].t_start, EventKind::ContactStart, plan[i].origin, 0, i, 0});
      push({plan[i].t_end, EventKind::ContactEnd, plan[i].origin, 0, i, 0});
    }
  }

  void push(Event e, int tag = -1) {
    e.seq = seq++;
    e.tag = tag;
    events.push(e);
  }

  std::size_t link_of(int o, int d) {
    auto [it, inserted] = link_index.try_emplace({o, d}, links.size());
    if (inserted) links.push_back({o, d, {}, -kInf});
    return it->second;
  }

  void terminate(Entry& e, Outcome outcome, double t) {
    e.state = BundleState::Done;
    DeliveryRecord r;
    r.bundle_id = e.b.id;
    r.outcome = outcome;
    r.source = e.b.source;
    r.destination = e.b.destination;
    r.priority = e.b.priority;
    r.t_created = e.b.t_created;
    r.t_terminal = t;
    r.latency = outcome == Outcome::Delivered ? t - e.b.t_created : 0.0;
    r.payload_ref = e.b.payload_ref;
    r.hops = e.hops;
    records.push_back(std::move(r));
  }

  bool expired(const Entry& e, double t) const {
    return t - e.b.t_created > e.b.ttl;
  }

  // Picks the next hop from `node` and queues the bundle there; returns
  // false when no route reaches the destination before expiry.
  bool forward(Entry& e, int node, double t) {
    const auto route = compute_route(graph, node, e.b.destination, t,
                                     e.b.size_bits, e.b.t_created + e.b.ttl);
    if (!route || route->contacts.empty()) {
      e.state = BundleState::Limbo;
      e.node = node;
      return false;
    }
    const auto& first = graph.contacts()[route->contacts.front()];
    e.b.next_hop_tag = first.destination;
    e.node = node;
    e.state = BundleState::Queued;
    e.link = link_of(node, first.destination);
    links[e.link].queue.insert({e.b.priority, e.b.t_created, e.b.id});
    try_transmit(e.link, t);
    return true;
  }

  void try_transmit(std::size_t li, double t) {
    Link& link = links[li];
    if (link.busy_until > t) return;
    const auto c_idx = graph.open_contact(link.origin, link.destination, t);
    if (!c_idx) return;
    const Contact& c = graph.contacts()[*c_idx];
    while (!link.queue.empty()) {
      const QueueKey head = *link.queue.begin();
      Entry& e = bundles.at(head.id);
      if (expired(e, t)) {
        link.queue.erase(link.queue.begin());
        terminate(e, Outcome::DroppedTtl, t);
        continue;
      }
      const double tx = e.b.size_bits / c.data_rate_bps;
      if (t + tx > c.t_end) return;  // waits for a later contact
      link.queue.erase(link.queue.begin());
      e.state = BundleState::InFlight;
      link.busy_until = t + tx;
      transmissions.push_back({*c_idx, e.b.id, t, t + tx, e.b.size_bits});
      push({t + tx, EventKind::LinkFree, link.origin, 0, li, 0});
      push({t + tx + c.range_light_seconds, EventKind::Arrival, link.destination,
            e.b.id, 0, 0},
           e.b.next_hop_tag);
      if (opts.overheard_copies) {
        // Every other node in view receives a copy tagged for someone else.
        for (const auto& [other, idx] : graph.links_from(link.origin)) {
          (void)idx;
          if (other == link.destination) continue;
          if (const auto oc = graph.open_contact(link.origin, other, t))
            push({t + tx + graph.contacts()[*oc].range_light_seconds,
                  EventKind::Arrival, other, e.b.id, 0, 0},
                 e.b.next_hop_tag);
        }
      }
      return;
    }
  }

  void on_inject(Entry& e, double t) {
    e.hops = {e.b.source};
    if (expired(e, t) || e.b.ttl <= 0.0) {
      terminate(e, Outcome::DroppedTtl, t);
      return;
    }
    if (e.b.source == e.b.destination) {
      terminate(e, Outcome::Delivered, t);
      return;
    }
    if (!forward(e, e.b.source, t)) {
      terminate(e, Outcome::Unroutable, t);
      return;
    }
    push({e.b.t_created + e.b.ttl, EventKind::Expiry, e.b.source, e.b.id, 0, 0});
  }

  void on_arrival(Entry& e, int node, int tag, double t) {
    if (tag != node || e.state != BundleState::InFlight) {
      ++discarded;
      return;
    }
    e.hops.push_back(node);
    if (expired(e, t)) {
      terminate(e, Outcome::DroppedTtl, t);
      return;
    }
    if (node == e.b.destination) {
      terminate(e, Outcome::Delivered, t);
      return;
    }
    forward(e, node, t);  // limbo until expiry when no route remains
  }

  void on_contact_end(std::size_t ci, double t) {
    const Contact& c = graph.contacts()[ci];
    const std::size_t li = link_of(c.origin, c.destination);
    if (graph.open_contact(c.origin, c.destination, t)) return;
    // Whatever missed this window gets a fresh route from here.
    std::vector<std::uint64_t> stranded;
    for (const auto& k : links[li].queue) stranded.push_back(k.id);
    links[li].queue.clear();
    for (auto id : stranded) {
      Entry& e = bundles.at(id);
      if (expired(e, t)) {
        terminate(e, Outcome::DroppedTtl, t);
        continue;
      }
      forward(e, c.origin, t);
    }
  }

  void on_expiry(Entry& e, double t) {
    if (e.state == BundleState::Queued) {
      links[e.link].queue.erase({e.b.priority, e.b.t_created, e.b.id});
      terminate(e, Outcome::DroppedTtl, t);
    } else if (e.state == BundleState::Limbo) {
      terminate(e, Outcome::DroppedTtl, t);
    }
    // In flight: the arrival check handles it.
  }

  void step(const Event& ev) {
    now = ev.t;
    switch (ev.kind) {
      case EventKind::Inject: on_inject(bundles.at(ev.bundle), ev.t); break;
      case EventKind::Arrival: on_arrival(bundles.at(ev.bundle), ev.node, ev.tag, ev.t); break;
      case EventKind::ContactStart: {
        const Contact& c = graph.contacts()[ev.ref];
        try_transmit(link_of(c.origin, c.destination), ev.t);
        break;
      }
      case EventKind::ContactEnd: on_contact_end(ev.ref, ev.t); break;
      case EventKind::LinkFree: try_transmit(ev.ref, ev.t); break;
      case EventKind::Expiry: on_expiry(bundles.at(ev.bundle), ev.t); break;
    }
  }
};

Simulator::Simulator(ContactGraph graph, SimOptions opts)
    : impl_(std::make_unique<Impl>(std::move(graph), opts)) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::inject(const Bundle& b) {
  if (b.t_created < impl_->now)
    throw Error(ErrorKind::InvalidArgument,
                "bundle " + std::to_string(b.id) + " created in the simulated past");
  if (b.priority < 1 || b.priority > kMaxPriority)
    throw Error(ErrorKind::ValueOutOfRange, "bundle priority must lie in [1, 15]");
  if (!(b.size_bits > 0.0))
    throw Error(ErrorKind::InvalidArgument, "bundle size must be > 0");
  auto [it, inserted] = impl_->bundles.try_emplace(b.id);
  if (!inserted)
    throw Error(ErrorKind::InvalidArgument,
                "duplicate bundle id " + std::to_string(b.id));
  it->second.b = b;
  impl_->push({b.t_created, EventKind::Inject, b.source, b.id, 0, 0});
}

void Simulator::run_until(double t) {
  while (!impl_->events.empty() && impl_->events.top().t <= t) {
    const Event ev = impl_->events.top();
    impl_->events.pop();
    impl_->step(ev);
  }
  impl_->now = std::max(impl_->now, t);
}

void Simulator::finish() {
  while (!impl_->events.empty()) {
    const Event ev = impl_->events.top();
    impl_->events.pop();
    impl_->step(ev);
  }
}

double Simulator::now() const { return impl_->now; }
const std::vector<DeliveryRecord>& Simulator::records() const { return impl_->records; }
const std::vector<Transmission>& Simulator::transmissions() const {
  return impl_->transmissions;
}
std::size_t Simulator::discarded_copies() const { return impl_->discarded; }
const ContactGraph& Simulator::graph() const { return impl_->graph; }

std::vector<DeliveryRecord> simulate(std::span<const Bundle> traffic,
                                     std::span<const Contact> plan,
                                     const SimOptions& opts) {
  Simulator sim(ContactGraph({plan.begin(), plan.end()}), opts);
  std::vector<Bundle> sorted(traffic.begin(), traffic.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Bundle& a, const Bundle& b) { return a.t_created < b.t_created; });
  for (const auto& b : sorted) sim.inject(b);
  sim.finish();
  return sim.records();
}

}  // namespace eosim::dtn
