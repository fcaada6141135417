#pragma once

// Bundle-layer store-and-forward simulation over a contact plan:
// earliest-arrival routing, priority queues, TTL expiry, next-hop discard.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "eosim/orbit.hpp"

namespace eosim::dtn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultBundleBits = 2000.0;

/// Time-to-live by priority: 1 -> 900 s, 2..3 -> 1800 s, 4..15 -> 3000 s.
double ttl_for_priority(int priority);

struct Bundle {
  std::uint64_t id = 0;
  int source = 0;
  int destination = 0;
  double size_bits = kDefaultBundleBits;
  int priority = 1;
  double t_created = 0.0;
  double ttl = 900.0;
  std::uint64_t payload_ref = 0;  // opaque to routing
  int next_hop_tag = -1;

  /// Bundle with ttl set from its priority.
  static Bundle make(std::uint64_t id, int source, int destination,
                     int priority, double t_created,
                     double size_bits = kDefaultBundleBits);
};

enum class Outcome { Delivered, DroppedTtl, Unroutable };
const char* to_string(Outcome o);

struct DeliveryRecord {
  std::uint64_t bundle_id = 0;
  Outcome outcome = Outcome::Delivered;
  int source = 0;
  int destination = 0;
  int priority = 1;
  double t_created = 0.0;
  double t_terminal = 0.0;  // delivery, drop or routing-failure time
  double latency = 0.0;     // delivered only
  std::uint64_t payload_ref = 0;
  std::vector<int> hops;    // nodes visited, source first
};

/// Contact plan indexed per directed link. Throws on overlapping contacts
/// of the same directed pair.
class ContactGraph {
 public:
  ContactGraph() = default;
  explicit ContactGraph(std::vector<Contact> plan);

  const std::vector<Contact>& contacts() const { return plan_; }
  int num_nodes() const { return n_nodes_; }
  /// Destinations reachable from `origin` and the contact indices per link,
  /// sorted by start time.
  const std::map<int, std::vector<std::size_t>>& links_from(int origin) const;
  /// Index of the contact on (origin, destination) open at t, if any.
  std::optional<std::size_t> open_contact(int origin, int destination,
                                          double t) const;

 private:
  std::vector<Contact> plan_;
  int n_nodes_ = 0;
  std::vector<std::map<int, std::vector<std::size_t>>> out_;
};

struct Route {
  std::vector<std::size_t> contacts;  // indices into the plan, in hop order
  double arrival = 0.0;
};

/// Earliest-arrival route from src to dst leaving no earlier than t_now.
/// A contact is usable if the transmission (size/rate) fits between
/// max(arrival, t_start) and t_end; propagation adds the contact range.
/// Routes arriving after `deadline` are rejected. nullopt = unroutable.
std::optional<Route> compute_route(const ContactGraph& graph, int src, int dst,
                                   double t_now, double size_bits,
                                   double deadline = kInf);

struct Transmission {
  std::size_t contact = 0;
  std::uint64_t bundle_id = 0;
  double start = 0.0;
  double end = 0.0;
  double bits = 0.0;
};

struct SimOptions {
  /// Every transmission is also overheard by all other nodes in contact
  /// with the sender; those copies carry a foreign next-hop tag and are
  /// discarded.
  bool overheard_copies = false;
};

/// Discrete-event engine. Bundles can be injected incrementally as long as
/// their creation time is not in the simulated past.
class Simulator {
 public:
  Simulator(ContactGraph graph, SimOptions opts = {});
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  void inject(const Bundle& b);
  /// Processes every event with time <= t.
  void run_until(double t);
  /// Runs until all injected bundles have a terminal record.
  void finish();

  double now() const;
  const std::vector<DeliveryRecord>& records() const;
  const std::vector<Transmission>& transmissions() const;
  std::size_t discarded_copies() const;
  const ContactGraph& graph() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<DeliveryRecord> simulate(std::span<const Bundle> traffic,
                                     std::span<const Contact> plan,
                                     const SimOptions& opts = {});

struct PriorityStats {
  int priority = 1;
  std::size_t delivered = 0;
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
  std::size_t dropped_ttl = 0;
  std::size_t unroutable = 0;
};

/// Linear-interpolation (type 7) quantile of an ascending sample.
double quantile(std::span<const double> sorted, double q);

/// Per-priority latency quartiles over delivered bundles plus drop counts,
/// ascending by priority. A priority with no deliveries keeps zeroed
/// quartiles and delivered == 0.
std::vector<PriorityStats> latency_stats(std::span<const DeliveryRecord> records);

std::vector<Bundle> read_traffic(std::istream& is);
void write_traffic(std::ostream& os, std::span<const Bundle> traffic);
void write_delivery_records(std::ostream& os,
                            std::span<const DeliveryRecord> records);
void write_latency_summary(std::ostream& os,
                           std::span<const PriorityStats> stats);

}  // namespace eosim::dtn
