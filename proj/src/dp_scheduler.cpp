#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "eosim/error.hpp"
#include "eosim/scheduler.hpp"

namespace eosim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;
constexpr int kRoot = -1;

bool whole_multiple(double x, double unit) {
  const double q = x / unit;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}

// Persistent 16-ary trie over ground-point indices. Every DP node owns a
// version holding, per gp, how often its path observed it and when last.
class PathIndex {
 public:
  explicit PathIndex(int n_gp) {
    while ((1LL << (kBits * (levels_ + 1))) < std::max(1, n_gp)) ++levels_;
    inner_.push_back({});
    leaves_.push_back({});
    for (auto& s : leaves_[0]) s = {0, kNegInf};
  }

  int insert(int root, int gp, double t) { return insert(root, levels_, gp, t); }

  std::pair<int, double> lookup(int root, int gp) const {
    int cur = root;
    for (int lvl = levels_; lvl > 0 && cur != 0; --lvl)
      cur = inner_[cur][(gp >> (kBits * lvl)) & kMask];
    const Slot& s = leaves_[cur][gp & kMask];
    return {s.count, s.last};
  }

 private:
  static constexpr int kBits = 4;
  static constexpr int kFan = 1 << kBits;
  static constexpr int kMask = kFan - 1;
  struct Slot {
    int count;
    double last;
  };

  int insert(int cur, int lvl, int gp, double t) {
    if (lvl == 0) {
      std::array<Slot, kFan> copy = leaves_[cur];
      Slot& s = copy[gp & kMask];
      s.count += 1;
      s.last = std::max(s.last, t);
      leaves_.push_back(copy);
      return static_cast<int>(leaves_.size()) - 1;
    }
    std::array<int, kFan> copy = inner_[cur];
    const int d = (gp >> (kBits * lvl)) & kMask;
    copy[d] = insert(copy[d], lvl - 1, gp, t);
    inner_.push_back(copy);
    return static_cast<int>(inner_.size()) - 1;
  }

  int levels_ = 0;
  std::vector<std::array<int, kFan>> inner_;
  std::vector<std::array<Slot, kFan>> leaves_;
};

struct Node {
  int gp;
  int step;
  double V;
  double own;
  double alpha;
  double slew;
  int parent;
  int index_root;
};

// One ordering of the overlap set: the others placed ahead of this
// satellite keep their predicted claims, the rest yield theirs.
struct Ordering {
  int extra_n = 0;
  bool extra_window = false;
  double loss = 0.0;
};

struct Shadow {
  std::unordered_map<int, std::vector<std::pair<double, double>>> by_gp;
};

class Sweep {
 public:
  Sweep(const DpProblem& pb, const DpOptions& opts, DpCounters& counters)
      : pb_(pb), opts_(opts), C_(counters), access_(*pb.access),
        values_(*pb.values), know_(*pb.knowledge),
        window_(values_.params().zero_window_s),
        distance_mode_(values_.params().mode == ValueMode::Distance),
        index_(static_cast<int>(access_.gp_ecef_all().size())) {}

  SchedulePath run();

 private:
  int first_step() const;
  double value_given(double base, int n, bool window, int path_n,
                     double path_last, double t) const;
  double own_value(int pred, int g, double t, double base, int n_log,
                   bool win_log, double f_log,
                   const std::vector<Ordering>& orders) const;
  double path_distance_km(int pred, int g) const;
  bool feasible(int pred, int g, int step, double& alpha, double& slew) const;
  const Shadow& shadow_of(int other);
  std::vector<Ordering> orderings(int g, int step, double t);

  double pred_V(int p) const { return p == kRoot ? 0.0 : nodes_[p].V; }
  int pred_root(int p) const { return p == kRoot ? 0 : nodes_[p].index_root; }

  const DpProblem& pb_;
  const DpOptions& opts_;
  DpCounters& C_;
  const AccessTable& access_;
  const ValueModel& values_;
  const KnowledgeState& know_;
  double window_;
  bool distance_mode_;
  PathIndex index_;
  std::vector<Node> nodes_;
  std::map<int, Shadow> shadows_;
  int first_ = 0;
  int end_ = 0;
};

int Sweep::first_step() const {
  return static_cast<int>(std::ceil(pb_.clock.t_plan / access_.dt() - 1e-9));
}

double Sweep::value_given(double base, int n, bool window, int path_n,
                          double path_last, double t) const {
  if (window || path_last > t - window_) return 0.0;
  return base / values_.divisor(n + path_n);
}

double Sweep::path_distance_km(int pred, int g) const {
  const auto gps = values_.nature().ground_points();
  const auto& p = gps[g];
  double best = std::numeric_limits<double>::infinity();
  for (int i = pred; i != kRoot; i = nodes_[i].parent) {
    const auto& q = gps[nodes_[i].gp];
    best = std::min(best, nodes_[i].gp == g ? 0.0
                                            : ground_distance_km(p.lat_deg, p.lon_deg,
                                                                 q.lat_deg, q.lon_deg));
  }
  return best;
}

double Sweep::own_value(int pred, int g, double t, double base, int n_log,
                        bool win_log, double f_log,
                        const std::vector<Ordering>& orders) const {
  if (distance_mode_) {
    double f = f_log;
    if (pred != kRoot) {
      const double d_ref = values_.params().distance_ref_km;
      if (d_ref > 0.0) f = std::min(f, path_distance_km(pred, g) / d_ref);
    }
    return base * f;
  }
  int path_n = 0;
  double path_last = kNegInf;
  if (pred != kRoot) std::tie(path_n, path_last) = index_.lookup(pred_root(pred), g);
  if (orders.empty()) return value_given(base, n_log, win_log, path_n, path_last, t);
  double best = kNegInf;
  for (const auto& o : orders)
    best = std::max(best, value_given(base, n_log + o.extra_n, win_log || o.extra_window,
                                      path_n, path_last, t) -
                              o.loss);
  return best;
}

bool Sweep::feasible(int pred, int g, int step, double& alpha,
                     double& slew) const {
  int gp_from, step_from;
  if (pred == kRoot) {
    if (!pb_.anchor) {
      alpha = slew = 0.0;
      return true;
    }
    gp_from = pb_.anchor->gp;
    step_from = pb_.anchor->step;
  } else {
    gp_from = nodes_[pred].gp;
    step_from = nodes_[pred].step;
  }
  alpha = slew_angle_deg(access_.sat_ecef(pb_.sat, step_from),
                         access_.gp_ecef(gp_from), access_.gp_ecef(g));
  slew = opts_.slew.slew_time(alpha, opts_.k_sigma);
  return slew <= access_.time_of(step) - access_.time_of(step_from) + kFeasTol;
}

const Shadow& Sweep::shadow_of(int other) {
  auto it = shadows_.find(other);
  if (it != shadows_.end()) return it->second;
  DpProblem sp = pb_;
  sp.sat = other;
  sp.anchor.reset();
  DpOptions so = opts_;
  so.joint_overlap = false;
  so.stop_after_steps = end_ - first_;
  ++C_.shadow_plans;
  const SchedulePath path = dp_schedule(sp, so, &C_);
  Shadow sh;
  for (const auto& n : path.nodes) sh.by_gp[n.gp].push_back({n.t, n.value});
  return shadows_.emplace(other, std::move(sh)).first->second;
}

std::vector<Ordering> Sweep::orderings(int g, int step, double t) {
  if (!opts_.joint_overlap || distance_mode_ || opts_.max_overlap_set < 2) return {};
  auto others = sats_with_overlapping_for(access_, pb_.sat, g, step);
  if (others.empty()) return {};
  ++C_.overlap_nodes;
  // Earliest access to the point first.
  std::vector<std::pair<int, int>> by_start;
  for (int o : others) {
    int k = step;
    while (k > 0 && access_.is_visible(o, k - 1, g)) --k;
    by_start.push_back({k, o});
  }
  std::sort(by_start.begin(), by_start.end());
  const auto cap = static_cast<std::size_t>(opts_.max_overlap_set - 1);
  if (by_start.size() > cap) {
    ++C_.overlap_truncated;
    by_start.resize(cap);
  }

  struct Claims {
    int before = 0;            // predicted observations outside the window, earlier
    int before_in_window = 0;  // earlier and inside the window
    bool in_window = false;
    double window_value = 0.0;
  };
  std::vector<Claims> claims;
  for (const auto& [start, o] : by_start) {
    (void)start;
    const Shadow& sh = shadow_of(o);
    Claims c;
    if (auto it = sh.by_gp.find(g); it != sh.by_gp.end()) {
      for (const auto& [to, v] : it->second) {
        const bool inside = std::abs(to - t) < window_;
        if (inside) {
          c.in_window = true;
          c.window_value += v;
          if (to < t) ++c.before_in_window;
        } else if (to < t) {
          ++c.before;
        }
      }
    }
    claims.push_back(c);
  }

  const std::size_t k = claims.size();
  std::vector<Ordering> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    Ordering o;
    for (std::size_t i = 0; i < k; ++i) {
      const Claims& c = claims[i];
      o.extra_n += c.before;
      if (mask & (std::size_t{1} << i)) {
        o.extra_n += c.before_in_window;
        o.extra_window = o.extra_window || c.in_window;
      } else {
        o.loss += c.window_value;
      }
    }
    out.push_back(o);
  }
  return out;
}

SchedulePath Sweep::run() {
  if (!pb_.access || !pb_.values || !pb_.knowledge)
    throw Error(ErrorKind::InvalidArgument, "dp_schedule: incomplete problem");
  if (pb_.sat < 0 || pb_.sat >= access_.num_sats())
    throw Error(ErrorKind::InvalidArgument, "dp_schedule: unknown satellite");
  if (std::abs(pb_.clock.dt_step_s - access_.dt()) > 1e-9)
    throw Error(ErrorKind::Config,
                "dp_schedule: clock step differs from the access table step");
  if (pb_.anchor && (pb_.anchor->step < 0 || pb_.anchor->step >= access_.num_steps()))
    throw Error(ErrorKind::InvalidArgument, "dp_schedule: anchor outside the table");

  const SlewBand band = slew_band(opts_.slew, access_.dt(), opts_.alpha_max_deg,
                                  opts_.k_sigma);
  first_ = std::max(0, first_step());
  end_ = std::min(access_.num_steps(), first_ + pb_.clock.horiz_tsteps());
  if (opts_.stop_after_steps >= 0) end_ = std::min(end_, first_ + opts_.stop_after_steps);

  SchedulePath result;
  result.sat = pb_.sat;
  if (end_ <= first_) return result;

  const ObservationLog& log = know_.log;
  const ObservationLog* extra = pb_.extra;
  const double d_ref = values_.params().distance_ref_km;

  std::vector<std::pair<std::size_t, std::size_t>> layer(end_ - first_, {0, 0});
  // Rank: value descending, then later step, then lower gp.
  auto ahead = [&](std::size_t a, std::size_t b) {
    const Node &x = nodes_[a], &y = nodes_[b];
    if (x.V != y.V) return x.V > y.V;
    if (x.step != y.step) return x.step > y.step;
    return x.gp < y.gp;
  };
  std::ptrdiff_t settled = -1;  // best node older than the band

  // Predecessors are drawn lazily in rank order from the sorted band layers,
  // the settled node and finally the root.
  struct Cursor {
    std::size_t pos, end;
  };
  std::vector<Cursor> band_layers, cur;
  std::vector<std::pair<double, std::size_t>> heap;  // exact value, draw order
  std::vector<int> drawn;
  auto heap_less = [](const std::pair<double, std::size_t>& a,
                      const std::pair<double, std::size_t>& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };

  for (int s = first_; s < end_; ++s) {
    const int old = s - band.n_max - 1;
    if (old >= first_) {
      const auto [b, e] = layer[old - first_];
      if (b < e && (settled < 0 || ahead(b, static_cast<std::size_t>(settled))))
        settled = static_cast<std::ptrdiff_t>(b);
    }
    const auto vis = access_.visible(pb_.sat, s);
    layer[s - first_] = {nodes_.size(), nodes_.size()};
    if (vis.empty()) continue;

    band_layers.clear();
    std::size_t n_preds = 1;
    for (int k = std::max(first_, s - band.n_max); k <= s - band.n_min; ++k) {
      const auto [b, e] = layer[k - first_];
      if (b < e) band_layers.push_back({b, e});
      n_preds += e - b;
    }
    if (settled >= 0) {
      band_layers.push_back({static_cast<std::size_t>(settled),
                             static_cast<std::size_t>(settled) + 1});
      ++n_preds;
    }

    const double t = access_.time_of(s);
    for (int g : vis) {
      ++C_.nodes_expanded;
      C_.band_slots += n_preds;

      const double base = values_.base(g, t, know_);
      int n_log = log.n_seen_before(g, t);
      bool win_log = log.within_window(g, t, window_);
      double f_log = 1.0;
      if (extra) {
        n_log += extra->n_seen_before(g, t);
        win_log = win_log || extra->within_window(g, t, window_);
      }
      if (distance_mode_) {
        f_log = distance_fraction(g, t, values_.nature(), log, d_ref);
        if (extra)
          f_log = std::min(f_log, distance_fraction(g, t, values_.nature(), *extra, d_ref));
      }
      const auto orders = orderings(g, s, t);
      const double own_ub =
          own_value(kRoot, g, t, base, n_log, win_log, f_log, orders);

      cur = band_layers;
      bool root_left = true;
      // Next predecessor in rank order; false once exhausted.
      auto draw = [&](int& out) {
        std::ptrdiff_t pick = -1;
        for (std::size_t i = 0; i < cur.size(); ++i) {
          if (cur[i].pos >= cur[i].end) continue;
          if (pick < 0 || ahead(cur[i].pos, cur[pick].pos)) pick = static_cast<std::ptrdiff_t>(i);
        }
        if (pick >= 0) {
          out = static_cast<int>(cur[pick].pos++);
          return true;
        }
        if (root_left) {
          root_left = false;
          out = kRoot;
          return true;
        }
        return false;
      };

      heap.clear();
      drawn.clear();
      int next = 0;
      bool have_next = draw(next);
      while (true) {
        const double ub_next = have_next ? pred_V(next) + own_ub : kNegInf;
        if (!heap.empty() && heap.front().first >= ub_next) {
          std::pop_heap(heap.begin(), heap.end(), heap_less);
          const auto [val, order] = heap.back();
          heap.pop_back();
          const int p = drawn[order];
          double alpha = 0.0, slew = 0.0;
          if (!feasible(p, g, s, alpha, slew)) continue;
          Node n;
          n.gp = g;
          n.step = s;
          n.V = val;
          n.own = val - pred_V(p);
          n.alpha = alpha;
          n.slew = slew;
          n.parent = p;
          n.index_root = distance_mode_ ? 0 : index_.insert(pred_root(p), g, t);
          nodes_.push_back(n);
          break;
        }
        if (!have_next) break;
        ++C_.candidates_evaluated;
        heap.push_back({pred_V(next) + own_value(next, g, t, base, n_log, win_log, f_log, orders),
                        drawn.size()});
        std::push_heap(heap.begin(), heap.end(), heap_less);
        drawn.push_back(next);
        have_next = draw(next);
      }
    }
    const std::size_t b = layer[s - first_].first;
    std::sort(nodes_.begin() + static_cast<std::ptrdiff_t>(b), nodes_.end(),
              [](const Node& x, const Node& y) {
                return x.V != y.V ? x.V > y.V : x.gp < y.gp;
              });
    layer[s - first_].second = nodes_.size();
  }

  if (nodes_.empty()) return result;
  int best = 0;
  for (int i = 1; i < static_cast<int>(nodes_.size()); ++i) {
    const Node &x = nodes_[i], &y = nodes_[best];
    if (x.V > y.V || (x.V == y.V && (x.step < y.step || (x.step == y.step && x.gp < y.gp))))
      best = i;
  }
  for (int i = best; i != kRoot; i = nodes_[i].parent) {
    const Node& n = nodes_[i];
    result.nodes.push_back({n.gp, access_.time_of(n.step), n.step, n.own, n.alpha, n.slew});
  }
  std::reverse(result.nodes.begin(), result.nodes.end());
  result.cumulative_value = nodes_[best].V;
  return result;
}

}  // namespace

int ScenarioClock::horiz_tsteps() const {
  return static_cast<int>(std::llround(planning_horizon_s / dt_step_s));
}

void ScenarioClock::validate() const {
  if (!(dt_step_s > 0.0))
    throw Error(ErrorKind::Config, "dt_step_s must be > 0");
  if (!(reschedule_period_s > 0.0))
    throw Error(ErrorKind::Config, "reschedule_period_s must be > 0");
  if (!(planning_horizon_s > 0.0))
    throw Error(ErrorKind::Config, "planning_horizon_s must be > 0");
  if (!whole_multiple(reschedule_period_s, dt_step_s))
    throw Error(ErrorKind::Config, "dt_step_s must divide reschedule_period_s");
  if (!whole_multiple(planning_horizon_s, dt_step_s))
    throw Error(ErrorKind::Config,
                "planning_horizon_s must be a whole number of scheduler steps");
}

DpCounters& DpCounters::operator+=(const DpCounters& o) {
  nodes_expanded += o.nodes_expanded;
  band_slots += o.band_slots;
  candidates_evaluated += o.candidates_evaluated;
  overlap_nodes += o.overlap_nodes;
  overlap_truncated += o.overlap_truncated;
  shadow_plans += o.shadow_plans;
  return *this;
}

SchedulePath dp_schedule(const DpProblem& problem, const DpOptions& opts,
                         DpCounters* counters) {
  DpCounters local;
  Sweep sweep(problem, opts, counters ? *counters : local);
  return sweep.run();
}

std::vector<int> sats_with_overlapping_for(const AccessTable& access, int sat,
                                           int gp, int step) {
  std::vector<int> out;
  if (step < 0 || step >= access.num_steps()) return out;
  for (int o = 0; o < access.num_sats(); ++o)
    if (o != sat && !access.visible(o, step).empty() && access.is_visible(o, step, gp))
      out.push_back(o);
  return out;
}

double compute_value(const SchedulePath& path, const ValueModel& values,
                     const KnowledgeState& knowledge,
                     std::span<const SchedulePath> others) {
  ObservationLog log = knowledge.log;
  for (const auto& o : others)
    for (const auto& n : o.nodes) log.add(n.gp, o.sat, n.t);
  std::vector<PathNode> nodes = path.nodes;
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const PathNode& a, const PathNode& b) { return a.t < b.t; });
  double total = 0.0;
  for (const auto& n : nodes) {
    total += values.value(n.gp, n.t, log, knowledge);
    log.add(n.gp, path.sat, n.t);
  }
  return total;
}

std::optional<std::size_t> first_infeasible(const SchedulePath& path,
                                            const AccessTable& access,
                                            const SlewModel& slew,
                                            double k_sigma,
                                            std::optional<Anchor> anchor) {
  std::optional<Anchor> prev = anchor;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const PathNode& n = path.nodes[i];
    if (n.step < 0 || n.step >= access.num_steps() ||
        !access.is_visible(path.sat, n.step, n.gp))
      return i;
    if (prev) {
      if (n.step <= prev->step) return i;
      const double alpha =
          slew_angle_deg(access.sat_ecef(path.sat, prev->step),
                         access.gp_ecef(prev->gp), access.gp_ecef(n.gp));
      const double gap = access.time_of(n.step) - access.time_of(prev->step);
      if (slew.slew_time(alpha, k_sigma) > gap + kFeasTol) return i;
    }
    prev = Anchor{n.gp, n.step};
  }
  return std::nullopt;
}

}  // namespace eosim
