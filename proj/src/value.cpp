#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "eosim/value.hpp"

namespace eosim {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_open(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

bool obs_less(const Observation& a, const Observation& b) {
  return a.t != b.t ? a.t < b.t : a.sat < b.sat;
}

}  // namespace

// ---------------------------------------------------------------------------

void ObservationLog::add(int gp, int sat, double t) {
  if (gp < 0) return;
  if (static_cast<std::size_t>(gp) >= by_gp_.size()) by_gp_.resize(gp + 1);
  auto& v = by_gp_[gp];
  const Observation o{gp, t, sat};
  auto it = std::upper_bound(v.begin(), v.end(), o, obs_less);
  v.insert(it, o);
  ++total_;
}

void ObservationLog::merge(const ObservationLog& other) {
  for (const auto& v : other.by_gp_)
    for (const auto& o : v)
      if (!contains(o.gp, o.sat, o.t)) add(o);
}

int ObservationLog::n_seen(int gp) const {
  return static_cast<int>(observers(gp).size());
}

int ObservationLog::n_seen_before(int gp, double t) const {
  const auto v = observers(gp);
  return static_cast<int>(std::lower_bound(v.begin(), v.end(), t,
                                           [](const Observation& o, double x) {
                                             return o.t < x;
                                           }) -
                          v.begin());
}

std::optional<double> ObservationLog::last_seen(int gp) const {
  const auto v = observers(gp);
  if (v.empty()) return std::nullopt;
  return v.back().t;
}

bool ObservationLog::within_window(int gp, double t, double window_s) const {
  const auto v = observers(gp);
  auto it = std::upper_bound(v.begin(), v.end(), t - window_s,
                             [](double x, const Observation& o) { return x < o.t; });
  return it != v.end() && it->t < t + window_s;
}

bool ObservationLog::contains(int gp, int sat, double t) const {
  for (const auto& o : observers(gp))
    if (o.sat == sat && o.t == t) return true;
  return false;
}

std::span<const Observation> ObservationLog::observers(int gp) const {
  if (gp < 0 || static_cast<std::size_t>(gp) >= by_gp_.size()) return {};
  return by_gp_[gp];
}

std::vector<int> ObservationLog::observed_gps() const {
  std::vector<int> out;
  for (std::size_t g = 0; g < by_gp_.size(); ++g)
    if (!by_gp_[g].empty()) out.push_back(static_cast<int>(g));
  return out;
}

// ---------------------------------------------------------------------------

void KnowledgeState::ingest_model_params(int region, double t_src) {
  if (region < 0) return;
  if (static_cast<std::size_t>(region) >= region_model_time.size())
    region_model_time.resize(region + 1, 0.0);
  region_model_time[region] = std::max(region_model_time[region], t_src);
}

double KnowledgeState::believed_time(int region, double t) const {
  if (region < 0 || static_cast<std::size_t>(region) >= region_model_time.size())
    return t;
  return std::min(t, region_model_time[region]);
}

double assign_satellite_noise(int sat_id, std::uint64_t run_seed) {
  const std::uint64_t h =
      splitmix(splitmix(run_seed ^ 0x5a7e11173ULL) + static_cast<std::uint64_t>(sat_id));
  return 0.02 + 0.06 * unit_open(h);
}

double keyed_normal(std::uint64_t seed, int sat, int gp, double t) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(sat)));
  h = splitmix(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gp)) << 1));
  h = splitmix(h ^ std::bit_cast<std::uint64_t>(t));
  const double u1 = unit_open(h);
  const double u2 = unit_open(splitmix(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// ---------------------------------------------------------------------------

double ValueModel::base(int gp, double t, const KnowledgeState& know) const {
  const int region = nature_->region_of(gp);
  const double absv = nature_->absval(gp, know.believed_time(region, t));
  double factor = 1.0;
  if (know.sigma > 0.0)
    factor += know.sigma * keyed_normal(know.seed, know.owner, gp, t);
  return std::max(0.0, absv * factor);
}

double ValueModel::divisor(int n_prior) const {
  const int n = n_prior + (params_.count_includes_current ? 1 : 0);
  return static_cast<double>(std::max(1, n));
}

double ValueModel::value(int gp, double t, const ObservationLog& log,
                         const KnowledgeState& know) const {
  if (params_.mode == ValueMode::Distance) {
    return base(gp, t, know) *
           distance_fraction(gp, t, *nature_, log, params_.distance_ref_km);
  }
  if (log.within_window(gp, t, params_.zero_window_s)) return 0.0;
  return base(gp, t, know) / divisor(log.n_seen_before(gp, t));
}

double recompute_value(int gp, double t, const NatureField& nature,
                       const ObservationLog& log, const KnowledgeState& know,
                       const ValueParams& params) {
  return ValueModel(nature, params).value(gp, t, log, know);
}

double distance_fraction(int gp, double t, const NatureField& nature,
                         const ObservationLog& log, double d_ref_km) {
  const auto& p = nature.ground_points()[gp];
  double nearest = std::numeric_limits<double>::infinity();
  for (int g : log.observed_gps()) {
    if (g >= nature.num_gp()) continue;
    const auto obs = log.observers(g);
    if (obs.empty() || obs.front().t > t) continue;
    const auto& q = nature.ground_points()[g];
    nearest = std::min(nearest, g == gp ? 0.0
                                        : ground_distance_km(p.lat_deg, p.lon_deg,
                                                             q.lat_deg, q.lon_deg));
  }
  if (!std::isfinite(nearest) || !(d_ref_km > 0.0)) return 1.0;
  return std::min(1.0, nearest / d_ref_km);
}

double distance_decay_value(int gp, double t, const NatureField& nature,
                            const ObservationLog& log, double d_ref_km) {
  return nature.absval(gp, t) * distance_fraction(gp, t, nature, log, d_ref_km);
}

}  // namespace eosim
