#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "eosim/error.hpp"
#include "eosim/orbit.hpp"
#include "text_util.hpp"

namespace eosim {

namespace {

struct Window {
  double start;
  double end;
  double max_range_km;
};

// Bisect a visibility transition between a sample where `pred` is `lo_val`
// and one where it is not.
template <class Pred>
double refine(Pred&& pred, double lo, double hi, bool lo_val) {
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid) == lo_val)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

template <class Pred, class Range>
std::vector<Window> scan_windows(const std::vector<double>& times,
                                 const std::vector<char>& flags, Pred&& pred,
                                 Range&& range) {
  std::vector<Window> out;
  const std::size_t n = times.size();
  std::size_t k = 0;
  while (k < n) {
    if (!flags[k]) {
      ++k;
      continue;
    }
    std::size_t j = k;
    double max_r = 0.0;
    while (j < n && flags[j]) max_r = std::max(max_r, range(times[j++]));
    const double start =
        k == 0 ? times[0] : refine(pred, times[k - 1], times[k], false);
    const double end =
        j == n ? times[n - 1] : refine(pred, times[j - 1], times[j], true);
    max_r = std::max({max_r, range(start), range(end)});
    if (end > start) out.push_back({start, end, max_r});
    k = j;
  }
  return out;
}

}  // namespace

std::vector<Contact> build_contact_plan(
    std::span<const OrbitalElements> constellation,
    std::span<const GroundStation> stations, const ContactPlanOptions& opts) {
  if (opts.step_s <= 0.0 || opts.horizon_s <= 0.0)
    throw Error(ErrorKind::InvalidArgument,
                "contact plan step and horizon must be > 0");
  std::vector<double> times;
  for (long k = 0;; ++k) {
    const double t = k * opts.step_s;
    if (t >= opts.horizon_s) break;
    times.push_back(t);
  }
  times.push_back(opts.horizon_s);

  const int n_sats = static_cast<int>(constellation.size());
  const std::size_t nt = times.size();
  std::vector<Vec3> eci(static_cast<std::size_t>(n_sats) * nt);
  std::vector<Vec3> ecef(eci.size());
  for (int s = 0; s < n_sats; ++s) {
    for (std::size_t k = 0; k < nt; ++k) {
      const auto st =
          propagate_state(constellation[s], times[k], opts.propagation, s);
      eci[s * nt + k] = st.position_eci;
      ecef[s * nt + k] = st.position_ecef;
    }
  }
  auto pos_eci = [&](int s, double t) {
    return propagate_state(constellation[s], t, opts.propagation, s)
        .position_eci;
  };
  auto pos_ecef = [&](int s, double t) {
    return propagate_state(constellation[s], t, opts.propagation, s)
        .position_ecef;
  };

  std::vector<Contact> plan;
  const double min_radius = kEarthRadiusKm + opts.grazing_margin_km;
  std::vector<char> flags(nt);

  if (opts.include_isl) {
    for (int a = 0; a < n_sats; ++a) {
      for (int b = a + 1; b < n_sats; ++b) {
        for (std::size_t k = 0; k < nt; ++k)
          flags[k] = line_of_sight(eci[a * nt + k], eci[b * nt + k], min_radius);
        auto pred = [&](double t) {
          return line_of_sight(pos_eci(a, t), pos_eci(b, t), min_radius);
        };
        auto range = [&](double t) { return (pos_eci(a, t) - pos_eci(b, t)).norm(); };
        for (const auto& w : scan_windows(times, flags, pred, range)) {
          const double rls = std::max(w.max_range_km / kLightSpeedKmS, 1e-9);
          plan.push_back({w.start, w.end, a, b, opts.isl_data_rate_bps, rls});
          plan.push_back({w.start, w.end, b, a, opts.isl_data_rate_bps, rls});
        }
      }
    }
  }

  if (opts.include_ground) {
    for (std::size_t g = 0; g < stations.size(); ++g) {
      const auto& st = stations[g];
      if (!(st.min_elevation_deg >= 0.0 && st.min_elevation_deg < 90.0))
        throw Error(ErrorKind::InvalidArgument,
                    "station minimum elevation must lie in [0, 90)");
      const Vec3 gpos = geodetic_to_ecef(st.lat_deg, st.lon_deg);
      const int node = n_sats + static_cast<int>(g);
      for (int s = 0; s < n_sats; ++s) {
        for (std::size_t k = 0; k < nt; ++k)
          flags[k] = elevation_deg(ecef[s * nt + k], gpos) > st.min_elevation_deg;
        auto pred = [&](double t) {
          return elevation_deg(pos_ecef(s, t), gpos) > st.min_elevation_deg;
        };
        auto range = [&](double t) { return (pos_ecef(s, t) - gpos).norm(); };
        for (const auto& w : scan_windows(times, flags, pred, range)) {
          const double rls = std::max(w.max_range_km / kLightSpeedKmS, 1e-9);
          plan.push_back({w.start, w.end, s, node, opts.ground_data_rate_bps, rls});
          plan.push_back({w.start, w.end, node, s, opts.ground_data_rate_bps, rls});
        }
      }
    }
  }

  std::sort(plan.begin(), plan.end(), [](const Contact& x, const Contact& y) {
    if (x.t_start != y.t_start) return x.t_start < y.t_start;
    if (x.origin != y.origin) return x.origin < y.origin;
    return x.destination < y.destination;
  });
  return plan;
}

void write_contact_plan(std::ostream& os, std::span<const Contact> plan) {
  os << "# t_start,t_end,origin,destination,data_rate_bps,range_light_seconds\n";
  for (const auto& c : plan) {
    os << text::fmt(c.t_start) << ',' << text::fmt(c.t_end) << ',' << c.origin
       << ',' << c.destination << ',' << text::fmt(c.data_rate_bps) << ','
       << text::fmt(c.range_light_seconds) << '\n';
  }
}

std::vector<Contact> read_contact_plan(std::istream& is) {
  std::vector<Contact> plan;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (text::skippable(line)) continue;
    const auto f = text::split(line, ',');
    auto where = " at line " + std::to_string(lineno);
    if (f.size() != 6)
      throw Error(ErrorKind::MalformedHeader,
                  "contact plan: expected 6 fields" + where);
    const auto ts = text::parse<double>(f[0]), te = text::parse<double>(f[1]);
    const auto o = text::parse<int>(f[2]), d = text::parse<int>(f[3]);
    const auto rate = text::parse<double>(f[4]), rng = text::parse<double>(f[5]);
    if (!ts || !te || !o || !d || !rate || !rng)
      throw Error(ErrorKind::BadNumber, "contact plan: bad number" + where);
    if (!(*ts < *te) || !(*rate > 0.0) || *rng < 0.0 || *o == *d)
      throw Error(ErrorKind::ValueOutOfRange,
                  "contact plan: invalid contact" + where);
    plan.push_back({*ts, *te, *o, *d, *rate, *rng});
  }
  return plan;
}

}  // namespace eosim
