#pragma once

// Nature runs (ground-truth observation value on a region grid) and the
// statistical value-recomputation model applied by each scheduler.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eosim/orbit.hpp"

namespace eosim {

inline constexpr int kMinAbsval = 1;
inline constexpr int kMaxAbsval = 256;

/// Time-varying 8-bit value grid over one region. Values are stored
/// frame-major and always lie in [1, 256].
struct NatureRun {
  std::string region_id;
  double timestep_s = 900.0;
  double cell_size_km = 4.0;
  int n_frames = 0;
  std::vector<GroundPoint> grid;     // region field is left 0 here
  std::vector<std::uint16_t> values;  // n_frames * grid.size()

  int n_gp() const { return static_cast<int>(grid.size()); }
  int frame_index(double t) const;
  int absval(int local_gp, double t) const;
  int at(int frame, int local_gp) const {
    return values[static_cast<std::size_t>(frame) * grid.size() + local_gp];
  }
  double horizon_s() const { return n_frames * timestep_s; }
};

/// Parses the nature-run grid format. Throws Error with kind
/// MalformedHeader, ValueOutOfRange, FrameLengthMismatch or BadNumber.
NatureRun read_nature_run(std::istream& is);
NatureRun load_nature_run(const std::string& path);
void write_nature_run(std::ostream& os, const NatureRun& run);

struct SynthParams {
  std::string region_id = "region";
  double center_lat_deg = 0.0;
  double center_lon_deg = 0.0;
  double extent_km = 80.0;
  double cell_size_km = 4.0;
  int n_blobs = 16;             // watersheds
  double timestep_s = 900.0;
  int n_frames = 24;
  double transiency_s = 900.0;  // correlation time of watershed activity
  bool static_field = false;
};

/// Deterministic synthetic run: Voronoi watersheds of constant value whose
/// activity ranks evolve as AR(1) processes, mapped onto a log2 scale.
NatureRun synth_nature_run(std::uint64_t seed, const SynthParams& params);

/// Square grid of cell centers around a region center.
std::vector<GroundPoint> region_grid(double center_lat_deg,
                                     double center_lon_deg, double extent_km,
                                     double cell_size_km);

/// All regions' runs behind one global ground-point index.
class NatureField {
 public:
  NatureField() = default;
  explicit NatureField(std::vector<NatureRun> runs);

  int num_regions() const { return static_cast<int>(runs_.size()); }
  int num_gp() const { return static_cast<int>(gps_.size()); }
  const NatureRun& run(int region) const { return runs_[region]; }
  std::span<const GroundPoint> ground_points() const { return gps_; }
  int region_of(int gp) const { return gps_[gp].region; }
  int first_gp(int region) const { return offsets_[region]; }
  int absval(int gp, double t) const;

 private:
  std::vector<NatureRun> runs_;
  std::vector<GroundPoint> gps_;
  std::vector<int> offsets_;
};

struct Observation {
  int gp = 0;
  double t = 0.0;
  int sat = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Per ground point observer history, kept sorted by time.
class ObservationLog {
 public:
  void add(int gp, int sat, double t);
  void add(const Observation& o) { add(o.gp, o.sat, o.t); }
  void merge(const ObservationLog& other);

  int n_seen(int gp) const;
  int n_seen_before(int gp, double t) const;
  std::optional<double> last_seen(int gp) const;
  /// Any logged observation of gp with |t - t_obs| < window.
  bool within_window(int gp, double t, double window_s) const;
  bool contains(int gp, int sat, double t) const;
  std::span<const Observation> observers(int gp) const;
  /// Ground points with at least one observation, ascending.
  std::vector<int> observed_gps() const;
  std::size_t size() const { return total_; }

 private:
  std::vector<std::vector<Observation>> by_gp_;
  std::size_t total_ = 0;
};

enum class ValueMode { Count, Distance };

struct ValueParams {
  ValueMode mode = ValueMode::Count;
  bool count_includes_current = false;  // divisor n_seen+1 instead of n_seen
  double zero_window_s = 900.0;
  double distance_ref_km = 16.0;
};

/// What one scheduler knows: its merged observation log, the source time of
/// its latest insight per region and its private inference noise level.
struct KnowledgeState {
  int owner = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  ObservationLog log;
  /// Source time of the newest model parameters per region; empty means the
  /// owner sees the nature run directly.
  std::vector<double> region_model_time;

  void ingest_model_params(int region, double t_src);
  /// Time of the nature frame the owner believes describes `t`.
  double believed_time(int region, double t) const;
};

/// Draws a per-satellite inference noise level, uniform in [0.02, 0.08].
double assign_satellite_noise(int sat_id, std::uint64_t run_seed);

/// Zero-mean unit normal keyed on (seed, sat, gp, t); order independent.
double keyed_normal(std::uint64_t seed, int sat, int gp, double t);

double recompute_value(int gp, double t, const NatureField& nature,
                       const ObservationLog& log, const KnowledgeState& know,
                       const ValueParams& params = {});

/// min(1, d_nearest / d_ref) over ground points observed at or before t; 1
/// when nothing has been observed.
double distance_fraction(int gp, double t, const NatureField& nature,
                         const ObservationLog& log, double d_ref_km);

double distance_decay_value(int gp, double t, const NatureField& nature,
                            const ObservationLog& log, double d_ref_km = 16.0);

/// Split form used by the scheduler hot loop: value = base / divisor, or 0
/// inside the zero-value window.
class ValueModel {
 public:
  ValueModel(const NatureField& nature, ValueParams params)
      : nature_(&nature), params_(params) {}

  const NatureField& nature() const { return *nature_; }
  const ValueParams& params() const { return params_; }

  /// Believed absval with the owner's multiplicative noise, clamped >= 0.
  double base(int gp, double t, const KnowledgeState& know) const;
  double divisor(int n_prior) const;
  double value(int gp, double t, const ObservationLog& log,
               const KnowledgeState& know) const;

 private:
  const NatureField* nature_;
  ValueParams params_;
};

}  // namespace eosim
