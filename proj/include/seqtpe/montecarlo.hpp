#ifndef SEQTPE_MONTECARLO_HPP
#define SEQTPE_MONTECARLO_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqtpe/protocol.hpp"
#include "seqtpe/rng.hpp"

namespace seqtpe::mc {

enum class Polarization : std::uint8_t { H, V };
enum class PolarizationFilter : std::uint8_t { None, H, V };

/// One photon emitted during a cycle, in continuous time relative to the
/// cycle start. Both photons of a cascade share its polarization.
struct EmissionEvent {
  fock::Energy kind;
  int cascade_index;  // 1 or 2
  double time_ps;
  Polarization polarization;
};

struct ChannelPair {
  int first = 1;
  int second = 2;
};

/// Detection chain: polarization filter, 1:2 splitter routing per energy,
/// per-channel efficiency, Gaussian timing jitter, per-channel dead-time and
/// uniform dark counts.
struct DetectorModel {
  double efficiency = 1.0;
  std::map<int, double> efficiency_override;  // per-channel, beats `efficiency`
  double jitter_sigma_ps = 0.0;
  double deadtime_ps = 0.0;
  double dark_rate_hz = 0.0;
  double splitter_ratio = 0.5;  // probability of the first channel of a pair
  PolarizationFilter filter = PolarizationFilter::None;
  ChannelPair b_channels{1, 2};
  ChannelPair x_channels{3, 4};

  double efficiency_for(int channel) const;
  std::vector<int> channels() const;  // distinct, ascending
  void validate() const;

  static DetectorModel ideal();
  /// Values measured on the reference setup: 80% efficiency, 40 ps jitter,
  /// 100 ns dead-time, balanced splitters.
  static DetectorModel lab_defaults();
};

struct ExperimentConfig {
  protocol::CascadeParams params{142.0, 187.0, 100.0, 0.9};
  DetectorModel detector;
  std::int64_t rep_period_ps = 12500;
  std::int64_t n_cycles = 0;
  int n_pulses = 2;  // 1 = reference single-pulse run
  std::uint64_t seed = 1;
  /// Smallest supported pulse separation (twice the 6 ps pulse length).
  /// Relax deliberately for sub-picosecond studies.
  double min_delta_t_ps = 12.0;
  int workers = 1;

  void validate() const;
};

struct TimeTag {
  int channel;
  std::int64_t time_ps;  // absolute, integer picosecond grid

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

/// Stream order: ascending time, ties broken by ascending channel.
inline bool tag_less(const TimeTag& a, const TimeTag& b) {
  if (a.time_ps != b.time_ps) return a.time_ps < b.time_ps;
  return a.channel < b.channel;
}

/// A sorted tag stream plus the header of the on-disk format. Unknown header
/// keys survive a read/write round trip in `extra_header`.
struct TagStream {
  std::int64_t rep_period_ps = 12500;
  std::int64_t n_cycles = 0;
  std::vector<std::pair<int, std::string>> channel_map;  // channel -> role
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> extra_header;
  std::vector<TimeTag> tags;

  std::int64_t duration_ps() const { return n_cycles * rep_period_ps; }
  std::vector<int> channels_for(const std::string& role) const;
  std::optional<std::string> extra(const std::string& key) const;
};

/// One excitation cycle of the two-pulse protocol (or a single-pulse
/// reference cycle for n_pulses = 1). Pulse 1 at t = 0 excites with
/// probability prep_fidelity; the action of pulse 2 at delta_t depends on
/// where the cascade has decayed to by then:
///   still in B  -> de-excited with probability prep_fidelity (cascade
///                  erased), otherwise the stored cascade proceeds late;
///   in X        -> unaffected, B early / X late;
///   ground      -> both early photons out; a second cascade starts at
///                  delta_t with probability prep_fidelity.
/// A failed first pulse leaves the cycle dark. Events come out time-ordered
/// and every cascade satisfies t_X > t_B strictly.
std::vector<EmissionEvent> simulate_cycle(const protocol::CascadeParams& params,
                                          int n_pulses, Philox& rng);

/// Detection of one cycle's events: filter, route, thin by efficiency, add
/// jitter, round to the 1 ps grid, enforce dead-time within the cycle and
/// superimpose dark counts. Tags come out in stream order.
std::vector<TimeTag> detect(const std::vector<EmissionEvent>& events,
                            const DetectorModel& detector, std::int64_t cycle_start_ps,
                            std::int64_t rep_period_ps, Philox& rng);

/// Greedy per-channel dead-time pass over a sorted stream: a tag closer than
/// deadtime_ps to the previously accepted tag on its channel is dropped.
void apply_deadtime(std::vector<TimeTag>& sorted_tags, double deadtime_ps);

/// Full run over n_cycles at rep_period spacing. Cycles draw from
/// independent counter-based substreams keyed by (seed, cycle index), so the
/// output is byte-identical for any worker count. Dead-time is enforced once
/// across the merged stream (it spans several cycles at realistic settings).
TagStream run_experiment(const ExperimentConfig& config);

struct PhaseModel {
  enum class Mode { Constant, RandomPerInterval } mode = Mode::Constant;
  double phi = 0.0;                  // used by Constant
  double stability_interval_s = 1.0; // phase redraw period for RandomPerInterval
};

struct HomSynthConfig {
  protocol::CascadeParams params{142.0, 187.0, 100.0, 1.0};
  DetectorModel detector = DetectorModel::ideal();
  PhaseModel phase;
  double duration_s = 1.0;
  std::int64_t rep_period_ps = 12500;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Output channels of the synthetic interference stream.
inline constexpr int kHomChannelC = 1;
inline constexpr int kHomChannelD = 2;

/// Synthesizes detector clicks at the two outputs of the interferometer by
/// sampling joint photon numbers from |amplitude|^2 of hom_output_state at
/// the instantaneous phase. Windowed cross-correlations of the stream
/// converge to hom_g2_analytic(phi(t)). The phase is piecewise constant,
/// redrawn uniformly on [0, 2 pi) every stability interval.
TagStream synth_hom_stream(const HomSynthConfig& config);

/// Text tag-file format (see README). write/read is lossless on streams.
void write_tags(const TagStream& stream, std::ostream& out);
void write_tags_file(const TagStream& stream, const std::string& path);
TagStream read_tags(std::istream& in);       // throws ParseError
TagStream read_tags_file(const std::string& path);

}  // namespace seqtpe::mc

#endif
