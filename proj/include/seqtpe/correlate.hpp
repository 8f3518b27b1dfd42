#ifndef SEQTPE_CORRELATE_HPP
#define SEQTPE_CORRELATE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seqtpe/montecarlo.hpp"

namespace seqtpe::correlate {

struct Histogram1D {
  std::int64_t bin_width_ps = 1;
  std::int64_t origin_ps = 0;
  std::vector<std::uint64_t> counts;

  std::int64_t bin_start(std::size_t i) const {
    return origin_ps + static_cast<std::int64_t>(i) * bin_width_ps;
  }
  double bin_center(std::size_t i) const {
    return static_cast<double>(bin_start(i)) + 0.5 * static_cast<double>(bin_width_ps);
  }
  std::uint64_t total() const;
};

/// Counts of (time - origin) mod rep_period over the given channels.
/// bin_width must divide rep_period. A negative origin rotates the fold so
/// that a pulse near t = 0 sits mid-window with its jitter tail intact.
Histogram1D arrival_histogram(const mc::TagStream& stream, const std::set<int>& channels,
                              std::int64_t rep_period_ps, std::int64_t bin_width_ps,
                              std::int64_t origin_ps = 0);

/// Exponentially modified Gaussian: one-sided exponential decay (onset t0,
/// time constant tau) convolved with a Gaussian response of width sigma.
struct EMGFit {
  double t0_ps = 0.0;
  double tau_ps = 1.0;
  double sigma_ps = 0.0;
  double amplitude = 0.0;
  /// Relative residual sqrt(SSR / sum counts^2); values above ~0.25 indicate
  /// the histogram has no decaying pulse structure.
  double residual_norm = 0.0;
};

struct FitError : Error {
  FitError(const std::string& msg, EMGFit best_iterate)
      : Error(msg), best(best_iterate) {}
  EMGFit best;
};

/// Closed-form EMG density scaled by `amplitude`, evaluated stably via
/// erfcx on the rising side so large exp arguments never overflow. At
/// sigma = 0 it degenerates to the sharp-onset exponential.
double emg_model(double t, double t0, double tau, double sigma, double amplitude);

/// Least-squares EMG fit: coarse grid over t0 seeds a Nelder-Mead simplex
/// with a fixed iteration budget and a 1e-6 relative convergence tolerance.
/// Requires >= 20 populated bins. Throws FitError (carrying the best
/// iterate) on non-convergence or when the recovered tau exceeds twice the
/// histogram span, i.e. there is no decaying structure to fit.
EMGFit fit_emg(const Histogram1D& hist, std::optional<double> fix_sigma_ps = {});

enum class Pairing { SameCycle, DisplacedOneCycle };

/// Square two-time coincidence histogram; axis 1 indexes tags from channel
/// set A, axis 2 from set B, both folded to [0, rep_period).
struct CorrelationMap2D {
  std::int64_t bin_width_ps = 25;
  std::int64_t extent_ps = 12500;
  std::size_t side = 500;
  std::vector<std::uint64_t> counts;  // row-major, t1 major

  std::uint64_t at(std::size_t i1, std::size_t i2) const { return counts[i1 * side + i2]; }
  std::uint64_t total() const;
};

/// SameCycle pairs every A-tag with every B-tag of the same cycle;
/// DisplacedOneCycle pairs A-tags of cycle k with B-tags of cycle k+1 (the
/// uncorrelated reference used for normalization). `displacement` selects a
/// different cycle offset for the displaced variant.
CorrelationMap2D two_time_map(const mc::TagStream& stream, const std::set<int>& channels_a,
                              const std::set<int>& channels_b, std::int64_t rep_period_ps,
                              std::int64_t bin_width_ps, Pairing pairing,
                              int displacement = 1);

enum class Quadrant : int { EE = 0, EL = 1, LE = 2, LL = 3 };
inline const char* quadrant_name(Quadrant q) {
  constexpr const char* names[4] = {"ee", "el", "le", "ll"};
  return names[static_cast<int>(q)];
}

struct QuadrantResult {
  double boundary_ps = 0.0;
  std::array<std::uint64_t, 4> raw{};             // indexed by Quadrant
  std::array<std::optional<double>, 4> g2{};      // empty when displaced sum is 0
};

/// Splits both maps at boundary = t0 + delta_t on each axis and normalizes
/// each same-cycle quadrant sum by the displaced one. Bins entirely before
/// the boundary are early; the bin containing the boundary (and a tag
/// exactly at it) counts as late. `displaced_weight` rescales the reference
/// when it accumulates several displacements.
QuadrantResult quadrant_g2(const CorrelationMap2D& same, const CorrelationMap2D& displaced,
                           double t0_ps, double delta_t_ps, double displaced_weight = 1.0);

struct MuCurvePoint {
  double delta_t_ps;
  double mu_b;
  double mu_x;
};

/// Tags per cycle under two-pulse driving divided by tags per cycle under
/// single-pulse driving, per energy mode. Throws InvalidArgument when a
/// single-pulse channel set has no counts (the ratio is undefined).
std::vector<MuCurvePoint> mean_photon_curve(
    const std::vector<std::pair<double, const mc::TagStream*>>& two_pulse,
    const mc::TagStream& one_pulse, const std::set<int>& b_channels,
    const std::set<int>& x_channels);

struct HomWindowedResult {
  std::vector<double> g2_series;  // one entry per retained window
  double mean = 0.0;
  double stddev = 0.0;            // sample standard deviation of the series
  std::size_t windows_excluded = 0;
};

/// Windowed cross-channel correlation of a two-channel stream: within every
/// window, coincidences in the zero-delay peak (|tC - tD| < rep/2) divided
/// by the mean of the n_side_peaks nearest side peaks. Windows with fewer
/// than min_side_coincidences side-peak pairs are excluded and counted.
HomWindowedResult hom_windowed_g2(const mc::TagStream& stream, double window_s,
                                  double shift_s, int n_side_peaks = 6,
                                  std::size_t min_side_coincidences = 10);

// CSV emission. Full precision (%.17g); schemas in the README.
void write_histogram_csv(const Histogram1D& hist, const std::string& path);
void write_map_csv(const CorrelationMap2D& map, const std::string& path);

struct QuadrantRow {
  double delta_t_ps;
  std::string pair;  // e.g. "B-X"
  Quadrant quadrant;
  std::uint64_t raw;
  std::optional<double> g2;
};
void write_quadrant_csv(const std::vector<QuadrantRow>& rows, const std::string& path);
void write_mu_csv(const std::vector<MuCurvePoint>& points, const std::string& path);
void write_hom_series_csv(const HomWindowedResult& result, const std::string& path);

}  // namespace seqtpe::correlate

#endif
