#include "seqtpe/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace seqtpe::correlate {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

void check_binning(std::int64_t rep_period_ps, std::int64_t bin_width_ps) {
  if (rep_period_ps <= 0) throw InvalidArgument("repetition period must be positive");
  if (bin_width_ps <= 0) throw InvalidArgument("bin width must be positive");
  if (rep_period_ps % bin_width_ps != 0)
    throw InvalidArgument("bin width must divide the repetition period");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void finish_csv(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace

std::uint64_t Histogram1D::total() const {
  std::uint64_t t = 0;
  for (const auto c : counts) t += c;
  return t;
}

std::uint64_t CorrelationMap2D::total() const {
  std::uint64_t t = 0;
  for (const auto c : counts) t += c;
  return t;
}

Histogram1D arrival_histogram(const mc::TagStream& stream, const std::set<int>& channels,
                              std::int64_t rep_period_ps, std::int64_t bin_width_ps,
                              std::int64_t origin_ps) {
  if (channels.empty()) throw InvalidArgument("channel set must not be empty");
  check_binning(rep_period_ps, bin_width_ps);

  Histogram1D hist;
  hist.bin_width_ps = bin_width_ps;
  hist.origin_ps = origin_ps;
  hist.counts.assign(static_cast<std::size_t>(rep_period_ps / bin_width_ps), 0);
  for (const auto& tag : stream.tags) {
    if (!channels.count(tag.channel)) continue;
    const std::int64_t folded = floor_mod(tag.time_ps - origin_ps, rep_period_ps);
    ++hist.counts[static_cast<std::size_t>(folded / bin_width_ps)];
  }
  return hist;
}

namespace {

// erfcx(z) = exp(z^2) erfc(z) for moderate positive z; asymptotic series for
// large z where the direct product would overflow/underflow.
double erfcx_positive(double z) {
  if (z <= 25.0) return std::exp(z * z) * std::erfc(z);
  const double inv2 = 1.0 / (2.0 * z * z);
  const double series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 - 15.0 * inv2));
  return series / (z * std::sqrt(kPi));
}

}  // namespace

double emg_model(double t, double t0, double tau, double sigma, double amplitude) {
  if (!(tau > 0.0)) return 0.0;
  const double dt = t - t0;
  if (sigma <= 0.0) {
    return dt < 0.0 ? 0.0 : amplitude / tau * std::exp(-dt / tau);
  }
  const double z = sigma / (std::sqrt(2.0) * tau) - dt / (std::sqrt(2.0) * sigma);
  if (z <= 0.0) {
    // Decay side: the exponential argument is negative, erfc(z) is O(1).
    return amplitude / (2.0 * tau) *
           std::exp(sigma * sigma / (2.0 * tau * tau) - dt / tau) * std::erfc(z);
  }
  const double u = dt / sigma;
  return amplitude / (2.0 * tau) * std::exp(-0.5 * u * u) * erfcx_positive(z);
}

namespace {

struct EmgObjective {
  const Histogram1D* hist;
  std::optional<double> fix_sigma;

  // Shape-only evaluation; the amplitude is solved in closed form, so the
  // simplex only searches (t0, tau[, sigma]).
  double operator()(const std::vector<double>& x, double* amplitude_out = nullptr) const {
    const double t0 = x[0];
    const double tau = x[1];
    const double sigma = fix_sigma ? *fix_sigma : std::abs(x[2]);
    if (!(tau > 0.0) || !std::isfinite(t0)) return std::numeric_limits<double>::infinity();

    std::vector<double> shape(hist->counts.size());
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      shape[i] = emg_model(hist->bin_center(i), t0, tau, sigma, 1.0);
      ss += shape[i] * shape[i];
      sy += shape[i] * static_cast<double>(hist->counts[i]);
    }
    if (!(ss > 0.0)) return std::numeric_limits<double>::infinity();
    const double amplitude = std::max(0.0, sy / ss);
    if (amplitude_out) *amplitude_out = amplitude;

    double ssr = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const double r = amplitude * shape[i] - static_cast<double>(hist->counts[i]);
      ssr += r * r;
    }
    return ssr;
  }
};

struct SimplexResult {
  std::vector<double> x;
  double value;
  bool converged;
};

// Nelder-Mead with standard coefficients, a fixed iteration budget and a
// relative parameter-spread stop of 1e-6.
SimplexResult nelder_mead(const EmgObjective& f, std::vector<double> x0,
                          const std::vector<double>& step, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2;
    std::vector<double> v2;
    for (const auto i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    order();

    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double extent = 0.0;
      for (std::size_t v = 1; v <= n; ++v)
        extent = std::max(extent, std::abs(pts[v][i] - pts[0][i]));
      spread = std::max(extent / (std::abs(pts[0][i]) + 1e-9), spread);
    }
    if (spread < 1e-6) return {pts[0], vals[0], true};

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[v][i] / static_cast<double>(n);

    auto blend = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = centroid[i] + coeff * (pts[n][i] - centroid[i]);
      return p;
    };

    const auto reflected = blend(-1.0);
    const double fr = f(reflected);
    if (fr < vals[0]) {
      const auto expanded = blend(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[n] = expanded;
        vals[n] = fe;
      } else {
        pts[n] = reflected;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = reflected;
      vals[n] = fr;
      continue;
    }
    const auto contracted = blend(fr < vals[n] ? -0.5 : 0.5);
    const double fc = f(contracted);
    if (fc < std::min(fr, vals[n])) {
      pts[n] = contracted;
      vals[n] = fc;
      continue;
    }
    for (std::size_t v = 1; v <= n; ++v) {  // shrink towards the best vertex
      for (std::size_t i = 0; i < n; ++i) pts[v][i] = 0.5 * (pts[v][i] + pts[0][i]);
      vals[v] = f(pts[v]);
    }
  }
  order();
  return {pts[0], vals[0], false};
}

}  // namespace

EMGFit fit_emg(const Histogram1D& hist, std::optional<double> fix_sigma_ps) {
  std::size_t populated = 0;
  for (const auto c : hist.counts)
    if (c > 0) ++populated;
  if (populated < 20)
    throw InvalidArgument("histogram needs at least 20 populated bins for a fit");
  if (fix_sigma_ps && !(*fix_sigma_ps >= 0.0))
    throw InvalidArgument("fixed sigma must be >= 0");

  const double bw = static_cast<double>(hist.bin_width_ps);
  const double span = bw * static_cast<double>(hist.counts.size());

  double total = 0.0, mean = 0.0;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double y = static_cast<double>(hist.counts[i]);
    total += y;
    mean += y * hist.bin_center(i);
    if (hist.counts[i] > hist.counts[peak]) peak = i;
  }
  mean /= total;
  double variance = 0.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double d = hist.bin_center(i) - mean;
    variance += static_cast<double>(hist.counts[i]) * d * d;
  }
  variance /= total;

  const double tau0 = std::max(bw, 0.8 * std::sqrt(variance));
  const double sigma0 = fix_sigma_ps ? *fix_sigma_ps : bw;
  const double peak_t = hist.bin_center(peak);

  const EmgObjective objective{&hist, fix_sigma_ps};

  // Coarse grid over the onset time; the sharp rise makes the objective
  // multimodal in t0 if seeded blindly.
  double best_t0 = peak_t;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = -8; k <= 2; ++k) {
    const double t0 = peak_t + 0.25 * static_cast<double>(k) * tau0;
    std::vector<double> x{t0, tau0};
    if (!fix_sigma_ps) x.push_back(sigma0);
    const double v = objective(x);
    if (v < best_val) {
      best_val = v;
      best_t0 = t0;
    }
  }

  std::vector<double> x0{best_t0, tau0};
  std::vector<double> step{0.25 * tau0, 0.3 * tau0};
  if (!fix_sigma_ps) {
    x0.push_back(sigma0);
    step.push_back(std::max(0.5 * sigma0, 0.5 * bw));
  }

  const auto result = nelder_mead(objective, x0, step, 5000);

  double amplitude = 0.0;
  const double ssr = objective(result.x, &amplitude);
  double sum_sq = 0.0;
  for (const auto c : hist.counts) sum_sq += static_cast<double>(c) * static_cast<double>(c);

  EMGFit fit;
  fit.t0_ps = result.x[0];
  fit.tau_ps = result.x[1];
  fit.sigma_ps = fix_sigma_ps ? *fix_sigma_ps : std::abs(result.x[2]);
  fit.amplitude = amplitude;
  fit.residual_norm = std::sqrt(ssr / sum_sq);

  if (!result.converged) throw FitError("fit did not converge within the iteration budget", fit);
  if (!(fit.tau_ps > 0.0) || fit.tau_ps > 2.0 * span)
    throw FitError("no decaying structure: fitted tau exceeds the histogram span", fit);
  return fit;
}

CorrelationMap2D two_time_map(const mc::TagStream& stream, const std::set<int>& channels_a,
                              const std::set<int>& channels_b, std::int64_t rep_period_ps,
                              std::int64_t bin_width_ps, Pairing pairing, int displacement) {
  if (channels_a.empty() || channels_b.empty())
    throw InvalidArgument("channel sets must not be empty");
  for (const int ch : channels_a) {
    if (channels_b.count(ch))
      throw InvalidArgument("channel sets share channel " + std::to_string(ch));
  }
  check_binning(rep_period_ps, bin_width_ps);
  if (pairing == Pairing::DisplacedOneCycle && displacement < 1)
    throw InvalidArgument("displacement must be >= 1 cycle");

  CorrelationMap2D map;
  map.bin_width_ps = bin_width_ps;
  map.extent_ps = rep_period_ps;
  map.side = static_cast<std::size_t>(rep_period_ps / bin_width_ps);
  map.counts.assign(map.side * map.side, 0);

  // History of recent cycles' A-bins, for the displaced pairing. Cycle
  // indices can skip dark cycles, so entries carry their index.
  std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> history;
  std::vector<std::size_t> a_bins, b_bins;
  std::int64_t current_cycle = -1;

  auto flush_cycle = [&]() {
    if (current_cycle < 0) return;
    if (pairing == Pairing::SameCycle) {
      for (const auto a : a_bins)
        for (const auto b : b_bins) ++map.counts[a * map.side + b];
    } else {
      const std::int64_t wanted = current_cycle - displacement;
      for (const auto& [idx, bins] : history) {
        if (idx != wanted) continue;
        for (const auto a : bins)
          for (const auto b : b_bins) ++map.counts[a * map.side + b];
      }
      history.emplace_back(current_cycle, a_bins);
      while (!history.empty() && history.front().first < current_cycle - displacement + 1)
        history.erase(history.begin());
    }
    a_bins.clear();
    b_bins.clear();
  };

  for (const auto& tag : stream.tags) {
    const std::int64_t cycle = tag.time_ps / rep_period_ps;
    if (cycle != current_cycle) {
      flush_cycle();
      current_cycle = cycle;
    }
    const auto bin =
        static_cast<std::size_t>((tag.time_ps % rep_period_ps) / bin_width_ps);
    if (channels_a.count(tag.channel)) a_bins.push_back(bin);
    if (channels_b.count(tag.channel)) b_bins.push_back(bin);
  }
  flush_cycle();
  return map;
}

QuadrantResult quadrant_g2(const CorrelationMap2D& same, const CorrelationMap2D& displaced,
                           double t0_ps, double delta_t_ps, double displaced_weight) {
  if (same.bin_width_ps != displaced.bin_width_ps || same.side != displaced.side ||
      same.extent_ps != displaced.extent_ps)
    throw InvalidArgument("same-cycle and displaced maps have different geometry");
  if (!(displaced_weight > 0.0)) throw InvalidArgument("displaced weight must be positive");

  const double boundary = t0_ps + delta_t_ps;
  if (!(boundary >= 0.0) || !(boundary <= static_cast<double>(same.extent_ps)))
    throw InvalidArgument("quadrant boundary lies outside the map extent");

  // Bins wholly before the boundary are early; the straddling bin is late,
  // consistent with tags exactly at the boundary being late.
  const auto n_early = static_cast<std::size_t>(std::min(
      static_cast<double>(same.side),
      std::floor(boundary / static_cast<double>(same.bin_width_ps))));

  QuadrantResult result;
  result.boundary_ps = boundary;
  std::array<std::uint64_t, 4> disp{};
  for (std::size_t i = 0; i < same.side; ++i) {
    const bool late1 = i >= n_early;
    for (std::size_t j = 0; j < same.side; ++j) {
      const bool late2 = j >= n_early;
      const auto q = static_cast<std::size_t>((late1 ? 2 : 0) + (late2 ? 1 : 0));
      result.raw[q] += same.at(i, j);
      disp[q] += displaced.at(i, j);
    }
  }
  for (std::size_t q = 0; q < 4; ++q) {
    if (disp[q] > 0)
      result.g2[q] = static_cast<double>(result.raw[q]) /
                     (static_cast<double>(disp[q]) / displaced_weight);
  }
  return result;
}

namespace {

double tags_per_cycle(const mc::TagStream& stream, const std::set<int>& channels) {
  if (stream.n_cycles <= 0)
    throw InvalidArgument("stream has no cycle count; rates are undefined");
  std::uint64_t count = 0;
  for (const auto& tag : stream.tags)
    if (channels.count(tag.channel)) ++count;
  return static_cast<double>(count) / static_cast<double>(stream.n_cycles);
}

}  // namespace

std::vector<MuCurvePoint> mean_photon_curve(
    const std::vector<std::pair<double, const mc::TagStream*>>& two_pulse,
    const mc::TagStream& one_pulse, const std::set<int>& b_channels,
    const std::set<int>& x_channels) {
  const double ref_b = tags_per_cycle(one_pulse, b_channels);
  const double ref_x = tags_per_cycle(one_pulse, x_channels);
  if (ref_b <= 0.0 || ref_x <= 0.0)
    throw InvalidArgument("single-pulse reference has no counts; ratio undefined");

  std::vector<MuCurvePoint> points;
  points.reserve(two_pulse.size());
  for (const auto& [delta_t, stream] : two_pulse) {
    points.push_back({delta_t, tags_per_cycle(*stream, b_channels) / ref_b,
                      tags_per_cycle(*stream, x_channels) / ref_x});
  }
  std::sort(points.begin(), points.end(),
            [](const MuCurvePoint& a, const MuCurvePoint& b) {
              return a.delta_t_ps < b.delta_t_ps;
            });
  return points;
}

HomWindowedResult hom_windowed_g2(const mc::TagStream& stream, double window_s,
                                  double shift_s, int n_side_peaks,
                                  std::size_t min_side_coincidences) {
  if (!(window_s > 0.0) || !(shift_s > 0.0))
    throw InvalidArgument("window and shift must be positive");
  if (n_side_peaks < 2 || n_side_peaks % 2 != 0)
    throw InvalidArgument("side peak count must be even and >= 2");

  std::vector<int> channels = stream.channels_for("OUT_C");
  const auto d_role = stream.channels_for("OUT_D");
  channels.insert(channels.end(), d_role.begin(), d_role.end());
  if (channels.size() != 2) {
    channels.clear();
    for (const auto& [ch, role] : stream.channel_map) channels.push_back(ch);
    std::sort(channels.begin(), channels.end());
    if (channels.size() != 2)
      throw InvalidArgument("windowed correlation needs a two-channel stream");
  }

  std::vector<std::int64_t> c_times, d_times;
  for (const auto& tag : stream.tags) {
    if (tag.channel == channels[0]) c_times.push_back(tag.time_ps);
    else if (tag.channel == channels[1]) d_times.push_back(tag.time_ps);
  }

  const std::int64_t rep = stream.rep_period_ps;
  const std::int64_t k_max = n_side_peaks / 2;
  const std::int64_t reach = k_max * rep + rep / 2;
  std::int64_t duration = stream.duration_ps();
  if (duration <= 0 && !stream.tags.empty()) duration = stream.tags.back().time_ps + 1;
  const auto window_ps = static_cast<std::int64_t>(window_s * 1e12);
  const auto shift_ps = static_cast<std::int64_t>(shift_s * 1e12);
  if (window_ps > duration)
    throw InvalidArgument("stream is shorter than one analysis window");

  HomWindowedResult result;
  for (std::int64_t start = 0; start + window_ps <= duration; start += shift_ps) {
    const std::int64_t stop = start + window_ps;
    const auto c_begin = std::lower_bound(c_times.begin(), c_times.end(), start);
    const auto c_end = std::lower_bound(c_times.begin(), c_times.end(), stop);
    const auto d_lo = std::lower_bound(d_times.begin(), d_times.end(), start);
    const auto d_hi = std::lower_bound(d_times.begin(), d_times.end(), stop);

    std::uint64_t zero_peak = 0, side_peaks = 0;
    auto d_it = d_lo;
    for (auto c_it = c_begin; c_it != c_end; ++c_it) {
      while (d_it != d_hi && *d_it < *c_it - reach) ++d_it;
      for (auto d = d_it; d != d_hi && *d <= *c_it + reach; ++d) {
        const std::int64_t delta = *c_it - *d;
        const std::int64_t m = floor_div(delta + rep / 2, rep);
        if (m == 0) ++zero_peak;
        else if ((m < 0 ? -m : m) <= k_max) ++side_peaks;
      }
    }
    if (side_peaks < min_side_coincidences) {
      ++result.windows_excluded;
      continue;
    }
    const double side_mean =
        static_cast<double>(side_peaks) / static_cast<double>(n_side_peaks);
    result.g2_series.push_back(static_cast<double>(zero_peak) / side_mean);
  }

  const std::size_t n = result.g2_series.size();
  if (n > 0) {
    double sum = 0.0;
    for (const double v : result.g2_series) sum += v;
    result.mean = sum / static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (const double v : result.g2_series) {
        const double d = v - result.mean;
        ss += d * d;
      }
      result.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
  }
  return result;
}

void write_histogram_csv(const Histogram1D& hist, const std::string& path) {
  auto out = open_csv(path);
  out << "bin_start_ps,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out << hist.bin_start(i) << ',' << hist.counts[i] << "\n";
  finish_csv(out, path);
}

void write_map_csv(const CorrelationMap2D& map, const std::string& path) {
  auto out = open_csv(path);
  out << "t1_ps,t2_ps,count\n";
  for (std::size_t i = 0; i < map.side; ++i) {
    for (std::size_t j = 0; j < map.side; ++j) {
      const auto c = map.at(i, j);
      if (c == 0) continue;
      out << static_cast<std::int64_t>(i) * map.bin_width_ps << ','
          << static_cast<std::int64_t>(j) * map.bin_width_ps << ',' << c << "\n";
    }
  }
  finish_csv(out, path);
}

void write_quadrant_csv(const std::vector<QuadrantRow>& rows, const std::string& path) {
  auto out = open_csv(path);
  out << "delta_t_ps,pair,quadrant,raw,g2\n";
  for (const auto& row : rows) {
    out << format_double(row.delta_t_ps) << ',' << row.pair << ','
        << quadrant_name(row.quadrant) << ',' << row.raw << ','
        << (row.g2 ? format_double(*row.g2) : "nan") << "\n";
  }
  finish_csv(out, path);
}

void write_mu_csv(const std::vector<MuCurvePoint>& points, const std::string& path) {
  auto out = open_csv(path);
  out << "delta_t_ps,mu_B,mu_X\n";
  for (const auto& p : points)
    out << format_double(p.delta_t_ps) << ',' << format_double(p.mu_b) << ','
        << format_double(p.mu_x) << "\n";
  finish_csv(out, path);
}

void write_hom_series_csv(const HomWindowedResult& result, const std::string& path) {
  auto out = open_csv(path);
  out << "window_index,g2\n";
  for (std::size_t i = 0; i < result.g2_series.size(); ++i)
    out << i << ',' << format_double(result.g2_series[i]) << "\n";
  finish_csv(out, path);
}

}  // namespace seqtpe::correlate
