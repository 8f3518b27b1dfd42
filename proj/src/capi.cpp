#include "seqtpe.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "seqtpe/correlate.hpp"
#include "seqtpe/report.hpp"

namespace {

thread_local std::string g_last_error;

template <typename Fn>
seqtpe_status guarded(Fn&& fn) {
  try {
    fn();
    return SEQTPE_OK;
  } catch (const seqtpe::ParseError& e) {
    g_last_error = e.what();
    return SEQTPE_ERR_PARSE;
  } catch (const seqtpe::correlate::FitError& e) {
    g_last_error = e.what();
    return SEQTPE_ERR_NUMERIC;
  } catch (const seqtpe::IoError& e) {
    g_last_error = e.what();
    return SEQTPE_ERR_IO;
  } catch (const seqtpe::InvalidArgument& e) {
    g_last_error = e.what();
    return SEQTPE_ERR_INVALID_ARGUMENT;
  } catch (const seqtpe::TruncationError& e) {
    g_last_error = e.what();
    return SEQTPE_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SEQTPE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SEQTPE_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw seqtpe::InvalidArgument(what);
}

seqtpe::fock::Energy to_energy(int v) {
  require(v == 0 || v == 1, "energy must be 0 (B) or 1 (X)");
  return v == 0 ? seqtpe::fock::Energy::B : seqtpe::fock::Energy::X;
}

seqtpe::fock::TimeBin to_bin(int v) {
  require(v == 0 || v == 1, "bin must be 0 (early) or 1 (late)");
  return v == 0 ? seqtpe::fock::TimeBin::Early : seqtpe::fock::TimeBin::Late;
}

std::set<int> parse_channels(const char* text) {
  require(text != nullptr && *text != '\0', "channel list must not be empty");
  std::set<int> channels;
  const std::string s = text;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      const int ch = std::stoi(item, &used);
      require(used == item.size(), "bad channel id in channel list");
      channels.insert(ch);
    } catch (const seqtpe::InvalidArgument&) {
      throw;
    } catch (...) {
      throw seqtpe::InvalidArgument("bad channel id '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return channels;
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    require(used == value.size(), "trailing characters in numeric value");
    return v;
  } catch (const seqtpe::InvalidArgument&) {
    throw;
  } catch (...) {
    throw seqtpe::InvalidArgument("cannot parse value '" + value + "' for key " + key);
  }
}

std::int64_t parse_i64(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    require(used == value.size(), "trailing characters in integer value");
    return v;
  } catch (const seqtpe::InvalidArgument&) {
    throw;
  } catch (...) {
    throw seqtpe::InvalidArgument("cannot parse value '" + value + "' for key " + key);
  }
}

}  // namespace

struct seqtpe_sim_config {
  seqtpe::mc::ExperimentConfig config;
};

extern "C" {

const char* seqtpe_version(void) { return "1.0.0"; }

const char* seqtpe_last_error(void) { return g_last_error.c_str(); }

seqtpe_status seqtpe_coefficients(double tau_b_ps, double tau_x_ps, double dt_ps,
                                  double out[3]) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    const auto c = seqtpe::protocol::coefficients(tau_b_ps, tau_x_ps, dt_ps);
    out[0] = c.alpha_sq;
    out[1] = c.beta_sq;
    out[2] = c.gamma_sq;
  });
}

seqtpe_status seqtpe_mean_photon_number(double tau_b_ps, double tau_x_ps, double dt_ps,
                                        double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = seqtpe::protocol::mean_photon_number(
        seqtpe::protocol::coefficients(tau_b_ps, tau_x_ps, dt_ps));
  });
}

seqtpe_status seqtpe_analytic_g2(double tau_b_ps, double tau_x_ps, double dt_ps, int energy1,
                                 int bin1, int energy2, int bin2, double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    const auto g2 = seqtpe::protocol::analytic_g2(
        seqtpe::protocol::coefficients(tau_b_ps, tau_x_ps, dt_ps), to_energy(energy1),
        to_bin(bin1), to_energy(energy2), to_bin(bin2));
    *out = g2 ? *g2 : std::numeric_limits<double>::quiet_NaN();
  });
}

seqtpe_status seqtpe_max_indistinguishability(double tau_b_ps, double tau_x_ps, double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = seqtpe::protocol::max_indistinguishability(tau_b_ps, tau_x_ps);
  });
}

seqtpe_status seqtpe_hom_g2_analytic(double tau_b_ps, double tau_x_ps, double dt_ps,
                                     double phi, double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    const auto g2 = seqtpe::protocol::hom_g2_analytic(
        seqtpe::protocol::coefficients(tau_b_ps, tau_x_ps, dt_ps), phi);
    *out = g2 ? *g2 : std::numeric_limits<double>::quiet_NaN();
  });
}

seqtpe_status seqtpe_hom_g2_oracle(double tau_b_ps, double tau_x_ps, double dt_ps, double phi,
                                   double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    const auto g2 = seqtpe::protocol::hom_g2_oracle(
        seqtpe::protocol::coefficients(tau_b_ps, tau_x_ps, dt_ps), phi);
    *out = g2 ? *g2 : std::numeric_limits<double>::quiet_NaN();
  });
}

seqtpe_status seqtpe_mutual_information_partitions(double tau_b_ps, double tau_x_ps,
                                                   double dt_ps, uint32_t* part1_masks,
                                                   double* bits, size_t cap, size_t* count) {
  return guarded([&] {
    require(part1_masks != nullptr && bits != nullptr && count != nullptr,
            "output pointers are null");
    const auto table = seqtpe::protocol::mutual_information_partitions(
        seqtpe::protocol::coefficients(tau_b_ps, tau_x_ps, dt_ps));
    require(cap >= table.size(), "output capacity below the 7 bipartitions");
    for (std::size_t i = 0; i < table.size(); ++i) {
      part1_masks[i] = table[i].part1_mask;
      bits[i] = table[i].mutual_information_bits;
    }
    *count = table.size();
  });
}

seqtpe_status seqtpe_sim_config_create(seqtpe_sim_config** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new seqtpe_sim_config{};
  });
}

void seqtpe_sim_config_destroy(seqtpe_sim_config* config) { delete config; }

seqtpe_status seqtpe_sim_config_set(seqtpe_sim_config* config, const char* key,
                                    const char* value) {
  return guarded([&] {
    require(config != nullptr, "config handle is null");
    require(key != nullptr && value != nullptr, "key and value must not be null");
    const std::string k = key;
    const std::string v = value;
    auto& c = config->config;
    if (k == "tau_b") c.params.tau_b_ps = parse_double(v, k);
    else if (k == "tau_x") c.params.tau_x_ps = parse_double(v, k);
    else if (k == "dt") c.params.delta_t_ps = parse_double(v, k);
    else if (k == "fprep") c.params.prep_fidelity = parse_double(v, k);
    else if (k == "efficiency") c.detector.efficiency = parse_double(v, k);
    else if (k == "jitter") c.detector.jitter_sigma_ps = parse_double(v, k);
    else if (k == "deadtime") c.detector.deadtime_ps = parse_double(v, k);
    else if (k == "dark_rate") c.detector.dark_rate_hz = parse_double(v, k);
    else if (k == "split_ratio") c.detector.splitter_ratio = parse_double(v, k);
    else if (k == "polarization") {
      if (v == "none") c.detector.filter = seqtpe::mc::PolarizationFilter::None;
      else if (v == "h") c.detector.filter = seqtpe::mc::PolarizationFilter::H;
      else if (v == "v") c.detector.filter = seqtpe::mc::PolarizationFilter::V;
      else throw seqtpe::InvalidArgument("polarization must be h, v or none");
    } else if (k == "rep_period") c.rep_period_ps = parse_i64(v, k);
    else if (k == "cycles") c.n_cycles = parse_i64(v, k);
    else if (k == "pulses") c.n_pulses = static_cast<int>(parse_i64(v, k));
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_i64(v, k));
    else if (k == "workers") c.workers = static_cast<int>(parse_i64(v, k));
    else if (k == "min_dt") c.min_delta_t_ps = parse_double(v, k);
    else throw seqtpe::InvalidArgument("unknown configuration key '" + k + "'");
  });
}

seqtpe_status seqtpe_simulate_to_file(const seqtpe_sim_config* config,
                                      const char* tags_path) {
  return guarded([&] {
    require(config != nullptr, "config handle is null");
    require(tags_path != nullptr, "tag path is null");
    const auto stream = seqtpe::mc::run_experiment(config->config);
    seqtpe::mc::write_tags_file(stream, tags_path);
  });
}

seqtpe_status seqtpe_hom_synthesize_to_file(const seqtpe_sim_config* config,
                                            const char* phase_mode, double phi,
                                            double stability_s, double duration_s,
                                            const char* tags_path) {
  return guarded([&] {
    require(config != nullptr, "config handle is null");
    require(phase_mode != nullptr && tags_path != nullptr,
            "phase mode and tag path must not be null");
    seqtpe::mc::HomSynthConfig synth;
    synth.params = config->config.params;
    synth.detector = config->config.detector;
    synth.rep_period_ps = config->config.rep_period_ps;
    synth.seed = config->config.seed;
    synth.duration_s = duration_s;
    synth.phase.phi = phi;
    synth.phase.stability_interval_s = stability_s;
    const std::string mode = phase_mode;
    if (mode == "const") synth.phase.mode = seqtpe::mc::PhaseModel::Mode::Constant;
    else if (mode == "random")
      synth.phase.mode = seqtpe::mc::PhaseModel::Mode::RandomPerInterval;
    else throw seqtpe::InvalidArgument("phase mode must be 'const' or 'random'");
    seqtpe::mc::write_tags_file(seqtpe::mc::synth_hom_stream(synth), tags_path);
  });
}

seqtpe_status seqtpe_analyze_histogram(const char* tags_path, const char* channels,
                                       int64_t bin_width_ps, int64_t origin_ps,
                                       const char* out_csv) {
  return guarded([&] {
    require(tags_path != nullptr && out_csv != nullptr, "paths must not be null");
    const auto stream = seqtpe::mc::read_tags_file(tags_path);
    const auto hist = seqtpe::correlate::arrival_histogram(
        stream, parse_channels(channels), stream.rep_period_ps, bin_width_ps, origin_ps);
    seqtpe::correlate::write_histogram_csv(hist, out_csv);
  });
}

seqtpe_status seqtpe_analyze_map(const char* tags_path, const char* channels_a,
                                 const char* channels_b, int64_t bin_width_ps,
                                 const char* pairing, const char* out_csv) {
  return guarded([&] {
    require(tags_path != nullptr && out_csv != nullptr && pairing != nullptr,
            "paths and pairing must not be null");
    const std::string mode = pairing;
    seqtpe::correlate::Pairing p;
    if (mode == "same") p = seqtpe::correlate::Pairing::SameCycle;
    else if (mode == "displaced") p = seqtpe::correlate::Pairing::DisplacedOneCycle;
    else throw seqtpe::InvalidArgument("pairing must be 'same' or 'displaced'");
    const auto stream = seqtpe::mc::read_tags_file(tags_path);
    const auto map = seqtpe::correlate::two_time_map(
        stream, parse_channels(channels_a), parse_channels(channels_b),
        stream.rep_period_ps, bin_width_ps, p);
    seqtpe::correlate::write_map_csv(map, out_csv);
  });
}

seqtpe_status seqtpe_analyze_quadrants(const char* tags_path, int64_t bin_width_ps,
                                       double dt_ps, double t0_ps, const char* out_csv) {
  return guarded([&] {
    require(tags_path != nullptr && out_csv != nullptr, "paths must not be null");
    const auto stream = seqtpe::mc::read_tags_file(tags_path);

    double dt = dt_ps;
    if (std::isnan(dt)) {
      const auto header_dt = stream.extra("dt_ps");
      require(header_dt.has_value(), "dt not given and tag file carries no dt_ps key");
      dt = parse_double(*header_dt, "dt_ps");
      require(std::isfinite(dt), "tag file dt_ps key is not finite");
    }

    const auto b_list = stream.channels_for("B");
    const auto x_list = stream.channels_for("X");
    require(b_list.size() == 2 && x_list.size() == 2,
            "quadrant analysis needs two B and two X channels");
    const std::set<int> b_all(b_list.begin(), b_list.end());
    const std::set<int> x_all(x_list.begin(), x_list.end());

    double t0 = t0_ps;
    if (std::isnan(t0)) {
      // Recover the pulse arrival from the B arrival histogram; rotate the
      // fold so the onset sits mid-window with its jitter tail intact.
      const auto hist = seqtpe::correlate::arrival_histogram(
          stream, b_all, stream.rep_period_ps, bin_width_ps, -stream.rep_period_ps / 2);
      t0 = seqtpe::correlate::fit_emg(hist).t0_ps;
    }

    const std::set<int> pair_sets[4][2] = {{{b_list[0]}, {b_list[1]}},
                                           {b_all, x_all},
                                           {x_all, b_all},
                                           {{x_list[0]}, {x_list[1]}}};
    const char* pair_names[4] = {"B-B", "B-X", "X-B", "X-X"};

    std::vector<seqtpe::correlate::QuadrantRow> rows;
    for (int p = 0; p < 4; ++p) {
      const auto same = seqtpe::correlate::two_time_map(
          stream, pair_sets[p][0], pair_sets[p][1], stream.rep_period_ps, bin_width_ps,
          seqtpe::correlate::Pairing::SameCycle);
      const auto displaced = seqtpe::correlate::two_time_map(
          stream, pair_sets[p][0], pair_sets[p][1], stream.rep_period_ps, bin_width_ps,
          seqtpe::correlate::Pairing::DisplacedOneCycle);
      const auto quad = seqtpe::correlate::quadrant_g2(same, displaced, t0, dt);
      for (int q = 0; q < 4; ++q) {
        rows.push_back({dt, pair_names[p], static_cast<seqtpe::correlate::Quadrant>(q),
                        quad.raw[static_cast<std::size_t>(q)],
                        quad.g2[static_cast<std::size_t>(q)]});
      }
    }
    seqtpe::correlate::write_quadrant_csv(rows, out_csv);
  });
}

seqtpe_status seqtpe_analyze_mu(const char* const* two_pulse_paths, size_t n_two,
                                const char* one_pulse_path, const char* out_csv) {
  return guarded([&] {
    require(two_pulse_paths != nullptr && n_two > 0, "need at least one two-pulse file");
    require(one_pulse_path != nullptr && out_csv != nullptr, "paths must not be null");

    std::vector<seqtpe::mc::TagStream> streams;
    streams.reserve(n_two);
    std::vector<std::pair<double, const seqtpe::mc::TagStream*>> two_pulse;
    for (std::size_t i = 0; i < n_two; ++i) {
      streams.push_back(seqtpe::mc::read_tags_file(two_pulse_paths[i]));
      const auto dt = streams.back().extra("dt_ps");
      require(dt.has_value(), "two-pulse tag file carries no dt_ps key");
      two_pulse.emplace_back(parse_double(*dt, "dt_ps"), nullptr);
      require(std::isfinite(two_pulse.back().first), "two-pulse tag file dt_ps is not finite");
    }
    for (std::size_t i = 0; i < n_two; ++i) two_pulse[i].second = &streams[i];

    const auto one_pulse = seqtpe::mc::read_tags_file(one_pulse_path);
    const auto b = one_pulse.channels_for("B");
    const auto x = one_pulse.channels_for("X");
    require(!b.empty() && !x.empty(), "single-pulse file has no B/X channel roles");

    const auto points = seqtpe::correlate::mean_photon_curve(
        two_pulse, one_pulse, {b.begin(), b.end()}, {x.begin(), x.end()});
    seqtpe::correlate::write_mu_csv(points, out_csv);
  });
}

seqtpe_status seqtpe_analyze_hom(const char* tags_path, double window_s, double shift_s,
                                 int side_peaks, const char* out_csv, double* mean,
                                 double* stddev, size_t* excluded) {
  return guarded([&] {
    require(tags_path != nullptr && out_csv != nullptr, "paths must not be null");
    const auto stream = seqtpe::mc::read_tags_file(tags_path);
    const auto result =
        seqtpe::correlate::hom_windowed_g2(stream, window_s, shift_s, side_peaks);
    seqtpe::correlate::write_hom_series_csv(result, out_csv);
    if (mean) *mean = result.mean;
    if (stddev) *stddev = result.stddev;
    if (excluded) *excluded = result.windows_excluded;
  });
}

seqtpe_status seqtpe_fit_emg(const char* tags_path, const char* channels,
                             int64_t bin_width_ps, int64_t origin_ps, double fix_sigma_ps,
                             double out_params[4], double* residual_norm) {
  return guarded([&] {
    require(tags_path != nullptr && out_params != nullptr, "pointers must not be null");
    const auto stream = seqtpe::mc::read_tags_file(tags_path);
    const auto hist = seqtpe::correlate::arrival_histogram(
        stream, parse_channels(channels), stream.rep_period_ps, bin_width_ps, origin_ps);
    std::optional<double> fixed;
    if (!std::isnan(fix_sigma_ps)) fixed = fix_sigma_ps;
    const auto fit = seqtpe::correlate::fit_emg(hist, fixed);
    out_params[0] = fit.t0_ps;
    out_params[1] = fit.tau_ps;
    out_params[2] = fit.sigma_ps;
    out_params[3] = fit.amplitude;
    if (residual_norm) *residual_norm = fit.residual_norm;
  });
}

seqtpe_status seqtpe_report(const seqtpe_sim_config* config, const char* out_dir) {
  return guarded([&] {
    require(config != nullptr, "config handle is null");
    require(out_dir != nullptr, "output directory is null");
    seqtpe::report::ReportConfig rc;
    rc.base = config->config;
    rc.out_dir = out_dir;
    seqtpe::report::run_report(rc);
  });
}

}  // extern "C"
