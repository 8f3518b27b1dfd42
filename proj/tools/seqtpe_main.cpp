// Command-line front end. Everything physics-related goes through the C API
// of libseqtpe; this file only parses flags, shuttles file paths and formats
// the small analytic outputs as CSV.
//
// All flags live on the top-level app and fall through the subcommands, so a
// flat key=value --config file (TOML syntax) can set any of them; flags given
// on the command line override file values.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 data or parse error,
// 3 numerical failure (e.g. a fit that does not converge).

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqtpe.h"

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

int exit_code_for(seqtpe_status status) {
  switch (status) {
    case SEQTPE_OK: return 0;
    case SEQTPE_ERR_INVALID_ARGUMENT: return 1;
    case SEQTPE_ERR_PARSE: return 2;
    case SEQTPE_ERR_IO: return 2;
    case SEQTPE_ERR_NUMERIC: return 3;
    default: return 3;
  }
}

void check(seqtpe_status status) {
  if (status != SEQTPE_OK) {
    std::cerr << "seqtpe: " << seqtpe_last_error() << "\n";
    std::exit(exit_code_for(status));
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Analytic CSV goes either to --out or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) {
        std::cerr << "seqtpe: cannot open " << path << " for writing\n";
        std::exit(2);
      }
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct ConfigHandle {
  ConfigHandle() { check(seqtpe_sim_config_create(&ptr)); }
  ~ConfigHandle() { seqtpe_sim_config_destroy(ptr); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;

  void set(const char* key, const std::string& value) {
    check(seqtpe_sim_config_set(ptr, key, value.c_str()));
  }

  seqtpe_sim_config* ptr = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential two-photon-excitation cascade: analytic model, Monte Carlo "
               "time-tag simulator and correlation analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "Read flag values from a TOML file (flags override it)");

  // Cascade and detector parameters.
  double tau_b = 142.0, tau_x = 187.0, dt = 100.0, fprep = 0.9;
  double efficiency = 0.8, jitter = 40.0, deadtime = 100000.0, dark_rate = 0.0;
  double split_ratio = 0.5, min_dt = 12.0;
  std::string polarization = "none";
  std::int64_t rep_period = 12500, cycles = 100000;
  int pulses = 2, workers = 1;
  std::uint64_t seed = 1;

  app.add_option("--tau-b", tau_b, "Biexciton lifetime [ps]")->capture_default_str();
  app.add_option("--tau-x", tau_x, "Exciton lifetime [ps]")->capture_default_str();
  app.add_option("--dt", dt, "Pulse separation [ps]")->capture_default_str();
  app.add_option("--fprep", fprep, "Preparation fidelity")->capture_default_str();
  app.add_option("--efficiency", efficiency, "Detection efficiency per channel")
      ->capture_default_str();
  app.add_option("--jitter", jitter, "Detector timing jitter sigma [ps]")
      ->capture_default_str();
  app.add_option("--deadtime", deadtime, "Detector dead-time [ps]")->capture_default_str();
  app.add_option("--dark-rate", dark_rate, "Dark count rate per channel [Hz]")
      ->capture_default_str();
  app.add_option("--split-ratio", split_ratio,
                 "Probability of the first channel of each energy pair")
      ->capture_default_str();
  app.add_option("--polarization", polarization, "Polarization filter: h, v or none")
      ->capture_default_str();
  app.add_option("--rep-period", rep_period, "Laser repetition period [ps]")
      ->capture_default_str();
  app.add_option("--cycles", cycles, "Number of excitation cycles")->capture_default_str();
  app.add_option("--pulses", pulses, "Excitation pulses per cycle (1 or 2)")
      ->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads (output independent of it)")
      ->capture_default_str();
  app.add_option("--min-dt", min_dt, "Smallest accepted pulse separation [ps]")
      ->capture_default_str();

  // Sweep, analysis and output settings.
  double dt_min = 1.0, dt_max = 1000.0;
  int dt_points = 1, phi_points = 1;
  bool dt_log = false;
  double phi = 0.0, window = 1.0, shift = 0.005, stability = 1.0, duration = 1.0;
  double quad_dt = std::nan(""), quad_t0 = std::nan("");
  int side_peaks = 6;
  std::int64_t bin_width = 25, origin = 0;
  std::string channels = "1,2", channels_b = "3,4", pairing = "same";
  std::string phase_mode = "const";
  std::string out_path, out_dir, tags_path, one_pulse_path;
  std::vector<std::string> input_paths;

  app.add_option("--dt-min", dt_min, "Delay sweep start [ps]")->capture_default_str();
  app.add_option("--dt-max", dt_max, "Delay sweep end [ps]")->capture_default_str();
  app.add_option("--dt-points", dt_points, "Delay sweep points (1 = use --dt)")
      ->capture_default_str();
  app.add_flag("--dt-log", dt_log, "Log-spaced delay sweep");
  app.add_option("--phi", phi, "Relative interferometer phase [rad]")
      ->capture_default_str();
  app.add_option("--phi-points", phi_points, "Phase sweep points over [0, pi)")
      ->capture_default_str();
  app.add_option("--bin-width", bin_width, "Histogram/map bin width [ps]")
      ->capture_default_str();
  app.add_option("--origin", origin, "Histogram fold origin [ps]")->capture_default_str();
  app.add_option("--channels", channels, "Channel set, e.g. 1,2")->capture_default_str();
  app.add_option("--channels-b", channels_b, "Second channel set for maps")
      ->capture_default_str();
  app.add_option("--pairing", pairing, "Map pairing: same or displaced")
      ->capture_default_str();
  app.add_option("--quad-dt", quad_dt,
                 "Pulse separation for quadrants [ps] (default: dt_ps file key)");
  app.add_option("--t0", quad_t0, "Pulse arrival for quadrants [ps] (default: fitted)");
  app.add_option("--window", window, "Interference analysis window [s]")
      ->capture_default_str();
  app.add_option("--shift", shift, "Window shift [s]")->capture_default_str();
  app.add_option("--side-peaks", side_peaks, "Side peaks used for normalization")
      ->capture_default_str();
  app.add_option("--phase-mode", phase_mode, "Synthesized phase: const or random")
      ->capture_default_str();
  app.add_option("--stability", stability, "Phase stability interval [s]")
      ->capture_default_str();
  app.add_option("--duration", duration, "Synthesized stream duration [s]")
      ->capture_default_str();
  app.add_option("--tags", tags_path, "Input tag file");
  app.add_option("--inputs", input_paths, "Two-pulse tag files for the mean-photon curve");
  app.add_option("--one-pulse", one_pulse_path, "Single-pulse reference tag file");
  app.add_option("--out", out_path, "Output file");
  app.add_option("--out-dir", out_dir, "Report output directory (must exist)");

  auto* analytic = app.add_subcommand(
      "analytic", "Populations, mean photon number and mode-pair correlations");
  auto* mutual = app.add_subcommand("mutual-info",
                                    "Mutual information of all 7 bipartitions [bits]");
  auto* simulate = app.add_subcommand("simulate", "Generate a detector time-tag file");
  auto* analyze = app.add_subcommand("analyze", "Extract observables from tag files");
  analyze->require_subcommand(1);
  auto* hist_cmd = analyze->add_subcommand("hist", "Folded arrival-time histogram");
  auto* map_cmd = analyze->add_subcommand("map", "Two-time coincidence map");
  auto* quad_cmd = analyze->add_subcommand(
      "quadrants", "Quadrant-normalized correlations of all energy pairs");
  auto* mu_cmd = analyze->add_subcommand(
      "mu", "Mean photon number per energy mode vs pulse separation");
  auto* hom = app.add_subcommand("hom", "Two-copy interference toolbox");
  hom->require_subcommand(1);
  auto* hom_analytic = hom->add_subcommand("analytic", "Closed-form correlation");
  auto* hom_oracle = hom->add_subcommand("oracle", "Brute-force Fock-space correlation");
  auto* hom_synth = hom->add_subcommand("synthesize", "Synthetic two-output tag stream");
  auto* hom_analyze = hom->add_subcommand("analyze", "Windowed cross-output correlation");
  auto* report = app.add_subcommand(
      "report", "Full pipeline: analytic curves plus simulated and analyzed tag data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto require_path = [](const std::string& value, const char* flag) {
    if (value.empty()) {
      std::cerr << "seqtpe: " << flag << " is required for this subcommand\n";
      std::exit(1);
    }
  };

  auto load_config = [&](ConfigHandle& config) {
    config.set("tau_b", fmt(tau_b));
    config.set("tau_x", fmt(tau_x));
    config.set("dt", fmt(dt));
    config.set("fprep", fmt(fprep));
    config.set("efficiency", fmt(efficiency));
    config.set("jitter", fmt(jitter));
    config.set("deadtime", fmt(deadtime));
    config.set("dark_rate", fmt(dark_rate));
    config.set("split_ratio", fmt(split_ratio));
    config.set("polarization", polarization);
    config.set("rep_period", std::to_string(rep_period));
    config.set("cycles", std::to_string(cycles));
    config.set("pulses", std::to_string(pulses));
    config.set("seed", std::to_string(seed));
    config.set("workers", std::to_string(workers));
    config.set("min_dt", fmt(min_dt));
  };

  auto delay_grid = [&]() {
    std::vector<double> grid;
    if (dt_points <= 1) {
      grid.push_back(dt);
    } else if (dt_log) {
      const double lo = std::log(dt_min), hi = std::log(dt_max);
      for (int i = 0; i < dt_points; ++i)
        grid.push_back(std::exp(lo + (hi - lo) * i / double(dt_points - 1)));
    } else {
      for (int i = 0; i < dt_points; ++i)
        grid.push_back(dt_min + (dt_max - dt_min) * i / double(dt_points - 1));
    }
    return grid;
  };

  if (analytic->parsed()) {
    Output out(out_path);
    out.stream() << "tau_b_ps,tau_x_ps,dt_ps,alpha_sq,beta_sq,gamma_sq,mu,"
                    "g2_same,g2_bl_xe,g2_be_xe,g2_be_bl,g2_be_xl,g2_xe_xl,g2_bl_xl\n";
    for (const double d : delay_grid()) {
      double c[3], mu;
      check(seqtpe_coefficients(tau_b, tau_x, d, c));
      check(seqtpe_mean_photon_number(tau_b, tau_x, d, &mu));
      // (energy, bin) pairs: same-mode, B_l-X_e, then the five remaining.
      const int pairs[7][4] = {{0, 0, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 0}, {0, 0, 0, 1},
                               {0, 0, 1, 1}, {1, 0, 1, 1}, {0, 1, 1, 1}};
      double g2[7];
      for (int i = 0; i < 7; ++i)
        check(seqtpe_analytic_g2(tau_b, tau_x, d, pairs[i][0], pairs[i][1], pairs[i][2],
                                 pairs[i][3], &g2[i]));
      out.stream() << fmt(tau_b) << ',' << fmt(tau_x) << ',' << fmt(d) << ',' << fmt(c[0])
                   << ',' << fmt(c[1]) << ',' << fmt(c[2]) << ',' << fmt(mu);
      for (int i = 0; i < 7; ++i) out.stream() << ',' << fmt(g2[i]);
      out.stream() << "\n";
    }
    return 0;
  }

  if (mutual->parsed()) {
    uint32_t masks[7];
    double bits[7];
    size_t count = 0;
    check(seqtpe_mutual_information_partitions(tau_b, tau_x, dt, masks, bits, 7, &count));
    Output out(out_path);
    out.stream() << "partition,mi_bits\n";
    const char* names[4] = {"B_e", "X_e", "B_l", "X_l"};
    for (size_t i = 0; i < count; ++i) {
      std::string part1, part2;
      for (int m = 0; m < 4; ++m) {
        std::string& side = (masks[i] >> m) & 1u ? part1 : part2;
        if (!side.empty()) side += '+';
        side += names[m];
      }
      out.stream() << part1 << '|' << part2 << ',' << fmt(bits[i]) << "\n";
    }
    return 0;
  }

  if (simulate->parsed()) {
    require_path(out_path, "--out");
    ConfigHandle config;
    load_config(config);
    check(seqtpe_simulate_to_file(config.ptr, out_path.c_str()));
    return 0;
  }

  if (hist_cmd->parsed()) {
    require_path(tags_path, "--tags");
    require_path(out_path, "--out");
    check(seqtpe_analyze_histogram(tags_path.c_str(), channels.c_str(), bin_width, origin,
                                   out_path.c_str()));
    return 0;
  }

  if (map_cmd->parsed()) {
    require_path(tags_path, "--tags");
    require_path(out_path, "--out");
    check(seqtpe_analyze_map(tags_path.c_str(), channels.c_str(), channels_b.c_str(),
                             bin_width, pairing.c_str(), out_path.c_str()));
    return 0;
  }

  if (quad_cmd->parsed()) {
    require_path(tags_path, "--tags");
    require_path(out_path, "--out");
    check(seqtpe_analyze_quadrants(tags_path.c_str(), bin_width, quad_dt, quad_t0,
                                   out_path.c_str()));
    return 0;
  }

  if (mu_cmd->parsed()) {
    require_path(one_pulse_path, "--one-pulse");
    require_path(out_path, "--out");
    if (input_paths.empty()) {
      std::cerr << "seqtpe: --inputs is required for this subcommand\n";
      return 1;
    }
    std::vector<const char*> paths;
    paths.reserve(input_paths.size());
    for (const auto& p : input_paths) paths.push_back(p.c_str());
    check(seqtpe_analyze_mu(paths.data(), paths.size(), one_pulse_path.c_str(),
                            out_path.c_str()));
    return 0;
  }

  if (hom_analytic->parsed() || hom_oracle->parsed()) {
    const bool oracle = hom_oracle->parsed();
    Output out(out_path);
    out.stream() << "dt_ps,phi,g2\n";
    for (const double d : delay_grid()) {
      for (int k = 0; k < phi_points; ++k) {
        const double p = phi_points <= 1 ? phi : kPi * k / double(phi_points);
        double g2;
        check(oracle ? seqtpe_hom_g2_oracle(tau_b, tau_x, d, p, &g2)
                     : seqtpe_hom_g2_analytic(tau_b, tau_x, d, p, &g2));
        out.stream() << fmt(d) << ',' << fmt(p) << ',' << fmt(g2) << "\n";
      }
    }
    return 0;
  }

  if (hom_synth->parsed()) {
    require_path(out_path, "--out");
    ConfigHandle config;
    load_config(config);
    check(seqtpe_hom_synthesize_to_file(config.ptr, phase_mode.c_str(), phi, stability,
                                        duration, out_path.c_str()));
    return 0;
  }

  if (hom_analyze->parsed()) {
    require_path(tags_path, "--tags");
    require_path(out_path, "--out");
    double mean = 0.0, stddev = 0.0;
    size_t excluded = 0;
    check(seqtpe_analyze_hom(tags_path.c_str(), window, shift, side_peaks, out_path.c_str(),
                             &mean, &stddev, &excluded));
    std::cerr << "hom windows: mean=" << fmt(mean) << " stddev=" << fmt(stddev)
              << " excluded=" << excluded << "\n";
    return 0;
  }

  if (report->parsed()) {
    require_path(out_dir, "--out-dir");
    ConfigHandle config;
    load_config(config);
    check(seqtpe_report(config.ptr, out_dir.c_str()));
    return 0;
  }

  std::cerr << app.help();
  return 1;
}
