#include "seqtpe/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "seqtpe/protocol.hpp"

namespace seqtpe::report {

using fock::Energy;
using fock::TimeBin;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::vector<double> default_grid() {
  // 12 log-spaced delays from the supported minimum separation to 5 ns.
  std::vector<double> grid;
  const double lo = std::log(12.0), hi = std::log(5000.0);
  for (int i = 0; i < 12; ++i)
    grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / 11.0));
  return grid;
}

// Independent seeds for the individual simulation runs of one report, so the
// single-pulse reference never reuses the substreams of a two-pulse run.
std::uint64_t run_seed(std::uint64_t base, std::uint64_t k) {
  return base ^ (0x9E3779B97F4A7C15ull * (k + 1));
}

struct PairSpec {
  const char* name;
  Energy e1, e2;
};

constexpr PairSpec kPairs[4] = {{"B-B", Energy::B, Energy::B},
                                {"B-X", Energy::B, Energy::X},
                                {"X-B", Energy::X, Energy::B},
                                {"X-X", Energy::X, Energy::X}};

constexpr TimeBin kQuadBins[4][2] = {{TimeBin::Early, TimeBin::Early},
                                     {TimeBin::Early, TimeBin::Late},
                                     {TimeBin::Late, TimeBin::Early},
                                     {TimeBin::Late, TimeBin::Late}};

}  // namespace

std::vector<std::string> run_report(const ReportConfig& config) {
  mc::ExperimentConfig base = config.base;
  base.validate();
  if (config.out_dir.empty()) throw InvalidArgument("output directory must be set");
  const std::vector<double> grid =
      config.delta_t_grid_ps.empty() ? default_grid() : config.delta_t_grid_ps;
  for (const double dt : grid) {
    if (!(dt >= base.min_delta_t_ps) || dt >= static_cast<double>(base.rep_period_ps))
      throw InvalidArgument("delay grid point " + fmt(dt) + " ps outside supported range");
  }

  std::vector<std::string> written;
  const auto add = [&](const std::string& name) { written.push_back(name); };

  // Populations vs delay for a fast exciton, G_X = 2 G_B.
  {
    auto out = open_out(config.out_dir, "coefficients_fast_x.csv");
    out << "dt_ps,alpha_sq,beta_sq,gamma_sq\n";
    const double tau_b = base.params.tau_b_ps;
    for (int i = 0; i <= 200; ++i) {
      const double dt = 5.0 * tau_b * static_cast<double>(i) / 200.0;
      const auto c = protocol::coefficients(tau_b, 0.5 * tau_b, dt);
      out << fmt(dt) << ',' << fmt(c.alpha_sq) << ',' << fmt(c.beta_sq) << ','
          << fmt(c.gamma_sq) << "\n";
    }
    add("coefficients_fast_x.csv");
  }

  // Mean photon number per energy mode, closed form on a dense grid.
  {
    auto out = open_out(config.out_dir, "mu_curve_analytic.csv");
    out << "delta_t_ps,mu_B,mu_X\n";
    const double lo = std::log(grid.front()), hi = std::log(grid.back());
    for (int i = 0; i <= 120; ++i) {
      const double dt = std::exp(lo + (hi - lo) * static_cast<double>(i) / 120.0);
      const double mu = protocol::mean_photon_number(
          protocol::coefficients(base.params.tau_b_ps, base.params.tau_x_ps, dt));
      out << fmt(dt) << ',' << fmt(mu) << ',' << fmt(mu) << "\n";
    }
    add("mu_curve_analytic.csv");
  }

  // Closed-form mode-pair correlations, labelled by the quadrant they map to.
  {
    auto out = open_out(config.out_dir, "quadrant_g2_analytic.csv");
    out << "delta_t_ps,pair,quadrant,g2\n";
    for (const double dt : grid) {
      const auto c = protocol::coefficients(base.params.tau_b_ps, base.params.tau_x_ps, dt);
      for (const auto& pair : kPairs) {
        for (int q = 0; q < 4; ++q) {
          const auto g2 = protocol::analytic_g2(c, pair.e1, kQuadBins[q][0], pair.e2,
                                                kQuadBins[q][1]);
          out << fmt(dt) << ',' << pair.name << ','
              << correlate::quadrant_name(static_cast<correlate::Quadrant>(q)) << ','
              << (g2 ? fmt(*g2) : "nan") << "\n";
        }
      }
    }
    add("quadrant_g2_analytic.csv");
  }

  // Cross-output interference correlation envelope at phi = 0 and pi/2.
  {
    auto out = open_out(config.out_dir, "hom_phase_envelope.csv");
    out << "delta_t_ps,phi,g2\n";
    constexpr double kHalfPi = 1.57079632679489661923132169163975144;
    for (const double phi : {0.0, kHalfPi}) {
      for (const double dt : grid) {
        const auto g2 = protocol::hom_g2_analytic(
            protocol::coefficients(base.params.tau_b_ps, base.params.tau_x_ps, dt), phi);
        out << fmt(dt) << ',' << fmt(phi) << ',' << (g2 ? fmt(*g2) : "nan") << "\n";
      }
    }
    add("hom_phase_envelope.csv");
  }

  // Monte Carlo sections: one single-pulse reference run, one two-pulse run
  // per grid point, analyzed exactly like measured tag streams.
  std::uint64_t run_index = 0;
  mc::ExperimentConfig single = base;
  single.n_pulses = 1;
  single.seed = run_seed(base.seed, run_index++);
  const mc::TagStream one_pulse = mc::run_experiment(single);

  std::vector<mc::TagStream> streams;
  streams.reserve(grid.size());
  for (const double dt : grid) {
    mc::ExperimentConfig two = base;
    two.params.delta_t_ps = dt;
    two.seed = run_seed(base.seed, run_index++);
    streams.push_back(mc::run_experiment(two));
  }

  const std::set<int> b_channels = {base.detector.b_channels.first,
                                    base.detector.b_channels.second};
  const std::set<int> x_channels = {base.detector.x_channels.first,
                                    base.detector.x_channels.second};

  {
    std::vector<std::pair<double, const mc::TagStream*>> two_pulse;
    for (std::size_t i = 0; i < grid.size(); ++i)
      two_pulse.emplace_back(grid[i], &streams[i]);
    const auto points =
        correlate::mean_photon_curve(two_pulse, one_pulse, b_channels, x_channels);
    correlate::write_mu_csv(points, config.out_dir + "/mu_curve_mc.csv");
    add("mu_curve_mc.csv");
  }

  {
    std::vector<correlate::QuadrantRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double dt = grid[i];
      const std::set<int> pair_sets[4][2] = {
          {{base.detector.b_channels.first}, {base.detector.b_channels.second}},
          {b_channels, x_channels},
          {x_channels, b_channels},
          {{base.detector.x_channels.first}, {base.detector.x_channels.second}}};
      for (int p = 0; p < 4; ++p) {
        const auto same =
            correlate::two_time_map(streams[i], pair_sets[p][0], pair_sets[p][1],
                                    base.rep_period_ps, config.map_bin_width_ps,
                                    correlate::Pairing::SameCycle);
        const auto displaced =
            correlate::two_time_map(streams[i], pair_sets[p][0], pair_sets[p][1],
                                    base.rep_period_ps, config.map_bin_width_ps,
                                    correlate::Pairing::DisplacedOneCycle);
        const auto quad = correlate::quadrant_g2(same, displaced, 0.0, dt);
        for (int q = 0; q < 4; ++q) {
          rows.push_back({dt, kPairs[p].name, static_cast<correlate::Quadrant>(q),
                          quad.raw[static_cast<std::size_t>(q)],
                          quad.g2[static_cast<std::size_t>(q)]});
        }
      }
    }
    correlate::write_quadrant_csv(rows, config.out_dir + "/quadrant_g2_mc.csv");
    add("quadrant_g2_mc.csv");
  }

  {
    auto out = open_out(config.out_dir, "manifest.txt");
    out << "param.tau_b_ps=" << fmt(base.params.tau_b_ps) << "\n";
    out << "param.tau_x_ps=" << fmt(base.params.tau_x_ps) << "\n";
    out << "param.fprep=" << fmt(base.params.prep_fidelity) << "\n";
    out << "param.efficiency=" << fmt(base.detector.efficiency) << "\n";
    out << "param.jitter_ps=" << fmt(base.detector.jitter_sigma_ps) << "\n";
    out << "param.deadtime_ps=" << fmt(base.detector.deadtime_ps) << "\n";
    out << "param.dark_rate_hz=" << fmt(base.detector.dark_rate_hz) << "\n";
    out << "param.split_ratio=" << fmt(base.detector.splitter_ratio) << "\n";
    out << "param.polarization="
        << (base.detector.filter == mc::PolarizationFilter::None
                ? "none"
                : base.detector.filter == mc::PolarizationFilter::H ? "h" : "v")
        << "\n";
    out << "param.rep_period_ps=" << base.rep_period_ps << "\n";
    out << "param.cycles=" << base.n_cycles << "\n";
    out << "param.seed=" << base.seed << "\n";
    out << "param.workers=" << base.workers << "\n";
    out << "param.map_bin_width_ps=" << config.map_bin_width_ps << "\n";
    out << "param.dt_grid_ps=";
    for (std::size_t i = 0; i < grid.size(); ++i) out << (i ? "," : "") << fmt(grid[i]);
    out << "\n";
    out << "param.quadrant_t0_ps=0\n";
    for (const auto& name : written) {
      const auto stem = name.substr(0, name.find('.'));
      out << "output." << stem << '=' << name << "\n";
    }
    out << "output.manifest=manifest.txt\n";
    add("manifest.txt");
  }
  return written;
}

}  // namespace seqtpe::report
