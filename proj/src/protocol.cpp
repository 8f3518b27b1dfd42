#include "seqtpe/protocol.hpp"

#include <cmath>

namespace seqtpe::protocol {

using fock::Complex;
using fock::Energy;
using fock::ModeLabel;
using fock::ModeRegister;
using fock::PureState;
using fock::Spatial;
using fock::TimeBin;

namespace {

constexpr double kDegenerateRelTol = 1e-6;
constexpr double kMeanFloor = 1e-12;

void check_lifetimes(double tau_b_ps, double tau_x_ps) {
  if (!(std::isfinite(tau_b_ps) && tau_b_ps > 0.0) ||
      !(std::isfinite(tau_x_ps) && tau_x_ps > 0.0))
    throw InvalidArgument("lifetimes must be finite and strictly positive");
}

std::vector<ModeLabel> psi_modes(Spatial spatial) {
  return {{Energy::B, TimeBin::Early, spatial},
          {Energy::X, TimeBin::Early, spatial},
          {Energy::B, TimeBin::Late, spatial},
          {Energy::X, TimeBin::Late, spatial}};
}

PureState psi_in_arm(const Coefficients& c, Spatial spatial, double phi) {
  // Each photon travelling in this arm picks up exp(i phi): the two-photon
  // term carries 2 phi, the four-photon term 4 phi.
  const Complex phase2 = std::polar(1.0, 2.0 * phi);
  const Complex phase4 = std::polar(1.0, 4.0 * phi);
  return PureState::from_terms(ModeRegister(psi_modes(spatial), 2),
                               {{{0, 0, 0, 0}, Complex{c.alpha(), 0.0}},
                                {{1, 0, 0, 1}, c.beta() * phase2},
                                {{1, 1, 1, 1}, c.gamma() * phase4}});
}

}  // namespace

void CascadeParams::validate() const {
  check_lifetimes(tau_b_ps, tau_x_ps);
  if (!(std::isfinite(delta_t_ps) && delta_t_ps >= 0.0))
    throw InvalidArgument("pulse separation must be finite and non-negative");
  if (!(prep_fidelity >= 0.0 && prep_fidelity <= 1.0))
    throw InvalidArgument("preparation fidelity must be in [0, 1]");
}

double Coefficients::alpha() const { return std::sqrt(alpha_sq); }
double Coefficients::beta() const { return std::sqrt(beta_sq); }
double Coefficients::gamma() const { return std::sqrt(gamma_sq); }

Coefficients coefficients(double tau_b_ps, double tau_x_ps, double delta_t_ps) {
  check_lifetimes(tau_b_ps, tau_x_ps);
  if (!(std::isfinite(delta_t_ps) && delta_t_ps >= 0.0))
    throw InvalidArgument("pulse separation must be finite and non-negative");

  const double gb = 1.0 / tau_b_ps;
  const double gx = 1.0 / tau_x_ps;
  const double alpha_sq = std::exp(-gb * delta_t_ps);

  double beta_sq;
  if (std::abs(gx - gb) < kDegenerateRelTol * gb) {
    beta_sq = gb * delta_t_ps * std::exp(-gb * delta_t_ps);
  } else {
    beta_sq = gb * (std::exp(-gb * delta_t_ps) - std::exp(-gx * delta_t_ps)) / (gx - gb);
  }
  return {alpha_sq, beta_sq, 1.0 - alpha_sq - beta_sq};
}

Coefficients coefficients(const CascadeParams& p) {
  return coefficients(p.tau_b_ps, p.tau_x_ps, p.delta_t_ps);
}

ModeRegister psi_register(int cutoff) {
  return ModeRegister(psi_modes(Spatial::None), cutoff);
}

PureState build_psi(const Coefficients& c) {
  return PureState::from_terms(psi_register(),
                               {{{0, 0, 0, 0}, Complex{c.alpha(), 0.0}},
                                {{1, 0, 0, 1}, Complex{c.beta(), 0.0}},
                                {{1, 1, 1, 1}, Complex{c.gamma(), 0.0}}});
}

PureState build_psi(const CascadeParams& p) { return build_psi(coefficients(p)); }

double mean_photon_number(const Coefficients& c) { return c.beta_sq + 2.0 * c.gamma_sq; }

double mean_photon_number(const CascadeParams& p) {
  return mean_photon_number(coefficients(p));
}

std::optional<double> analytic_g2(const Coefficients& c, Energy e1, TimeBin b1, Energy e2,
                                  TimeBin b2) {
  if (e1 == e2 && b1 == b2) {
    // Same mode: at most one photon ever occupies it, so the normalized
    // coincidence vanishes whenever the mean occupation does not.
    const double mean = (b1 == TimeBin::Early && e1 == Energy::B) ||
                                (b1 == TimeBin::Late && e1 == Energy::X)
                            ? c.beta_sq + c.gamma_sq
                            : c.gamma_sq;
    if (mean < kMeanFloor) return std::nullopt;
    return 0.0;
  }
  const bool b_late_x_early = (e1 == Energy::B && b1 == TimeBin::Late && e2 == Energy::X &&
                               b2 == TimeBin::Early) ||
                              (e2 == Energy::B && b2 == TimeBin::Late && e1 == Energy::X &&
                               b1 == TimeBin::Early);
  if (b_late_x_early) {
    if (c.gamma_sq < kMeanFloor) return std::nullopt;
    return 1.0 / c.gamma_sq;
  }
  const double bg = c.beta_sq + c.gamma_sq;
  if (bg < kMeanFloor || c.gamma_sq < kMeanFloor) return std::nullopt;
  return 1.0 / bg;
}

std::optional<double> analytic_g2(const CascadeParams& p, Energy e1, TimeBin b1, Energy e2,
                                  TimeBin b2) {
  return analytic_g2(coefficients(p), e1, b1, e2, b2);
}

PureState single_pulse_state(double theta_rad) {
  const double c = std::cos(0.5 * theta_rad);
  const double s = std::sin(0.5 * theta_rad);
  return PureState::from_terms(
      ModeRegister({{Energy::B, TimeBin::Early, Spatial::None},
                    {Energy::X, TimeBin::Early, Spatial::None}},
                   2),
      {{{0, 0}, Complex{c, 0.0}}, {{1, 1}, Complex{s, 0.0}}});
}

double max_indistinguishability(double tau_b_ps, double tau_x_ps) {
  check_lifetimes(tau_b_ps, tau_x_ps);
  return 1.0 / (1.0 + tau_b_ps / tau_x_ps);
}

PureState hom_input_state(const Coefficients& c, double phi) {
  return tensor_product(psi_in_arm(c, Spatial::A, 0.0), psi_in_arm(c, Spatial::B, phi));
}

PureState hom_input_state(const CascadeParams& p, double phi) {
  return hom_input_state(coefficients(p), phi);
}

PureState hom_output_state(const Coefficients& c, double phi) {
  std::vector<fock::BsPair> pairs;
  for (const Energy e : {Energy::B, Energy::X}) {
    for (const TimeBin b : {TimeBin::Early, TimeBin::Late}) {
      pairs.push_back({{e, b, Spatial::A},
                       {e, b, Spatial::B},
                       {e, b, Spatial::C},
                       {e, b, Spatial::D}});
    }
  }
  return beamsplitter(hom_input_state(c, phi), pairs, 0.5);
}

PureState hom_output_state(const CascadeParams& p, double phi) {
  return hom_output_state(coefficients(p), phi);
}

std::optional<double> hom_g2_analytic(const Coefficients& c, double phi) {
  const double a2 = c.alpha_sq, b2 = c.beta_sq, g2 = c.gamma_sq;
  const double mu = b2 + 2.0 * g2;
  if (mu < kMeanFloor) return std::nullopt;
  const double den = 4.0 * mu * mu;
  const double steady =
      2.0 * b2 * b2 + 13.0 * b2 * g2 + 12.0 * g2 * g2 + a2 * (b2 + 6.0 * g2);
  const double oscillating = b2 * (a2 + g2) * std::cos(2.0 * phi);
  return (steady - oscillating) / den;
}

std::optional<double> hom_g2_analytic(const CascadeParams& p, double phi) {
  return hom_g2_analytic(coefficients(p), phi);
}

std::optional<double> hom_g2_oracle(const Coefficients& c, double phi) {
  if (mean_photon_number(c) < kMeanFloor) return std::nullopt;
  const PureState out = hom_output_state(c, phi);
  const auto& reg = out.reg();

  std::vector<std::size_t> c_positions, d_positions;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    (reg.modes()[i].spatial == Spatial::C ? c_positions : d_positions).push_back(i);
  }

  double mean_c = 0.0, mean_d = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < out.amplitudes().size(); ++i) {
    const double p = std::norm(out.amplitudes()[i]);
    if (p == 0.0) continue;
    double nc = 0.0, nd = 0.0;
    for (const std::size_t pos : c_positions) nc += reg.digit(i, pos);
    for (const std::size_t pos : d_positions) nd += reg.digit(i, pos);
    mean_c += p * nc;
    mean_d += p * nd;
    cross += p * nc * nd;  // c and d are distinct modes: already normally ordered
  }
  return cross / (mean_c * mean_d);
}

std::optional<double> hom_g2_oracle(const CascadeParams& p, double phi) {
  return hom_g2_oracle(coefficients(p), phi);
}

std::vector<PartitionEntry> mutual_information_partitions(const Coefficients& c) {
  const PureState psi = build_psi(c);
  const auto& modes = psi.reg().modes();

  std::vector<PartitionEntry> table;
  // Unordered bipartitions of 4 modes: part 1 is every subset containing
  // mode 0, except the full set.
  for (unsigned mask = 1; mask < 0xF; mask += 2) {
    std::vector<ModeLabel> part1, part2;
    for (std::size_t i = 0; i < modes.size(); ++i)
      ((mask >> i) & 1u ? part1 : part2).push_back(modes[i]);
    table.push_back({mask, fock::mutual_information_bits(psi, part1, part2)});
  }
  return table;
}

std::vector<PartitionEntry> mutual_information_partitions(const CascadeParams& p) {
  return mutual_information_partitions(coefficients(p));
}

}  // namespace seqtpe::protocol
