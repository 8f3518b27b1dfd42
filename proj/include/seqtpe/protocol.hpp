#ifndef SEQTPE_PROTOCOL_HPP
#define SEQTPE_PROTOCOL_HPP

#include <optional>
#include <vector>

#include "seqtpe/fock.hpp"

namespace seqtpe::protocol {

/// Physical parameters of the sequentially driven biexciton-exciton cascade.
struct CascadeParams {
  double tau_b_ps = 142.0;
  double tau_x_ps = 187.0;
  double delta_t_ps = 100.0;
  double prep_fidelity = 1.0;

  double gamma_b() const { return 1.0 / tau_b_ps; }
  double gamma_x() const { return 1.0 / tau_x_ps; }
  void validate() const;  // throws InvalidArgument
};

/// Branch probabilities of the three-term state produced by two delayed
/// pi-pulses: stay-in-B / decayed-to-X / decayed-to-ground at the second
/// pulse. Always sums to one.
struct Coefficients {
  double alpha_sq = 1.0;
  double beta_sq = 0.0;
  double gamma_sq = 0.0;

  double alpha() const;
  double beta() const;
  double gamma() const;
};

/// alpha^2 = exp(-G_B dt),
/// beta^2  = G_B (exp(-G_B dt) - exp(-G_X dt)) / (G_X - G_B),
/// gamma^2 = 1 - alpha^2 - beta^2.
/// Within a relative rate difference of 1e-6 the degenerate limit
/// beta^2 = G_B dt exp(-G_B dt) is used; the direct quotient is 0/0 there.
Coefficients coefficients(double tau_b_ps, double tau_x_ps, double delta_t_ps);
Coefficients coefficients(const CascadeParams& p);

/// Canonical four-mode register {B_e, X_e, B_l, X_l} hosting the emitted
/// state. Cutoff 2 is exact for everything produced here, including the
/// bunched beamsplitter outputs downstream.
fock::ModeRegister psi_register(int cutoff = 2);

/// alpha|0000> + beta|1001> + gamma|1111> over psi_register(), with all three
/// amplitudes real and non-negative.
fock::PureState build_psi(const CascadeParams& p);
fock::PureState build_psi(const Coefficients& c);

/// Mean photon number per energy mode (and, by symmetry, per time-bin mode):
/// beta^2 + 2 gamma^2.
double mean_photon_number(const CascadeParams& p);
double mean_photon_number(const Coefficients& c);

/// Closed-form normalized correlations between two (energy, bin) modes of
/// the emitted state: 0 for equal modes, 1/gamma^2 for the {B late, X early}
/// pair, 1/(beta^2 + gamma^2) for every other distinct pair. Empty when the
/// relevant denominator vanishes.
std::optional<double> analytic_g2(const Coefficients& c, fock::Energy e1, fock::TimeBin b1,
                                  fock::Energy e2, fock::TimeBin b2);
std::optional<double> analytic_g2(const CascadeParams& p, fock::Energy e1, fock::TimeBin b1,
                                  fock::Energy e2, fock::TimeBin b2);

/// State after one two-photon pulse of area theta:
/// cos(theta/2)|0_B 0_X> + sin(theta/2)|1_B 1_X>.
fock::PureState single_pulse_state(double theta_rad);

/// Upper bound on two-photon interference visibility from the cascaded
/// decay: 1 / (1 + tau_B / tau_X).
double max_indistinguishability(double tau_b_ps, double tau_x_ps);

/// Interferometer input: a copy of the state in spatial arm a and a copy in
/// arm b, where every photon in arm b carries a phase factor exp(i phi)
/// (so the two-photon term picks up 2 phi and the four-photon term 4 phi).
fock::PureState hom_input_state(const Coefficients& c, double phi);
fock::PureState hom_input_state(const CascadeParams& p, double phi);

/// 50:50 beamsplitter applied per (energy, bin) sector to hom_input_state;
/// eight output modes across spatial arms c and d.
fock::PureState hom_output_state(const Coefficients& c, double phi);
fock::PureState hom_output_state(const CascadeParams& p, double phi);

/// Phase-dependent cross-output correlation when neither spectral nor
/// temporal modes are resolved:
///   [2 b^4 + 13 b^2 g^2 + 12 g^4 + a^2 (b^2 + 6 g^2)
///      - b^2 (a^2 + g^2) cos(2 phi)] / [4 (b^2 + 2 g^2)^2].
/// Empty when beta^2 + 2 gamma^2 = 0 (no photons at all).
std::optional<double> hom_g2_analytic(const Coefficients& c, double phi);
std::optional<double> hom_g2_analytic(const CascadeParams& p, double phi);

/// Brute-force check of hom_g2_analytic: builds hom_output_state and
/// evaluates <:N_c N_d:> / (<N_c><N_d>) with N_c, N_d the total photon
/// number operators of the two output arms. Independent of the closed form.
std::optional<double> hom_g2_oracle(const Coefficients& c, double phi);
std::optional<double> hom_g2_oracle(const CascadeParams& p, double phi);

/// One unordered bipartition of psi_register() and its mutual information.
/// Bit i of part1_mask refers to mode i in canonical order B_e, X_e, B_l,
/// X_l; part 1 always contains B_e, masks ascend.
struct PartitionEntry {
  unsigned part1_mask;
  double mutual_information_bits;
};

/// Mutual information across all 7 bipartitions of the four-mode state.
std::vector<PartitionEntry> mutual_information_partitions(const Coefficients& c);
std::vector<PartitionEntry> mutual_information_partitions(const CascadeParams& p);

}  // namespace seqtpe::protocol

#endif
