#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seqtpe/protocol.hpp"

using namespace seqtpe;
using namespace seqtpe::protocol;
using fock::Energy;
using fock::ModeLabel;
using fock::TimeBin;

namespace {

// Reference point: tau_B = 142 ps, tau_X = 187 ps, dt = 100 ps. Values below
// were computed independently at 30-digit precision from the closed forms.
constexpr double kAlphaSq = 0.49449148270976221;
constexpr double kBetaSq = 0.37948018399404792;
constexpr double kGammaSq = 0.12602833329618986;
constexpr double kMu = 0.63153685058642765;
constexpr double kInvGammaSq = 7.934723675586626;
constexpr double kInvBetaGamma = 1.9782060356974161;
constexpr double kMiSplitEnergy = 2.8189333827287615;  // 2 H(a^2, b^2, g^2)
constexpr double kHomPhi0 = 0.89411487672939094;
constexpr double kHomPhiHalf = 1.1893155664563592;
constexpr double kPi = 3.14159265358979323846264338327950288;

const CascadeParams kRef{142.0, 187.0, 100.0, 1.0};

const double kRatioGrid[6] = {0.1, 0.5, 0.759, 1.0, 2.0, 10.0};

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i)
    g.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / double(n - 1)));
  return g;
}

const ModeLabel kModes[4] = {{Energy::B, TimeBin::Early},
                             {Energy::X, TimeBin::Early},
                             {Energy::B, TimeBin::Late},
                             {Energy::X, TimeBin::Late}};

}  // namespace

TEST_CASE("coefficients at the trivial limits") {
  const auto zero = coefficients(142.0, 187.0, 0.0);
  CHECK(zero.alpha_sq == 1.0);
  CHECK(zero.beta_sq == 0.0);
  CHECK(zero.gamma_sq == 0.0);

  const auto late = coefficients(142.0, 187.0, 1e6);
  CHECK(late.alpha_sq < 1e-300);
  CHECK(late.beta_sq < 1e-300);
  CHECK(late.gamma_sq == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("coefficients at the reference point") {
  const auto c = coefficients(kRef);
  CHECK(c.alpha_sq == doctest::Approx(kAlphaSq).epsilon(1e-14));
  CHECK(c.beta_sq == doctest::Approx(kBetaSq).epsilon(1e-14));
  CHECK(c.gamma_sq == doctest::Approx(kGammaSq).epsilon(1e-14));
}

TEST_CASE("beta^2 peaks at 1/4 when the exciton decays twice as fast") {
  const double tau_b = 142.0;
  const double dt_star = std::log(2.0) * tau_b;
  const auto c = coefficients(tau_b, 0.5 * tau_b, dt_star);
  CHECK(c.beta_sq == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(coefficients(tau_b, 0.5 * tau_b, dt_star * 0.999).beta_sq < c.beta_sq);
  CHECK(coefficients(tau_b, 0.5 * tau_b, dt_star * 1.001).beta_sq < c.beta_sq);
}

TEST_CASE("coefficients close to one on a broad grid of delays and ratios") {
  for (const double ratio : kRatioGrid) {
    for (const double dt : log_grid(1e-2, 1e5, 200)) {
      const auto c = coefficients(142.0, 142.0 / ratio, dt);
      CHECK(std::abs(c.alpha_sq + c.beta_sq + c.gamma_sq - 1.0) < 1e-12);
      CHECK(c.beta_sq >= 0.0);
      CHECK(c.gamma_sq >= -1e-15);
    }
  }
}

TEST_CASE("degenerate-rate branch joins the direct formula continuously") {
  const double tau_b = 142.0;
  for (const double dt : {10.0, 100.0, 500.0}) {
    const auto limit = coefficients(tau_b, tau_b, dt);
    // Inside the switchover the limit branch is used verbatim.
    for (const double eps : {1e-9, -1e-9}) {
      const auto near = coefficients(tau_b, tau_b / (1.0 + eps), dt);
      CHECK(std::abs(near.alpha_sq - limit.alpha_sq) < 1e-7);
      CHECK(std::abs(near.beta_sq - limit.beta_sq) < 1e-7);
      CHECK(std::abs(near.gamma_sq - limit.gamma_sq) < 1e-7);
    }
    // Just outside, the direct quotient must sit close to the limit.
    const auto outside = coefficients(tau_b, tau_b / (1.0 + 2e-6), dt);
    CHECK(std::abs(outside.beta_sq - limit.beta_sq) < 1e-6);
  }
}

TEST_CASE("populations are monotone in the delay") {
  // Strictly monotone where the exponentials have headroom in double
  // precision; beyond that the populations saturate at 0 and 1 exactly.
  for (const double ratio : kRatioGrid) {
    const auto grid = log_grid(1e-1, 2e3, 120);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const auto a = coefficients(142.0, 142.0 / ratio, grid[i - 1]);
      const auto b = coefficients(142.0, 142.0 / ratio, grid[i]);
      CHECK(b.alpha_sq < a.alpha_sq);
      CHECK(b.gamma_sq > a.gamma_sq);
      CHECK(mean_photon_number(b) > mean_photon_number(a));
    }
    for (const double dt : log_grid(2e3, 1e5, 20)) {
      const auto c = coefficients(142.0, 142.0 / ratio, dt);
      CHECK(c.gamma_sq <= 1.0 + 1e-15);
      CHECK(mean_photon_number(c) <= 2.0 + 1e-15);
    }
  }
}

TEST_CASE("coefficients reject invalid parameters") {
  CHECK_THROWS_AS(coefficients(0.0, 187.0, 10.0), InvalidArgument);
  CHECK_THROWS_AS(coefficients(142.0, -1.0, 10.0), InvalidArgument);
  CHECK_THROWS_AS(coefficients(142.0, 187.0, -5.0), InvalidArgument);
}

TEST_CASE("emitted state amplitudes") {
  const auto psi = build_psi(kRef);
  CHECK(psi.amplitude({0, 0, 0, 0}).real() ==
        doctest::Approx(std::sqrt(kAlphaSq)).epsilon(1e-12));
  CHECK(psi.amplitude({1, 0, 0, 1}).real() ==
        doctest::Approx(std::sqrt(kBetaSq)).epsilon(1e-12));
  CHECK(psi.amplitude({1, 1, 1, 1}).real() ==
        doctest::Approx(std::sqrt(kGammaSq)).epsilon(1e-12));

  const auto vac = build_psi(CascadeParams{142.0, 187.0, 0.0, 1.0});
  CHECK(vac.amplitude({0, 0, 0, 0}).real() == doctest::Approx(1.0));

  const auto full = build_psi(CascadeParams{142.0, 187.0, 1e6, 1.0});
  CHECK(std::abs(full.amplitude({1, 1, 1, 1}) - fock::Complex{1.0, 0.0}) < 1e-6);
}

TEST_CASE("mean photon number: values and operator-level consistency") {
  CHECK(mean_photon_number(CascadeParams{142.0, 187.0, 0.0, 1.0}) == 0.0);
  CHECK(mean_photon_number(kRef) == doctest::Approx(kMu).epsilon(1e-14));
  CHECK(mean_photon_number(CascadeParams{142.0, 187.0, 1e6, 1.0}) ==
        doctest::Approx(2.0).epsilon(1e-12));

  for (const double dt : log_grid(1.0, 2000.0, 12)) {
    const CascadeParams p{142.0, 187.0, dt, 1.0};
    const auto psi = build_psi(p);
    const double mu = mean_photon_number(p);
    // Both energy modes and both time-bin modes carry the same mean.
    const double mu_b = number_expectation(psi, kModes[0]) + number_expectation(psi, kModes[2]);
    const double mu_x = number_expectation(psi, kModes[1]) + number_expectation(psi, kModes[3]);
    const double mu_e = number_expectation(psi, kModes[0]) + number_expectation(psi, kModes[1]);
    const double mu_l = number_expectation(psi, kModes[2]) + number_expectation(psi, kModes[3]);
    for (const double v : {mu_b, mu_x, mu_e, mu_l}) CHECK(std::abs(v - mu) < 1e-12);
  }
}

TEST_CASE("closed-form correlations match the operator-level computation") {
  for (const double dt : log_grid(1.0, 1000.0, 10)) {
    const CascadeParams p{142.0, 187.0, dt, 1.0};
    const auto c = coefficients(p);
    const auto psi = build_psi(p);
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        const auto closed = analytic_g2(c, kModes[i].energy, kModes[i].bin,
                                        kModes[j].energy, kModes[j].bin);
        const auto exact = g2_between(psi, kModes[i], kModes[j]);
        REQUIRE(closed.has_value());
        REQUIRE(exact.has_value());
        CHECK(std::abs(*closed - *exact) < 1e-9);
      }
    }
  }
}

TEST_CASE("correlation special values at the reference point") {
  const auto c = coefficients(kRef);
  CHECK(analytic_g2(c, Energy::X, TimeBin::Early, Energy::X, TimeBin::Early).value() == 0.0);
  CHECK(analytic_g2(c, Energy::B, TimeBin::Late, Energy::X, TimeBin::Early).value() ==
        doctest::Approx(kInvGammaSq).epsilon(1e-12));
  CHECK(analytic_g2(c, Energy::B, TimeBin::Early, Energy::X, TimeBin::Early).value() ==
        doctest::Approx(kInvBetaGamma).epsilon(1e-12));
}

TEST_CASE("correlations are undefined at zero delay") {
  const auto c = coefficients(142.0, 187.0, 0.0);
  CHECK_FALSE(analytic_g2(c, Energy::B, TimeBin::Late, Energy::X, TimeBin::Early).has_value());
  CHECK_FALSE(analytic_g2(c, Energy::B, TimeBin::Early, Energy::B, TimeBin::Early).has_value());
}

TEST_CASE("single-pulse state") {
  CHECK(single_pulse_state(0.0).amplitude({0, 0}).real() == doctest::Approx(1.0));
  CHECK(single_pulse_state(kPi).amplitude({1, 1}).real() == doctest::Approx(1.0));
  const auto half = single_pulse_state(kPi / 2.0);
  CHECK(number_expectation(half, {Energy::B, TimeBin::Early}) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("indistinguishability bound") {
  CHECK(max_indistinguishability(142.0, 142.0) == doctest::Approx(0.5));
  CHECK(max_indistinguishability(142.0, 187.0) ==
        doctest::Approx(0.56838905775075988).epsilon(1e-12));
  CHECK(max_indistinguishability(1e-9, 187.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("interferometer input: phases land on the multi-photon terms") {
  const auto c = coefficients(kRef);
  const double phi = 0.37;
  const auto in = hom_input_state(c, phi);

  // Arm a carries no phase, arm b carries 2 phi on the two-photon term.
  fock::Occupation vac_a_beta_b{0, 0, 0, 0, 1, 0, 0, 1};
  const auto amp = in.amplitude(vac_a_beta_b);
  CHECK(std::abs(amp) == doctest::Approx(c.alpha() * c.beta()).epsilon(1e-12));
  CHECK(std::arg(amp) == doctest::Approx(2.0 * phi).epsilon(1e-12));

  fock::Occupation gamma_b{0, 0, 0, 0, 1, 1, 1, 1};
  CHECK(std::arg(in.amplitude(gamma_b)) == doctest::Approx(4.0 * phi).epsilon(1e-12));

  for (const double p : {0.0, 0.7, 2.9}) {
    CHECK(hom_input_state(c, p).norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto plain = hom_input_state(c, 0.0);
  fock::Occupation beta_both{1, 0, 0, 1, 1, 0, 0, 1};
  CHECK(plain.amplitude(beta_both).imag() == 0.0);
}

TEST_CASE("interferometer output: bunching and photon accounting") {
  const auto vac_out = hom_output_state(coefficients(142.0, 187.0, 0.0), 0.0);
  CHECK(std::norm(vac_out.amplitudes()[0]) == doctest::Approx(1.0).epsilon(1e-12));

  // Full re-excitation limit: every sector holds one photon per arm and
  // bunches; cross-output coincidences within a sector vanish.
  const Coefficients full{0.0, 0.0, 1.0};
  const auto out = hom_output_state(full, 0.0);
  const auto& reg = out.reg();
  for (std::size_t i = 0; i < out.amplitudes().size(); ++i) {
    if (out.amplitudes()[i] == fock::Complex{0.0, 0.0}) continue;
    const auto occ = reg.unpack(i);
    for (int sector = 0; sector < 4; ++sector)
      CHECK(occ[sector] + occ[sector + 4] == 2);  // per-sector photon number
    for (int sector = 0; sector < 4; ++sector)
      CHECK(occ[sector] != 1);  // never one photon in each output of a sector
  }

  const auto c = coefficients(kRef);
  const auto ref_out = hom_output_state(c, 0.3);
  double per_port = 0.0, total = 0.0;
  for (std::size_t m = 0; m < 8; ++m) {
    const double n = number_expectation(ref_out, ref_out.reg().modes()[m]);
    total += n;
    if (ref_out.reg().modes()[m].spatial == fock::Spatial::C) per_port += n;
  }
  CHECK(per_port == doctest::Approx(2.0 * kMu).epsilon(1e-10));
  CHECK(total == doctest::Approx(4.0 * kMu).epsilon(1e-10));
}

TEST_CASE("closed-form interference correlation: values and periodicity") {
  const Coefficients full{0.0, 0.0, 1.0};
  for (const double phi : {0.0, 0.4, 1.3})
    CHECK(hom_g2_analytic(full, phi).value() == doctest::Approx(0.75).epsilon(1e-12));

  const auto c = coefficients(kRef);
  CHECK(hom_g2_analytic(c, 0.0).value() == doctest::Approx(kHomPhi0).epsilon(1e-12));
  CHECK(hom_g2_analytic(c, kPi / 2.0).value() ==
        doctest::Approx(kHomPhiHalf).epsilon(1e-12));

  for (const double phi : {0.1, 0.9, 2.2})
    CHECK(hom_g2_analytic(c, phi).value() ==
          doctest::Approx(hom_g2_analytic(c, phi + kPi).value()).epsilon(1e-12));

  CHECK_FALSE(hom_g2_analytic(Coefficients{1.0, 0.0, 0.0}, 0.0).has_value());
}

TEST_CASE("interference correlation is phase-independent without the two-photon term") {
  const Coefficients no_beta{0.3, 0.0, 0.7};
  const double base = hom_g2_analytic(no_beta, 0.0).value();
  for (const double phi : {0.3, 1.1, 2.8})
    CHECK(hom_g2_analytic(no_beta, phi).value() == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("phase envelope: pi/2 sits above 0 whenever the cosine term is live") {
  for (const double dt : {20.0, 100.0, 400.0, 1500.0}) {
    const auto c = coefficients(142.0, 187.0, dt);
    CHECK(hom_g2_analytic(c, kPi / 2.0).value() > hom_g2_analytic(c, 0.0).value());
  }
}

TEST_CASE("brute-force interference oracle agrees with the closed form") {
  for (const double dt : {5.0, 50.0, 100.0, 500.0, 1e6}) {
    const auto c = coefficients(142.0, 187.0, dt);
    for (int k = 0; k < 17; ++k) {
      const double phi = 2.0 * kPi * k / 17.0;
      const auto closed = hom_g2_analytic(c, phi);
      const auto brute = hom_g2_oracle(c, phi);
      REQUIRE(closed.has_value());
      REQUIRE(brute.has_value());
      CHECK(std::abs(*closed - *brute) < 1e-9);
    }
  }
}

TEST_CASE("mutual information across the seven bipartitions") {
  const auto at_zero = mutual_information_partitions(coefficients(142.0, 187.0, 0.0));
  REQUIRE(at_zero.size() == 7);
  for (const auto& entry : at_zero)
    CHECK(entry.mutual_information_bits == doctest::Approx(0.0).epsilon(1e-9));

  const auto table = mutual_information_partitions(coefficients(kRef));
  REQUIRE(table.size() == 7);
  for (std::size_t i = 1; i < table.size(); ++i)
    CHECK(table[i].part1_mask > table[i - 1].part1_mask);

  // Energy split {B_e, B_l} | {X_e, X_l}: mask with bits 0 and 2.
  bool found = false;
  for (const auto& entry : table) {
    CHECK(entry.mutual_information_bits <= 2.0 * std::log2(3.0) + 1e-9);
    if (entry.part1_mask == 0b0101u) {
      found = true;
      CHECK(entry.mutual_information_bits ==
            doctest::Approx(kMiSplitEnergy).epsilon(1e-9));
      CHECK(entry.mutual_information_bits > 2.0);  // above the GHZ value
    }
  }
  CHECK(found);
}
