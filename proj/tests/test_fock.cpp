#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "seqtpe/fock.hpp"
#include "seqtpe/rng.hpp"

using namespace seqtpe;
using namespace seqtpe::fock;

namespace {

const ModeLabel kBe{Energy::B, TimeBin::Early};
const ModeLabel kXe{Energy::X, TimeBin::Early};
const ModeLabel kBl{Energy::B, TimeBin::Late};
const ModeLabel kXl{Energy::X, TimeBin::Late};

ModeRegister one_mode(int cutoff = 2) { return ModeRegister({kBe}, cutoff); }

PureState single_occ(int n, int cutoff = 2) {
  return PureState::from_terms(one_mode(cutoff), {{{n}, {1.0, 0.0}}});
}

// Random normalized state over the given register, reproducible by seed.
PureState random_state(const ModeRegister& reg, std::uint64_t seed) {
  Philox rng(seed, Philox::kTestStream, 0);
  std::vector<std::pair<Occupation, Complex>> terms;
  double norm = 0.0;
  for (std::size_t i = 0; i < reg.dim(); ++i) {
    const Complex a{rng.gaussian(1.0), rng.gaussian(1.0)};
    terms.emplace_back(reg.unpack(i), a);
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (auto& [occ, a] : terms) a /= norm;
  return PureState::from_terms(reg, terms);
}

}  // namespace

TEST_CASE("register rejects duplicate labels and bad cutoffs") {
  CHECK_THROWS_AS(ModeRegister({kBe, kBe}, 2), InvalidArgument);
  CHECK_THROWS_AS(ModeRegister({}, 2), InvalidArgument);
  CHECK_THROWS_AS(ModeRegister({kBe}, 0), InvalidArgument);
  const ModeRegister reg({kBe, kXe}, 2);
  CHECK(reg.dim() == 9);
  CHECK(reg.pack({1, 2}) == 5);
  CHECK(reg.unpack(5) == Occupation{1, 2});
}

TEST_CASE("ladder operators on small occupations") {
  const auto lowered = apply_ladder(single_occ(1), kBe, Ladder::Lower);
  CHECK(lowered.amplitude({0}).real() == doctest::Approx(1.0));
  CHECK_FALSE(lowered.is_normalized());

  const auto vacuum_lowered = apply_ladder(single_occ(0), kBe, Ladder::Lower);
  CHECK(vacuum_lowered.norm_sq() == 0.0);

  const auto two_lowered = apply_ladder(single_occ(2), kBe, Ladder::Lower);
  CHECK(two_lowered.amplitude({1}).real() == doctest::Approx(std::sqrt(2.0)));

  CHECK_THROWS_AS(apply_ladder(single_occ(2), kBe, Ladder::Raise), TruncationError);
  CHECK_THROWS_AS(apply_ladder(single_occ(0), kXe, Ladder::Lower), InvalidArgument);
}

TEST_CASE("raise after lower scales by the occupation number") {
  const ModeRegister reg({kBe, kXe}, 3);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    // Zero the cutoff row first so raising cannot truncate.
    auto state = random_state(reg, seed);
    std::vector<std::pair<Occupation, Complex>> terms;
    for (std::size_t i = 0; i < reg.dim(); ++i) {
      auto occ = reg.unpack(i);
      if (occ[0] == reg.cutoff()) continue;
      terms.emplace_back(occ, state.amplitudes()[i]);
    }
    const auto trimmed = PureState::from_terms(reg, terms, true);
    const auto roundtrip = apply_ladder(apply_ladder(trimmed, kBe, Ladder::Lower), kBe,
                                        Ladder::Raise);
    for (std::size_t i = 0; i < reg.dim(); ++i) {
      const auto occ = reg.unpack(i);
      const Complex expected =
          static_cast<double>(occ[0]) * trimmed.amplitudes()[i];
      CHECK(std::abs(roundtrip.amplitudes()[i] - expected) < 1e-12);
    }
  }
}

TEST_CASE("tensor product basics") {
  const auto vac2 =
      tensor_product(PureState::vacuum(one_mode()), PureState::vacuum(ModeRegister({kXe}, 2)));
  CHECK(vac2.amplitude({0, 0}).real() == doctest::Approx(1.0));
  CHECK(vac2.norm_sq() == doctest::Approx(1.0));

  CHECK_THROWS_AS(
      tensor_product(PureState::vacuum(one_mode()), PureState::vacuum(one_mode())),
      InvalidArgument);
}

TEST_CASE("tensor product of two three-term states has nine nonzero amplitudes") {
  const ModeRegister ra({{Energy::B, TimeBin::Early, Spatial::A},
                         {Energy::X, TimeBin::Early, Spatial::A}},
                        2);
  const ModeRegister rb({{Energy::B, TimeBin::Early, Spatial::B},
                         {Energy::X, TimeBin::Early, Spatial::B}},
                        2);
  auto three_terms = [](const ModeRegister& reg) {
    return PureState::from_terms(reg, {{{0, 0}, {0.6, 0.0}},
                                       {{1, 0}, {0.0, 0.48}},
                                       {{1, 1}, {0.64, 0.0}}});
  };
  const auto product = tensor_product(three_terms(ra), three_terms(rb));
  std::size_t nonzero = 0;
  for (const auto& a : product.amplitudes())
    if (a != Complex{0.0, 0.0}) ++nonzero;
  CHECK(nonzero == 9);
  CHECK(product.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("norm is multiplicative under tensor products") {
  const ModeRegister ra({kBe, kXe}, 2);
  const ModeRegister rb({kBl, kXl}, 2);
  for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
    const auto product = tensor_product(random_state(ra, seed), random_state(rb, seed + 100));
    CHECK(product.norm_sq() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("number expectation") {
  CHECK(number_expectation(single_occ(1), kBe) == doctest::Approx(1.0));
  CHECK(number_expectation(PureState::vacuum(one_mode()), kBe) == 0.0);
  CHECK_THROWS_AS(number_expectation(single_occ(1), kXl), InvalidArgument);
}

TEST_CASE("g2 between distinct modes with one photon each is unity") {
  const ModeRegister reg({kBe, kXe}, 2);
  const auto state = PureState::from_terms(reg, {{{1, 1}, {1.0, 0.0}}});
  CHECK(g2_between(state, kBe, kXe).value() == doctest::Approx(1.0));
  CHECK(g2_between(state, kBe, kBe).value() == 0.0);
}

TEST_CASE("g2 is undefined on vacuum, not zero") {
  const auto vac = PureState::vacuum(ModeRegister({kBe, kXe}, 2));
  CHECK_FALSE(g2_between(vac, kBe, kXe).has_value());
}

TEST_CASE("g2 is symmetric under argument swap, bit for bit") {
  const ModeRegister reg({kBe, kXe, kBl}, 2);
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const auto state = random_state(reg, seed);
    for (const auto& m1 : reg.modes()) {
      for (const auto& m2 : reg.modes()) {
        const auto a = g2_between(state, m1, m2);
        const auto b = g2_between(state, m2, m1);
        REQUIRE(a.has_value() == b.has_value());
        if (a) CHECK(*a == *b);
      }
    }
  }
}

TEST_CASE("partial trace of a pure state over all modes is a rank-1 projector") {
  const ModeRegister reg({kBe, kXe}, 1);
  const auto state = random_state(reg, 41);
  const auto rho = partial_trace(state, reg.modes());
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho.hermiticity_defect() < 1e-12);
  for (std::size_t i = 0; i < reg.dim(); ++i) {
    for (std::size_t j = 0; j < reg.dim(); ++j) {
      const Complex expected =
          state.amplitudes()[i] * std::conj(state.amplitudes()[j]);
      CHECK(std::abs(rho.matrix()(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(j)) -
                     expected) < 1e-12);
    }
  }
}

TEST_CASE("Bell pair reduces to the maximally mixed qubit") {
  const ModeRegister reg({kBe, kXe}, 1);
  const double r = 1.0 / std::sqrt(2.0);
  const auto bell =
      PureState::from_terms(reg, {{{0, 0}, {r, 0.0}}, {{1, 1}, {r, 0.0}}});
  const auto rho = partial_trace(bell, {kBe});
  CHECK(rho.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(rho.matrix()(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(rho.matrix()(0, 1)) < 1e-15);
  CHECK(entropy_bits(rho) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partial trace preserves trace, hermiticity and positivity") {
  const ModeRegister reg({kBe, kXe, kBl}, 2);
  for (std::uint64_t seed : {51u, 52u}) {
    const auto state = random_state(reg, seed);
    for (const auto& keep :
         {std::vector<ModeLabel>{kBe}, {kXe, kBl}, {kBe, kBl}}) {
      const auto rho = partial_trace(state, keep);
      CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(rho.hermiticity_defect() < 1e-12);
      CHECK(rho.min_eigenvalue() > -1e-9);
    }
  }
  CHECK_THROWS_AS(partial_trace(random_state(reg, 53), std::vector<ModeLabel>{}),
                  InvalidArgument);
  CHECK_THROWS_AS(partial_trace(random_state(reg, 54), {kXl}), InvalidArgument);
}

TEST_CASE("partial trace of a density operator matches the pure-state route") {
  const ModeRegister reg({kBe, kXe, kBl}, 1);
  const auto state = random_state(reg, 61);
  const auto full = partial_trace(state, reg.modes());
  const auto via_density = partial_trace(full, {kBe, kBl});
  const auto direct = partial_trace(state, {kBe, kBl});
  CHECK((via_density.matrix() - direct.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("product states have zero entropy on either factor") {
  const ModeRegister ra({kBe}, 2);
  const ModeRegister rb({kXe, kBl}, 2);
  const auto product = tensor_product(random_state(ra, 71), random_state(rb, 72));
  CHECK(entropy_bits(partial_trace(product, {kBe})) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(mutual_information_bits(product, {kBe}, {kXe, kBl}) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("GHZ state: entropy 1 per half, mutual information 2 for every bipartition") {
  const ModeRegister reg({kBe, kXe, kBl, kXl}, 1);
  const double r = 1.0 / std::sqrt(2.0);
  const auto ghz = PureState::from_terms(
      reg, {{{0, 0, 0, 0}, {r, 0.0}}, {{1, 1, 1, 1}, {r, 0.0}}});

  CHECK(entropy_bits(partial_trace(ghz, {kBe, kXe})) == doctest::Approx(1.0).epsilon(1e-9));

  for (unsigned mask = 1; mask < 0xF; mask += 2) {
    std::vector<ModeLabel> part1, part2;
    for (std::size_t i = 0; i < 4; ++i)
      ((mask >> i) & 1u ? part1 : part2).push_back(reg.modes()[i]);
    CHECK(mutual_information_bits(ghz, part1, part2) ==
          doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("mutual information equals twice the reduced entropy on pure states") {
  const ModeRegister reg({kBe, kXe, kBl}, 2);
  for (std::uint64_t seed : {81u, 82u, 83u}) {
    const auto state = random_state(reg, seed);
    for (const auto& part1 : {std::vector<ModeLabel>{kBe}, {kBe, kXe}, {kXe}}) {
      std::vector<ModeLabel> part2;
      for (const auto& m : reg.modes())
        if (std::find(part1.begin(), part1.end(), m) == part1.end()) part2.push_back(m);
      const double mi = mutual_information_bits(state, part1, part2);
      const double s1 = entropy_bits(partial_trace(state, part1));
      CHECK(mi == doctest::Approx(2.0 * s1).epsilon(1e-9));
    }
  }
}

TEST_CASE("mutual information rejects non-partitions") {
  const ModeRegister reg({kBe, kXe}, 1);
  const auto state = random_state(reg, 91);
  CHECK_THROWS_AS(mutual_information_bits(state, {kBe}, {kBe}), InvalidArgument);
  CHECK_THROWS_AS(mutual_information_bits(state, {kBe}, {}), InvalidArgument);
}

namespace {

const ModeLabel kInA{Energy::B, TimeBin::Early, Spatial::A};
const ModeLabel kInB{Energy::B, TimeBin::Early, Spatial::B};
const ModeLabel kOutC{Energy::B, TimeBin::Early, Spatial::C};
const ModeLabel kOutD{Energy::B, TimeBin::Early, Spatial::D};
const std::vector<BsPair> kSplit{{kInA, kInB, kOutC, kOutD}};

ModeRegister two_arm_register(int cutoff = 2) { return ModeRegister({kInA, kInB}, cutoff); }

}  // namespace

TEST_CASE("beamsplitter maps vacuum to vacuum") {
  const auto out = beamsplitter(PureState::vacuum(two_arm_register()), kSplit, 0.5);
  CHECK(out.amplitude({0, 0}).real() == doctest::Approx(1.0));
  CHECK(out.reg().contains(kOutC));
  CHECK_FALSE(out.reg().contains(kInA));
}

TEST_CASE("single photon splits evenly at T = 1/2") {
  const auto in = PureState::from_terms(two_arm_register(), {{{1, 0}, {1.0, 0.0}}});
  const auto out = beamsplitter(in, kSplit, 0.5);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(out.amplitude({1, 0}).real() == doctest::Approx(r));
  CHECK(std::abs(out.amplitude({0, 1})) == doctest::Approx(r));
}

TEST_CASE("two indistinguishable photons bunch: no coincidence at T = 1/2") {
  const auto in = PureState::from_terms(two_arm_register(), {{{1, 1}, {1.0, 0.0}}});
  const auto out = beamsplitter(in, kSplit, 0.5);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(out.amplitude({1, 1})) < 1e-15);
  CHECK(out.amplitude({2, 0}).real() == doctest::Approx(r));
  CHECK(out.amplitude({0, 2}).real() == doctest::Approx(-r));
}

TEST_CASE("beamsplitter is norm- and photon-number-preserving, and self-inverse") {
  for (const double t : {0.5, 0.3, 0.9}) {
    for (std::uint64_t seed : {101u, 102u}) {
      const auto in = random_state(two_arm_register(), seed);
      // Trim the doubly-occupied corner so the output stays within cutoff.
      std::vector<std::pair<Occupation, Complex>> terms;
      for (std::size_t i = 0; i < in.reg().dim(); ++i) {
        const auto occ = in.reg().unpack(i);
        if (occ[0] + occ[1] > 2) continue;
        terms.emplace_back(occ, in.amplitudes()[i]);
      }
      const auto trimmed = PureState::from_terms(in.reg(), terms, true);
      const auto out = beamsplitter(trimmed, kSplit, t);
      CHECK(out.norm_sq() == doctest::Approx(trimmed.norm_sq()).epsilon(1e-10));

      const double n_in = number_expectation(trimmed, kInA) +
                          number_expectation(trimmed, kInB);
      const double n_out =
          number_expectation(out, kOutC) + number_expectation(out, kOutD);
      CHECK(n_out == doctest::Approx(n_in).epsilon(1e-10));

      const auto back = beamsplitter(out, {{kOutC, kOutD, kInA, kInB}}, t);
      for (std::size_t i = 0; i < back.reg().dim(); ++i)
        CHECK(std::abs(back.amplitudes()[i] - trimmed.amplitudes()[i]) < 1e-9);
    }
  }
}

TEST_CASE("observables do not depend on the beamsplitter sign convention") {
  // Swapping which input is called a and which is called b flips the sign
  // convention; occupation probabilities must not change.
  const auto in = PureState::from_terms(
      two_arm_register(), {{{0, 0}, {0.6, 0.0}}, {{1, 1}, {0.0, 0.8}}});
  const auto out1 = beamsplitter(in, {{kInA, kInB, kOutC, kOutD}}, 0.5);
  const auto out2 = beamsplitter(in, {{kInB, kInA, kOutC, kOutD}}, 0.5);
  for (std::size_t i = 0; i < out1.reg().dim(); ++i) {
    const auto occ = out1.reg().unpack(i);
    CHECK(std::norm(out1.amplitude(occ)) ==
          doctest::Approx(std::norm(out2.amplitude(occ))).epsilon(1e-12));
  }
}

TEST_CASE("beamsplitter rejects mismatched pairs and truncation") {
  const ModeRegister reg({kInA, {Energy::X, TimeBin::Early, Spatial::B}}, 2);
  const auto state = PureState::vacuum(reg);
  CHECK_THROWS_AS(beamsplitter(state,
                               {{kInA,
                                 {Energy::X, TimeBin::Early, Spatial::B},
                                 kOutC,
                                 kOutD}},
                               0.5),
                  InvalidArgument);

  const auto both_double =
      PureState::from_terms(two_arm_register(), {{{2, 2}, {1.0, 0.0}}});
  CHECK_THROWS_AS(beamsplitter(both_double, kSplit, 0.5), TruncationError);
}

TEST_CASE("state printing is stable and sorted") {
  const ModeRegister reg({kBe, kXe}, 1);
  const auto bell = PureState::from_terms(
      reg, {{{1, 1}, {0.6, 0.0}}, {{0, 0}, {0.8, 0.0}}});
  CHECK(bell.to_string() ==
        "(0,0) : 0.8 +0i\n"
        "(1,1) : 0.6 +0i\n");
}
