#ifndef SEQTPE_FOCK_HPP
#define SEQTPE_FOCK_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "seqtpe/errors.hpp"

namespace seqtpe::fock {

using Complex = std::complex<double>;
using Occupation = std::vector<int>;

enum class Energy : std::uint8_t { B, X };
enum class TimeBin : std::uint8_t { Early, Late };
enum class Spatial : std::uint8_t { None, A, B, C, D };

/// A bosonic mode is addressed by energy, time bin and (optionally) a
/// spatial label, e.g. the beamsplitter arms of an interference setup.
struct ModeLabel {
  Energy energy;
  TimeBin bin;
  Spatial spatial = Spatial::None;
  friend constexpr auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

std::string to_string(const ModeLabel& m);

/// Ordered list of pairwise-distinct modes sharing one occupation cutoff.
/// Basis states are occupation vectors packed mixed-radix, first mode most
/// significant, so basis index order equals lexicographic occupation order.
class ModeRegister {
 public:
  ModeRegister(std::vector<ModeLabel> modes, int cutoff);

  std::size_t size() const { return modes_.size(); }
  int cutoff() const { return cutoff_; }
  std::size_t dim() const { return dim_; }
  const std::vector<ModeLabel>& modes() const { return modes_; }

  bool contains(const ModeLabel& m) const;
  std::size_t position_of(const ModeLabel& m) const;  // throws InvalidArgument

  std::size_t pack(const Occupation& occ) const;
  Occupation unpack(std::size_t index) const;
  int digit(std::size_t index, std::size_t position) const;
  std::size_t stride(std::size_t position) const { return stride_[position]; }

  friend bool operator==(const ModeRegister&, const ModeRegister&) = default;

 private:
  std::vector<ModeLabel> modes_;
  int cutoff_;
  std::size_t dim_;
  std::vector<std::size_t> stride_;
};

/// Complex amplitudes over the truncated occupation basis of a register.
/// States are kept dense; every register used here has at most a few
/// thousand basis states.
class PureState {
 public:
  static PureState vacuum(ModeRegister reg);
  /// Build from (occupation, amplitude) terms. Unless `allow_unnormalized`,
  /// requires |sum of |amp|^2 - 1| <= 1e-9.
  static PureState from_terms(ModeRegister reg,
                              const std::vector<std::pair<Occupation, Complex>>& terms,
                              bool allow_unnormalized = false);

  const ModeRegister& reg() const { return reg_; }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex amplitude(const Occupation& occ) const { return amps_[reg_.pack(occ)]; }

  double norm_sq() const;
  /// True when construction asserted normalization; ladder results and other
  /// intermediates carry false.
  bool is_normalized() const { return normalized_; }

  /// "(n0,n1,...) : re imag" lines for every nonzero amplitude, in basis
  /// order. Stable output for debugging and golden tests.
  std::string to_string() const;

 private:
  PureState(ModeRegister reg, std::vector<Complex> amps, bool normalized)
      : reg_(std::move(reg)), amps_(std::move(amps)), normalized_(normalized) {}

  ModeRegister reg_;
  std::vector<Complex> amps_;
  bool normalized_;

  friend class StateBuilder;
};

/// Mutable amplitude buffer for operations that assemble a state in place.
class StateBuilder {
 public:
  explicit StateBuilder(ModeRegister reg)
      : reg_(std::move(reg)), amps_(reg_.dim(), Complex{0.0, 0.0}) {}
  Complex& at(std::size_t index) { return amps_[index]; }
  const ModeRegister& reg() const { return reg_; }
  PureState finish(bool normalized) {
    return PureState(std::move(reg_), std::move(amps_), normalized);
  }

 private:
  ModeRegister reg_;
  std::vector<Complex> amps_;
};

class DensityOperator {
 public:
  DensityOperator(ModeRegister reg, Eigen::MatrixXcd matrix);

  const ModeRegister& reg() const { return reg_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  double trace_real() const { return matrix_.trace().real(); }
  double hermiticity_defect() const;  // max element of |M - M^H|
  double min_eigenvalue() const;

 private:
  ModeRegister reg_;
  Eigen::MatrixXcd matrix_;
};

enum class Ladder { Lower, Raise };

/// Tensor product of states on disjoint registers; the combined register is
/// the concatenation (left register first). Cutoffs must agree.
PureState tensor_product(const PureState& s1, const PureState& s2);

/// Annihilation (|n> -> sqrt(n)|n-1>) or creation (|n> -> sqrt(n+1)|n+1>)
/// on one mode. Raising a nonzero amplitude already at the cutoff throws
/// TruncationError. The result is flagged unnormalized and may be zero.
PureState apply_ladder(const PureState& state, const ModeLabel& mode, Ladder direction);

/// <a^dag a> on one mode.
double number_expectation(const PureState& state, const ModeLabel& mode);

/// Normalized second-order correlation between two modes,
/// <a1+ a2+ a2 a1> / (<n1><n2>); for equal modes <a+ a+ a a> / <n>^2.
/// Empty when either mean occupation is below 1e-12 (the correlation is
/// undefined, which is distinct from being zero).
std::optional<double> g2_between(const PureState& state, const ModeLabel& mode1,
                                 const ModeLabel& mode2);

DensityOperator partial_trace(const PureState& state, const std::vector<ModeLabel>& keep);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<ModeLabel>& keep);

/// Von Neumann entropy in bits. Eigenvalues below 1e-12 are treated as zero,
/// which also absorbs small negative round-off eigenvalues.
double entropy_bits(const DensityOperator& rho);

/// S(rho1) + S(rho2) - S(rho12) in bits. part1 and part2 must be disjoint
/// and together cover the register. S(rho12) is computed from the full
/// density operator rather than assumed zero.
double mutual_information_bits(const PureState& state, const std::vector<ModeLabel>& part1,
                               const std::vector<ModeLabel>& part2);

/// One beamsplitter acting on the input modes (in_a, in_b), which must share
/// energy and time bin and differ in spatial label. Outputs replace the
/// inputs in place in the register and must be fresh labels.
struct BsPair {
  ModeLabel in_a, in_b, out_c, out_d;
};

/// Creation operators map as
///   a+ -> sqrt(T) c+ + sqrt(1-T) d+,   b+ -> sqrt(1-T) c+ - sqrt(T) d+.
/// The transform is unitary for any T in [0,1]; at T = 1/2 the matrix is its
/// own inverse. Photon number is conserved within each (energy, bin) sector.
PureState beamsplitter(const PureState& state, const std::vector<BsPair>& pairs,
                       double transmittance);

}  // namespace seqtpe::fock

#endif
