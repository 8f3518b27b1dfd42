#include "seqtpe/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace seqtpe::fock {

namespace {

constexpr double kNormTol = 1e-9;
constexpr double kMeanFloor = 1e-12;
constexpr double kEigFloor = 1e-12;

const char* energy_name(Energy e) { return e == Energy::B ? "B" : "X"; }
const char* bin_name(TimeBin b) { return b == TimeBin::Early ? "e" : "l"; }

char spatial_name(Spatial s) {
  switch (s) {
    case Spatial::A: return 'a';
    case Spatial::B: return 'b';
    case Spatial::C: return 'c';
    case Spatial::D: return 'd';
    default: return '\0';
  }
}

double sqrt_factorial(int n) {
  double v = 1.0;
  for (int k = 2; k <= n; ++k) v *= static_cast<double>(k);
  return std::sqrt(v);
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
  return v;
}

}  // namespace

std::string to_string(const ModeLabel& m) {
  std::string s = energy_name(m.energy);
  s += '_';
  s += bin_name(m.bin);
  if (m.spatial != Spatial::None) {
    s += '_';
    s += spatial_name(m.spatial);
  }
  return s;
}

ModeRegister::ModeRegister(std::vector<ModeLabel> modes, int cutoff)
    : modes_(std::move(modes)), cutoff_(cutoff) {
  if (modes_.empty()) throw InvalidArgument("register needs at least one mode");
  if (cutoff_ < 1) throw InvalidArgument("cutoff must be >= 1");
  std::set<ModeLabel> seen;
  for (const auto& m : modes_) {
    if (!seen.insert(m).second)
      throw InvalidArgument("duplicate mode label " + to_string(m) + " in register");
  }
  const std::size_t base = static_cast<std::size_t>(cutoff_) + 1;
  dim_ = 1;
  stride_.assign(modes_.size(), 1);
  for (std::size_t i = modes_.size(); i-- > 0;) {
    stride_[i] = dim_;
    if (dim_ > (std::size_t{1} << 40) / base)
      throw InvalidArgument("register dimension too large for dense representation");
    dim_ *= base;
  }
}

bool ModeRegister::contains(const ModeLabel& m) const {
  return std::find(modes_.begin(), modes_.end(), m) != modes_.end();
}

std::size_t ModeRegister::position_of(const ModeLabel& m) const {
  const auto it = std::find(modes_.begin(), modes_.end(), m);
  if (it == modes_.end())
    throw InvalidArgument("mode " + to_string(m) + " not in register");
  return static_cast<std::size_t>(it - modes_.begin());
}

std::size_t ModeRegister::pack(const Occupation& occ) const {
  if (occ.size() != modes_.size())
    throw InvalidArgument("occupation vector length does not match register");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] < 0 || occ[i] > cutoff_)
      throw InvalidArgument("occupation entry outside [0, cutoff]");
    idx += static_cast<std::size_t>(occ[i]) * stride_[i];
  }
  return idx;
}

Occupation ModeRegister::unpack(std::size_t index) const {
  Occupation occ(modes_.size());
  const std::size_t base = static_cast<std::size_t>(cutoff_) + 1;
  for (std::size_t i = 0; i < modes_.size(); ++i)
    occ[i] = static_cast<int>((index / stride_[i]) % base);
  return occ;
}

int ModeRegister::digit(std::size_t index, std::size_t position) const {
  const std::size_t base = static_cast<std::size_t>(cutoff_) + 1;
  return static_cast<int>((index / stride_[position]) % base);
}

PureState PureState::vacuum(ModeRegister reg) {
  StateBuilder b(std::move(reg));
  b.at(0) = Complex{1.0, 0.0};
  return b.finish(true);
}

PureState PureState::from_terms(ModeRegister reg,
                                const std::vector<std::pair<Occupation, Complex>>& terms,
                                bool allow_unnormalized) {
  StateBuilder b(std::move(reg));
  for (const auto& [occ, amp] : terms) b.at(b.reg().pack(occ)) += amp;
  PureState s = b.finish(!allow_unnormalized);
  if (!allow_unnormalized && std::abs(s.norm_sq() - 1.0) > kNormTol)
    throw InvalidArgument("state is not normalized");
  return s;
}

double PureState::norm_sq() const {
  double n = 0.0;
  for (const auto& a : amps_) n += std::norm(a);
  return n;
}

std::string PureState::to_string() const {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (amps_[i] == Complex{0.0, 0.0}) continue;
    const Occupation occ = reg_.unpack(i);
    out += '(';
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(occ[k]);
    }
    std::snprintf(buf, sizeof buf, ") : %.12g %+.12gi\n", amps_[i].real(), amps_[i].imag());
    out += buf;
  }
  return out;
}

DensityOperator::DensityOperator(ModeRegister reg, Eigen::MatrixXcd matrix)
    : reg_(std::move(reg)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() ||
      static_cast<std::size_t>(matrix_.rows()) != reg_.dim())
    throw InvalidArgument("density matrix dimension does not match register");
}

double DensityOperator::hermiticity_defect() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_,
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

PureState tensor_product(const PureState& s1, const PureState& s2) {
  for (const auto& m : s2.reg().modes()) {
    if (s1.reg().contains(m))
      throw InvalidArgument("registers overlap on mode " + to_string(m));
  }
  if (s1.reg().cutoff() != s2.reg().cutoff())
    throw InvalidArgument("registers have different cutoffs");

  std::vector<ModeLabel> modes = s1.reg().modes();
  modes.insert(modes.end(), s2.reg().modes().begin(), s2.reg().modes().end());
  StateBuilder b(ModeRegister(std::move(modes), s1.reg().cutoff()));

  const std::size_t dim2 = s2.reg().dim();
  for (std::size_t i = 0; i < s1.amplitudes().size(); ++i) {
    const Complex a1 = s1.amplitudes()[i];
    if (a1 == Complex{0.0, 0.0}) continue;
    for (std::size_t j = 0; j < dim2; ++j) {
      const Complex a2 = s2.amplitudes()[j];
      if (a2 == Complex{0.0, 0.0}) continue;
      b.at(i * dim2 + j) = a1 * a2;
    }
  }
  return b.finish(s1.is_normalized() && s2.is_normalized());
}

PureState apply_ladder(const PureState& state, const ModeLabel& mode, Ladder direction) {
  const auto& reg = state.reg();
  const std::size_t pos = reg.position_of(mode);
  const std::size_t base = static_cast<std::size_t>(reg.cutoff()) + 1;
  const std::size_t stride = reg.stride(pos);

  StateBuilder b(reg);
  for (std::size_t i = 0; i < state.amplitudes().size(); ++i) {
    const Complex a = state.amplitudes()[i];
    if (a == Complex{0.0, 0.0}) continue;
    const int n = static_cast<int>((i / stride) % base);
    if (direction == Ladder::Lower) {
      if (n == 0) continue;  // annihilates this component
      b.at(i - stride) += std::sqrt(static_cast<double>(n)) * a;
    } else {
      if (n == reg.cutoff())
        throw TruncationError("raising mode " + to_string(mode) + " beyond cutoff");
      b.at(i + stride) += std::sqrt(static_cast<double>(n + 1)) * a;
    }
  }
  return b.finish(false);
}

double number_expectation(const PureState& state, const ModeLabel& mode) {
  const auto& reg = state.reg();
  const std::size_t pos = reg.position_of(mode);
  double sum = 0.0;
  for (std::size_t i = 0; i < state.amplitudes().size(); ++i) {
    const double p = std::norm(state.amplitudes()[i]);
    if (p == 0.0) continue;
    sum += p * static_cast<double>(reg.digit(i, pos));
  }
  return sum;
}

std::optional<double> g2_between(const PureState& state, const ModeLabel& mode1,
                                 const ModeLabel& mode2) {
  const auto& reg = state.reg();
  const std::size_t p1 = reg.position_of(mode1);
  const std::size_t p2 = reg.position_of(mode2);

  double numerator = 0.0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  for (std::size_t i = 0; i < state.amplitudes().size(); ++i) {
    const double p = std::norm(state.amplitudes()[i]);
    if (p == 0.0) continue;
    const double n1 = static_cast<double>(reg.digit(i, p1));
    const double n2 = static_cast<double>(reg.digit(i, p2));
    mean1 += p * n1;
    mean2 += p * n2;
    numerator += p * (p1 == p2 ? n1 * (n1 - 1.0) : n1 * n2);
  }
  if (mean1 < kMeanFloor || mean2 < kMeanFloor) return std::nullopt;
  return numerator / (mean1 * mean2);
}

namespace {

// Positions of the kept modes, in register order; rejects empty/unknown sets.
std::vector<std::size_t> keep_positions(const ModeRegister& reg,
                                        const std::vector<ModeLabel>& keep) {
  if (keep.empty()) throw InvalidArgument("keep set must not be empty");
  std::set<std::size_t> pos;
  for (const auto& m : keep) {
    if (!pos.insert(reg.position_of(m)).second)
      throw InvalidArgument("duplicate mode " + to_string(m) + " in keep set");
  }
  return {pos.begin(), pos.end()};
}

ModeRegister sub_register(const ModeRegister& reg, const std::vector<std::size_t>& positions) {
  std::vector<ModeLabel> modes;
  modes.reserve(positions.size());
  for (const std::size_t p : positions) modes.push_back(reg.modes()[p]);
  return ModeRegister(std::move(modes), reg.cutoff());
}

// Splits a basis index into (kept part, traced part) sub-indices.
struct IndexSplitter {
  IndexSplitter(const ModeRegister& reg, const std::vector<std::size_t>& kept) {
    const std::size_t base = static_cast<std::size_t>(reg.cutoff()) + 1;
    std::vector<bool> is_kept(reg.size(), false);
    for (const std::size_t p : kept) is_kept[p] = true;
    keep_stride.assign(reg.size(), 0);
    env_stride.assign(reg.size(), 0);
    std::size_t kd = 1, ed = 1;
    for (std::size_t i = reg.size(); i-- > 0;) {
      if (is_kept[i]) {
        keep_stride[i] = kd;
        kd *= base;
      } else {
        env_stride[i] = ed;
        ed *= base;
      }
    }
    keep_dim = kd;
    env_dim = ed;
    this->base = base;
    full_stride.assign(reg.size(), 1);
    std::size_t fd = 1;
    for (std::size_t i = reg.size(); i-- > 0;) {
      full_stride[i] = fd;
      fd *= base;
    }
    n = reg.size();
  }

  std::pair<std::size_t, std::size_t> split(std::size_t index) const {
    std::size_t k = 0, e = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t digit = (index / full_stride[i]) % base;
      k += digit * keep_stride[i];
      e += digit * env_stride[i];
    }
    return {k, e};
  }

  std::size_t n = 0, base = 0, keep_dim = 1, env_dim = 1;
  std::vector<std::size_t> keep_stride, env_stride, full_stride;
};

}  // namespace

DensityOperator partial_trace(const PureState& state, const std::vector<ModeLabel>& keep) {
  const auto positions = keep_positions(state.reg(), keep);
  const IndexSplitter splitter(state.reg(), positions);

  // Group nonzero amplitudes by traced-out sub-index, then accumulate one
  // outer product per group.
  std::map<std::size_t, std::vector<std::pair<std::size_t, Complex>>> groups;
  for (std::size_t i = 0; i < state.amplitudes().size(); ++i) {
    const Complex a = state.amplitudes()[i];
    if (a == Complex{0.0, 0.0}) continue;
    const auto [k, e] = splitter.split(i);
    groups[e].emplace_back(k, a);
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(splitter.keep_dim, splitter.keep_dim);
  for (const auto& [env, entries] : groups) {
    for (const auto& [ki, ai] : entries)
      for (const auto& [kj, aj] : entries)
        rho(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(kj)) +=
            ai * std::conj(aj);
  }
  return DensityOperator(sub_register(state.reg(), positions), std::move(rho));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<ModeLabel>& keep) {
  const auto positions = keep_positions(rho.reg(), keep);
  const IndexSplitter splitter(rho.reg(), positions);

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(splitter.keep_dim, splitter.keep_dim);
  const std::size_t dim = rho.reg().dim();
  for (std::size_t i = 0; i < dim; ++i) {
    const auto [ki, ei] = splitter.split(i);
    for (std::size_t j = 0; j < dim; ++j) {
      const auto [kj, ej] = splitter.split(j);
      if (ei != ej) continue;
      out(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(kj)) +=
          rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DensityOperator(sub_register(rho.reg(), positions), std::move(out));
}

double entropy_bits(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.matrix(),
                                                         Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lambda = solver.eigenvalues()[i];
    if (lambda < kEigFloor) continue;
    s -= lambda * std::log2(lambda);
  }
  return s;
}

double mutual_information_bits(const PureState& state, const std::vector<ModeLabel>& part1,
                               const std::vector<ModeLabel>& part2) {
  const auto& reg = state.reg();
  std::set<ModeLabel> all;
  for (const auto& m : part1) all.insert(m);
  for (const auto& m : part2) {
    if (!all.insert(m).second)
      throw InvalidArgument("parts overlap on mode " + to_string(m));
  }
  if (all.size() != reg.size() || part1.empty() || part2.empty())
    throw InvalidArgument("parts must form a bipartition of the register");

  const double s1 = entropy_bits(partial_trace(state, part1));
  const double s2 = entropy_bits(partial_trace(state, part2));
  const double s12 = entropy_bits(partial_trace(state, reg.modes()));
  return s1 + s2 - s12;
}

PureState beamsplitter(const PureState& state, const std::vector<BsPair>& pairs,
                       double transmittance) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0))
    throw InvalidArgument("transmittance must be in [0, 1]");
  const auto& reg = state.reg();

  std::set<ModeLabel> fresh;
  for (const auto& p : pairs) {
    if (p.in_a.energy != p.in_b.energy || p.in_a.bin != p.in_b.bin)
      throw InvalidArgument("pair inputs " + to_string(p.in_a) + ", " + to_string(p.in_b) +
                            " do not share energy and time bin");
    if (p.in_a.spatial == p.in_b.spatial)
      throw InvalidArgument("pair inputs must differ in spatial label");
    reg.position_of(p.in_a);
    reg.position_of(p.in_b);
    for (const auto& out : {p.out_c, p.out_d}) {
      if (reg.contains(out) || !fresh.insert(out).second)
        throw InvalidArgument("output label " + to_string(out) + " is not fresh");
    }
  }

  const double root_t = std::sqrt(transmittance);
  const double root_r = std::sqrt(1.0 - transmittance);
  const int cutoff = reg.cutoff();

  PureState current = state;
  for (const auto& pair : pairs) {
    const auto& creg = current.reg();
    const std::size_t pa = creg.position_of(pair.in_a);
    const std::size_t pb = creg.position_of(pair.in_b);

    std::vector<ModeLabel> modes = creg.modes();
    modes[pa] = pair.out_c;
    modes[pb] = pair.out_d;
    StateBuilder b(ModeRegister(std::move(modes), cutoff));

    for (std::size_t i = 0; i < current.amplitudes().size(); ++i) {
      const Complex amp = current.amplitudes()[i];
      if (amp == Complex{0.0, 0.0}) continue;
      Occupation occ = creg.unpack(i);
      const int na = occ[pa];
      const int nb = occ[pb];
      const double input_norm = sqrt_factorial(na) * sqrt_factorial(nb);
      // (sqrt(T) c+ + sqrt(1-T) d+)^na (sqrt(1-T) c+ - sqrt(T) d+)^nb |0,0>
      for (int k = 0; k <= na; ++k) {
        for (int l = 0; l <= nb; ++l) {
          const int p = k + l;
          const int q = na + nb - p;
          double coef = binomial(na, k) * binomial(nb, l) *
                        std::pow(root_t, k + (nb - l)) * std::pow(root_r, (na - k) + l) *
                        ((nb - l) % 2 == 0 ? 1.0 : -1.0);
          if (coef == 0.0) continue;
          if (p > cutoff || q > cutoff)
            throw TruncationError("beamsplitter output occupation exceeds cutoff");
          coef *= sqrt_factorial(p) * sqrt_factorial(q) / input_norm;
          occ[pa] = p;
          occ[pb] = q;
          b.at(b.reg().pack(occ)) += amp * coef;
        }
      }
      occ[pa] = na;
      occ[pb] = nb;
    }
    current = b.finish(current.is_normalized());
  }
  return current;
}

}  // namespace seqtpe::fock
