#include "sqka/quantum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqka {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;

void check_norm(const std::vector<Complex>& amps) {
  double n2 = 0.0;
  for (const Complex& a : amps) n2 += std::norm(a);
  if (std::abs(n2 - 1.0) > kAmpTol)
    throw std::runtime_error("state norm deviates from 1 beyond tolerance");
}

void check_targets(int num_qubits, const std::vector<int>& targets) {
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= num_qubits)
      throw std::invalid_argument("qubit index out of range");
    for (size_t j = i + 1; j < targets.size(); ++j)
      if (targets[i] == targets[j])
        throw std::invalid_argument("duplicate qubit index");
  }
}

Eigen::MatrixXcd to_eigen(const DensityMatrix& m) {
  Eigen::MatrixXcd out(m.dim, m.dim);
  for (int r = 0; r < m.dim; ++r)
    for (int c = 0; c < m.dim; ++c) out(r, c) = m.at(r, c);
  return out;
}

// Amplitudes of the GHZ basis element on its two supporting basis states
// |0,b> and |1,~b>.
std::pair<Complex, Complex> ghz_branch_amps(const GhzLabel& label) {
  if (label.sign == '+') return {kInvSqrt2, kInvSqrt2};
  if (label.sign != '-') throw std::invalid_argument("GHZ sign must be '+' or '-'");
  const double phase = label.bits.empty() || label.bits.back() == 0 ? 1.0 : -1.0;
  return {phase * kInvSqrt2, -phase * kInvSqrt2};
}

// Basis index with the bits of `pattern` scattered to `shifts` positions.
uint64_t scatter_bits(uint64_t pattern, const std::vector<int>& shifts) {
  uint64_t out = 0;
  const size_t k = shifts.size();
  for (size_t i = 0; i < k; ++i)
    if ((pattern >> (k - 1 - i)) & 1) out |= uint64_t{1} << shifts[i];
  return out;
}

// Shift amounts (bit positions) of the qubits NOT listed in `targets`,
// ordered by qubit index.
std::vector<int> rest_shifts(int num_qubits, const std::vector<int>& targets) {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(num_qubits) - targets.size());
  for (int q = 0; q < num_qubits; ++q)
    if (std::find(targets.begin(), targets.end(), q) == targets.end())
      out.push_back(num_qubits - 1 - q);
  return out;
}

}  // namespace

StateVector::StateVector(int num_qubits, std::vector<Complex> amplitudes,
                         std::vector<std::string> labels)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)), labels_(std::move(labels)) {
  if (num_qubits_ < 1) throw std::invalid_argument("StateVector needs >= 1 qubit");
  if (amps_.size() != (uint64_t{1} << num_qubits_))
    throw std::invalid_argument("amplitude count must be 2^num_qubits");
  if (!labels_.empty() && labels_.size() != static_cast<size_t>(num_qubits_))
    throw std::invalid_argument("one label per qubit (or none)");
  check_norm(amps_);
}

StateVector StateVector::basis(int num_qubits, uint64_t index) {
  std::vector<Complex> amps(uint64_t{1} << num_qubits, Complex{0.0, 0.0});
  amps.at(index) = 1.0;
  return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::qubit(int bit) { return basis(1, static_cast<uint64_t>(bit)); }

double StateVector::norm() const {
  double n2 = 0.0;
  for (const Complex& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

void StateVector::set_label(int qubit, std::string tag) {
  if (labels_.empty()) labels_.resize(static_cast<size_t>(num_qubits_));
  labels_.at(static_cast<size_t>(qubit)) = std::move(tag);
}

Unitary::Unitary(int dim_, std::vector<Complex> entries_, bool checked)
    : dim(dim_), entries(std::move(entries_)) {
  if (dim < 1 || entries.size() != static_cast<size_t>(dim) * dim)
    throw std::invalid_argument("Unitary: entries must form a dim x dim matrix");
  if (checked && unitarity_error() > kAmpTol)
    throw std::invalid_argument("matrix is not unitary within tolerance");
}

Unitary Unitary::identity(int dim) {
  std::vector<Complex> e(static_cast<size_t>(dim) * dim, Complex{0.0, 0.0});
  for (int i = 0; i < dim; ++i) e[static_cast<size_t>(i) * dim + i] = 1.0;
  return Unitary(dim, std::move(e), false);
}

double Unitary::unitarity_error() const {
  double worst = 0.0;
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      Complex acc = 0.0;
      for (int k = 0; k < dim; ++k) acc += at(r, k) * std::conj(at(c, k));
      if (r == c) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

Unitary kron(const Unitary& a, const Unitary& b) {
  const int dim = a.dim * b.dim;
  Unitary out(dim, std::vector<Complex>(static_cast<size_t>(dim) * dim), false);
  for (int ar = 0; ar < a.dim; ++ar)
    for (int ac = 0; ac < a.dim; ++ac)
      for (int br = 0; br < b.dim; ++br)
        for (int bc = 0; bc < b.dim; ++bc)
          out.at(ar * b.dim + br, ac * b.dim + bc) = a.at(ar, ac) * b.at(br, bc);
  return out;
}

double DensityMatrix::trace_real() const {
  double t = 0.0;
  for (int i = 0; i < dim; ++i) t += at(i, i).real();
  return t;
}

double DensityMatrix::hermiticity_error() const {
  double worst = 0.0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      worst = std::max(worst, std::abs(at(r, c) - std::conj(at(c, r))));
  return worst;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(*this));
  return solver.eigenvalues().minCoeff();
}

std::vector<GhzLabel> ghz_labels(int num_parties) {
  if (num_parties < 2) throw std::invalid_argument("GHZ basis needs >= 2 parties");
  std::vector<GhzLabel> out;
  out.reserve(uint64_t{1} << num_parties);
  const int nb = num_parties - 1;
  for (uint64_t b = 0; b < (uint64_t{1} << nb); ++b) {
    Bits bits(static_cast<size_t>(nb));
    for (int i = 0; i < nb; ++i) bits[static_cast<size_t>(i)] = (b >> (nb - 1 - i)) & 1;
    out.push_back(GhzLabel{'+', bits});
    out.push_back(GhzLabel{'-', bits});
  }
  return out;
}

StateVector ghz_state(int num_parties, const Bits& bits, char sign) {
  if (num_parties < 2) throw std::invalid_argument("ghz_state needs >= 2 parties");
  if (bits.size() != static_cast<size_t>(num_parties - 1))
    throw std::invalid_argument("ghz_state: need num_parties-1 subscript bits");
  const auto [a0, a1] = ghz_branch_amps(GhzLabel{sign, bits});

  uint64_t idx0 = 0, idx1 = 0;
  for (int i = 0; i < num_parties - 1; ++i) {
    idx0 = (idx0 << 1) | bits[static_cast<size_t>(i)];
    idx1 = (idx1 << 1) | (1 - bits[static_cast<size_t>(i)]);
  }
  idx1 |= uint64_t{1} << (num_parties - 1);  // leading 1 on the flipped branch

  std::vector<Complex> amps(uint64_t{1} << num_parties, Complex{0.0, 0.0});
  amps[idx0] = a0;
  amps[idx1] = a1;
  return StateVector(num_parties, std::move(amps));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<Complex> amps(a.dim() * b.dim());
  for (uint64_t i = 0; i < a.dim(); ++i)
    for (uint64_t j = 0; j < b.dim(); ++j)
      amps[(i << b.num_qubits()) | j] = a.amplitude(i) * b.amplitude(j);

  std::vector<std::string> labels;
  if (!a.labels_.empty() || !b.labels_.empty()) {
    labels.resize(static_cast<size_t>(a.num_qubits_ + b.num_qubits_));
    for (int q = 0; q < a.num_qubits_; ++q)
      if (!a.labels_.empty()) labels[static_cast<size_t>(q)] = a.labels_[static_cast<size_t>(q)];
    for (int q = 0; q < b.num_qubits_; ++q)
      if (!b.labels_.empty())
        labels[static_cast<size_t>(a.num_qubits_ + q)] = b.labels_[static_cast<size_t>(q)];
  }
  return StateVector(a.num_qubits_ + b.num_qubits_, std::move(amps), std::move(labels));
}

StateVector apply_unitary(const StateVector& state, const Unitary& u,
                          const std::vector<int>& targets) {
  const int nq = state.num_qubits();
  check_targets(nq, targets);
  const int k = static_cast<int>(targets.size());
  if (u.dim != (1 << k))
    throw std::invalid_argument("apply_unitary: matrix dimension does not match targets");

  std::vector<int> tshift(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) tshift[i] = nq - 1 - targets[i];
  const std::vector<int> rest = rest_shifts(nq, targets);

  std::vector<Complex> out(state.dim(), Complex{0.0, 0.0});
  std::vector<uint64_t> idx(static_cast<size_t>(u.dim));
  for (uint64_t r = 0; r < (uint64_t{1} << rest.size()); ++r) {
    const uint64_t base = scatter_bits(r, rest);
    for (int a = 0; a < u.dim; ++a)
      idx[static_cast<size_t>(a)] = base | scatter_bits(static_cast<uint64_t>(a), tshift);
    for (int a = 0; a < u.dim; ++a) {
      Complex acc = 0.0;
      for (int b = 0; b < u.dim; ++b)
        acc += u.at(a, b) * state.amplitude(idx[static_cast<size_t>(b)]);
      out[idx[static_cast<size_t>(a)]] = acc;
    }
  }
  auto labels = state.labels();
  return StateVector(nq, std::move(out), std::move(labels));
}

Branch project_z(const StateVector& state, int target, int bit) {
  check_targets(state.num_qubits(), {target});
  double p = 0.0;
  for (uint64_t i = 0; i < state.dim(); ++i)
    if (state.bit_at(i, target) == bit) p += std::norm(state.amplitude(i));
  Branch out;
  out.prob = p;
  if (p > 0.0) {
    const double scale = 1.0 / std::sqrt(p);
    std::vector<Complex> amps(state.dim(), Complex{0.0, 0.0});
    for (uint64_t i = 0; i < state.dim(); ++i)
      if (state.bit_at(i, target) == bit) amps[i] = state.amplitude(i) * scale;
    auto labels = state.labels();
    out.state = StateVector(state.num_qubits(), std::move(amps), std::move(labels));
  }
  return out;
}

Branch project_ghz(const StateVector& state, const std::vector<int>& targets,
                   const GhzLabel& label) {
  const int nq = state.num_qubits();
  check_targets(nq, targets);
  const int np = static_cast<int>(targets.size());
  if (np < 2 || label.bits.size() != static_cast<size_t>(np - 1))
    throw std::invalid_argument("project_ghz: label size does not match targets");

  const auto [a0, a1] = ghz_branch_amps(label);

  // Target-bit patterns of the two supporting kets |0,b> and |1,~b|.
  uint64_t pat0 = 0, pat1 = 1;
  for (int i = 0; i < np - 1; ++i) {
    pat0 = (pat0 << 1) | label.bits[static_cast<size_t>(i)];
    pat1 = (pat1 << 1) | (1 - label.bits[static_cast<size_t>(i)]);
  }

  std::vector<int> tshift(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) tshift[i] = nq - 1 - targets[i];
  const std::vector<int> rest = rest_shifts(nq, targets);
  const uint64_t t0 = scatter_bits(pat0, tshift);
  const uint64_t t1 = scatter_bits(pat1, tshift);

  const uint64_t rest_count = uint64_t{1} << rest.size();
  std::vector<Complex> coeff(rest_count);
  double p = 0.0;
  for (uint64_t r = 0; r < rest_count; ++r) {
    const uint64_t base = scatter_bits(r, rest);
    const Complex c = std::conj(a0) * state.amplitude(base | t0) +
                      std::conj(a1) * state.amplitude(base | t1);
    coeff[r] = c;
    p += std::norm(c);
  }

  Branch out;
  out.prob = p;
  if (p > 0.0) {
    const double scale = 1.0 / std::sqrt(p);
    std::vector<Complex> amps(state.dim(), Complex{0.0, 0.0});
    for (uint64_t r = 0; r < rest_count; ++r) {
      const uint64_t base = scatter_bits(r, rest);
      amps[base | t0] = coeff[r] * a0 * scale;
      amps[base | t1] = coeff[r] * a1 * scale;
    }
    auto labels = state.labels();
    out.state = StateVector(nq, std::move(amps), std::move(labels));
  }
  return out;
}

std::pair<int, StateVector> measure_z(const StateVector& state, int target, Rng& rng) {
  const Branch zero = project_z(state, target, 0);
  const int outcome = rng.uniform() < zero.prob ? 0 : 1;
  if (outcome == 0) return {0, zero.state};
  const Branch one = project_z(state, target, 1);
  if (one.prob <= 0.0)
    throw std::runtime_error("measure_z: zero-norm projection (state corrupted)");
  return {1, one.state};
}

std::pair<GhzLabel, StateVector> measure_ghz(const StateVector& state,
                                             const std::vector<int>& targets, Rng& rng) {
  const auto labels = ghz_labels(static_cast<int>(targets.size()));
  const double u = rng.uniform();
  double acc = 0.0;
  const GhzLabel* fallback = nullptr;
  for (const GhzLabel& label : labels) {
    Branch b = project_ghz(state, targets, label);
    if (b.prob > 0.0) fallback = &label;
    acc += b.prob;
    if (u < acc && b.prob > 0.0) return {label, std::move(b.state)};
  }
  // u landed in the rounding slack past the last nonzero branch
  if (fallback == nullptr)
    throw std::runtime_error("measure_ghz: no branch has positive probability");
  Branch b = project_ghz(state, targets, *fallback);
  return {*fallback, std::move(b.state)};
}

DensityMatrix reduced_density(const StateVector& state, const std::vector<int>& keep) {
  const int nq = state.num_qubits();
  check_targets(nq, keep);

  std::vector<int> kshift(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) kshift[i] = nq - 1 - keep[i];
  const std::vector<int> rest = rest_shifts(nq, keep);

  const int dim = 1 << keep.size();
  DensityMatrix rho;
  rho.dim = dim;
  rho.entries.assign(static_cast<size_t>(dim) * dim, Complex{0.0, 0.0});
  for (uint64_t r = 0; r < (uint64_t{1} << rest.size()); ++r) {
    const uint64_t base = scatter_bits(r, rest);
    for (int i = 0; i < dim; ++i) {
      const Complex ai = state.amplitude(base | scatter_bits(static_cast<uint64_t>(i), kshift));
      if (ai == Complex{0.0, 0.0}) continue;
      for (int j = 0; j < dim; ++j) {
        const Complex aj =
            state.amplitude(base | scatter_bits(static_cast<uint64_t>(j), kshift));
        rho.at(i, j) += ai * std::conj(aj);
      }
    }
  }
  return rho;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim != sigma.dim)
    throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::MatrixXcd diff = to_eigen(rho) - to_eigen(sigma);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(diff);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

Unitary random_unitary(int dim, Rng& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = Complex{rng.normal(), rng.normal()};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    const Complex d = r(c, c);
    const Complex phase = std::abs(d) > 0 ? d / std::abs(d) : Complex{1.0, 0.0};
    q.col(c) *= phase;
  }
  std::vector<Complex> entries(static_cast<size_t>(dim) * dim);
  for (int rr = 0; rr < dim; ++rr)
    for (int cc = 0; cc < dim; ++cc) entries[static_cast<size_t>(rr) * dim + cc] = q(rr, cc);
  return Unitary(dim, std::move(entries));
}

Unitary unitary_mapping(int dim, const std::vector<std::vector<Complex>>& from,
                        const std::vector<std::vector<Complex>>& to, Rng& rng) {
  if (from.size() != to.size() || from.size() > static_cast<size_t>(dim))
    throw std::invalid_argument("unitary_mapping: need matching constraint sets");
  const int k = static_cast<int>(from.size());

  auto complete = [&](const std::vector<std::vector<Complex>>& cols) {
    Eigen::MatrixXcd m(dim, dim);
    for (int c = 0; c < k; ++c) {
      if (cols[static_cast<size_t>(c)].size() != static_cast<size_t>(dim))
        throw std::invalid_argument("unitary_mapping: bad vector length");
      for (int r = 0; r < dim; ++r) m(r, c) = cols[static_cast<size_t>(c)][static_cast<size_t>(r)];
    }
    for (int c = k; c < dim; ++c) {
      for (int attempt = 0;; ++attempt) {
        Eigen::VectorXcd v(dim);
        for (int r = 0; r < dim; ++r) v(r) = Complex{rng.normal(), rng.normal()};
        for (int p = 0; p < c; ++p) v -= m.col(p).dot(v) * m.col(p);
        const double n = v.norm();
        if (n > 1e-6) {
          m.col(c) = v / n;
          break;
        }
        if (attempt > 32)
          throw std::runtime_error("unitary_mapping: failed to complete basis");
      }
    }
    return m;
  };

  const Eigen::MatrixXcd a = complete(from);
  const Eigen::MatrixXcd b = complete(to);
  const Eigen::MatrixXcd u = b * a.adjoint();
  std::vector<Complex> entries(static_cast<size_t>(dim) * dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) entries[static_cast<size_t>(r) * dim + c] = u(r, c);
  return Unitary(dim, std::move(entries));
}

}  // namespace sqka
