#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sqka/bits.hpp"
#include "sqka/rng.hpp"

namespace sqka {

using Complex = std::complex<double>;

/// Tolerance for normalization, orthogonality and unitarity checks.
inline constexpr double kAmpTol = 1e-9;

/// Outcome label of an N-particle GHZ-basis measurement: the +/- branch and
/// the (N-1)-bit subscript identifying which basis element was observed.
struct GhzLabel {
  char sign = '+';  // '+' or '-'
  Bits bits;        // length N-1

  bool operator==(const GhzLabel& o) const { return sign == o.sign && bits == o.bits; }
  bool operator!=(const GhzLabel& o) const { return !(*this == o); }
  std::string to_string() const { return std::string(1, sign) + bits_to_string(bits); }
};

/// All 2^N labels for an N-party GHZ basis, in a fixed enumeration order.
std::vector<GhzLabel> ghz_labels(int num_parties);

/// Normalized pure state of `num_qubits` qubits, amplitudes in the
/// computational basis with qubit 0 as the most significant index bit.
/// Qubits may carry role tags ("A", "P2", "probe", ...) for bookkeeping;
/// tags never affect any numeric operation.
class StateVector {
 public:
  StateVector() = default;
  StateVector(int num_qubits, std::vector<Complex> amplitudes,
              std::vector<std::string> labels = {});

  /// Computational basis state |index> on `num_qubits` qubits.
  static StateVector basis(int num_qubits, uint64_t index);
  /// Single qubit |0> or |1>.
  static StateVector qubit(int bit);

  int num_qubits() const { return num_qubits_; }
  uint64_t dim() const { return uint64_t{1} << num_qubits_; }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex amplitude(uint64_t index) const { return amps_[index]; }
  double norm() const;

  const std::vector<std::string>& labels() const { return labels_; }
  void set_label(int qubit, std::string tag);

  /// Bit of `qubit` within basis-state `index` (qubit 0 = most significant).
  int bit_at(uint64_t index, int qubit) const {
    return static_cast<int>((index >> (num_qubits_ - 1 - qubit)) & 1);
  }

 private:
  friend StateVector tensor(const StateVector&, const StateVector&);

  int num_qubits_ = 0;
  std::vector<Complex> amps_;
  std::vector<std::string> labels_;
};

/// Dense square complex matrix with unit-norm columns; validated against
/// U U^dagger = I on construction when `checked` is true.
struct Unitary {
  int dim = 0;
  std::vector<Complex> entries;  // row-major

  Unitary() = default;
  Unitary(int dim, std::vector<Complex> entries, bool checked = true);

  static Unitary identity(int dim);
  Complex at(int row, int col) const { return entries[static_cast<size_t>(row) * dim + col]; }
  Complex& at(int row, int col) { return entries[static_cast<size_t>(row) * dim + col]; }
  /// max |(U U^dagger - I)_{ij}|
  double unitarity_error() const;
};

/// Kronecker product a (x) b.
Unitary kron(const Unitary& a, const Unitary& b);

/// Hermitian, trace-one matrix produced by partial tracing.
struct DensityMatrix {
  int dim = 0;
  std::vector<Complex> entries;  // row-major

  Complex at(int row, int col) const { return entries[static_cast<size_t>(row) * dim + col]; }
  Complex& at(int row, int col) { return entries[static_cast<size_t>(row) * dim + col]; }
  double trace_real() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

/// N-party GHZ state (1/sqrt2) * sigma * (|0,b> + s|1,~b>) for b = `bits`,
/// s = +/-1 per `sign`; the minus branch carries the global phase
/// sigma = (-1)^{last bit of b}. num_parties >= 2, len(bits) = num_parties-1.
StateVector ghz_state(int num_parties, const Bits& bits, char sign);

/// Kronecker product of two states; role tags are concatenated.
StateVector tensor(const StateVector& a, const StateVector& b);

/// Apply `u` to the listed qubits (targets[0] is the most significant index
/// bit of u), identity elsewhere. Targets must be distinct and in range.
StateVector apply_unitary(const StateVector& state, const Unitary& u,
                          const std::vector<int>& targets);

/// Deterministic Born-rule projection: probability of the branch and, when
/// the probability is nonzero, the renormalized post-measurement state.
struct Branch {
  double prob = 0.0;
  StateVector state;  // empty when prob == 0
};

/// Project `target` onto |bit>.
Branch project_z(const StateVector& state, int target, int bit);

/// Project the listed qubits onto the GHZ basis element `label`
/// (len(targets) = len(label.bits) + 1; targets[0] plays the role of the
/// quantum party's particle).
Branch project_ghz(const StateVector& state, const std::vector<int>& targets,
                   const GhzLabel& label);

/// Z-basis measurement with collapse; outcome sampled per the Born rule.
std::pair<int, StateVector> measure_z(const StateVector& state, int target, Rng& rng);

/// GHZ-basis projective measurement over the listed qubits with collapse.
std::pair<GhzLabel, StateVector> measure_ghz(const StateVector& state,
                                             const std::vector<int>& targets, Rng& rng);

/// Partial trace keeping the listed qubits (output indexed in `keep` order).
DensityMatrix reduced_density(const StateVector& state, const std::vector<int>& keep);

/// (1/2) sum |eigenvalues(rho - sigma)|; in [0, 1] for states.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Haar-distributed random unitary (Ginibre + QR with phase fix).
Unitary random_unitary(int dim, Rng& rng);

/// Unitary mapping each `from` column to the matching `to` column (both sets
/// must be orthonormal) and acting as a random unitary on the orthogonal
/// complement.
Unitary unitary_mapping(int dim, const std::vector<std::vector<Complex>>& from,
                        const std::vector<std::vector<Complex>>& to, Rng& rng);

}  // namespace sqka
