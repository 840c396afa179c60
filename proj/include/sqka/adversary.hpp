#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqka/protocol.hpp"
#include "sqka/quantum.hpp"

namespace sqka {

enum class AttackKind : uint8_t {
  None,
  MeasureResend,
  InterceptResend,
  EntangleMeasure,
  DishonestParticipant,
};

std::string attack_name(AttackKind kind);

/// Probe coupling of an entangle-measure attack. The forward unitary acts on
/// (transit qubit (x) probe) on the way out, the backward unitary on the way
/// back; one independent probe register per (position, party) leg, all
/// prepared in `initial_probe`. Probe dimensions that are not powers of two
/// are embedded into the next qubit register internally.
struct EntangleMeasureParams {
  int probe_dim = 2;
  std::vector<Complex> initial_probe;  // length probe_dim, normalized
  Unitary forward;                     // dim 2*probe_dim
  Unitary backward;                    // dim 2*probe_dim

  void validate() const;
};

/// Tagged adversary configuration. None and DishonestParticipant leave the
/// quantum channel untouched; the others act on particles in transit.
struct AttackModel {
  AttackKind kind = AttackKind::None;

  // intercept-resend: the fake Z-basis particle sent to each classical party,
  // and whether Eve measures her kept genuine qubits at the end of the run.
  Bits fake_bits;
  bool measure_kept = true;

  // entangle-measure
  EntangleMeasureParams probe;

  // dishonest participant(s); the last listed cheater publishes the adjusted
  // masked key built from the colluders' combined knowledge.
  std::vector<int> cheaters;
  Bits target_key;  // K*, length n

  static AttackModel none();
  static AttackModel measure_resend();
  static AttackModel intercept_resend(Bits fake_bits, bool measure_kept = true);
  static AttackModel entangle_measure(EntangleMeasureParams params);
  static AttackModel dishonest_participant(int cheater, Bits target_key);
  static AttackModel colluding_participants(std::vector<int> cheaters, Bits target_key);

  bool touches_channel() const {
    return kind == AttackKind::MeasureResend || kind == AttackKind::InterceptResend ||
           kind == AttackKind::EntangleMeasure;
  }
  /// Qubits appended to a position's joint state per classical party.
  int extra_qubits_per_party() const;
  void validate(const ProtocolConfig& config) const;
};

/// What Eve learned at one position.
struct EveRecord {
  std::vector<std::optional<int>> forward_bits;  // measure-resend readouts
  std::vector<std::optional<int>> kept_bits;     // intercept-resend readouts
};

struct EveMemory {
  std::vector<EveRecord> records;  // one per position
};

/// Forward-leg hook, invoked once per (position, classical party) while the
/// particle travels from the quantum party outward.
void attack_forward(const AttackModel& model, PositionState& pos, int party,
                    EveRecord& eve, Rng& rng);

/// Return-leg hook, invoked once per (position, classical party) on the way
/// back. Measure-resend and intercept-resend act forward only; only the
/// entangle-measure backward unitary does anything here.
void attack_backward(const AttackModel& model, PositionState& pos, int party, Rng& rng);

/// The adjusted publication Q*^r = M^r xor (K*^r xor (xor of the other
/// parties' key bits)); every honest unmasking then yields K* as the
/// candidate final key.
Bits dishonest_publish(const Bits& target_key, const Bits& info_bits,
                       const std::vector<Bits>& other_party_keys);

/// Number of qubits backing a probe of the given dimension (0 when trivial).
int probe_qubit_count(int probe_dim);

/// Extend a (2*probe_dim)-dimensional coupling to the enclosing qubit
/// register, acting as identity on the padding subspace.
Unitary embed_probe_unitary(const Unitary& u, int probe_dim);

/// Zero-padded probe register state (probe_dim >= 2).
StateVector padded_probe_state(const std::vector<Complex>& probe, int probe_dim);

/// Named built-in couplings for configuration files: "identity", "copy"
/// (transit controls a probe-qubit flip) and "cnot-probe" (probe qubit
/// controls a transit flip); the latter two require probe_dim == 2.
Unitary probe_builtin(const std::string& name, int probe_dim);

}  // namespace sqka
