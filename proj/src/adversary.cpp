#include "sqka/adversary.hpp"

#include <algorithm>
#include <cmath>

namespace sqka {

std::string attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::MeasureResend: return "measure-resend";
    case AttackKind::InterceptResend: return "intercept-resend";
    case AttackKind::EntangleMeasure: return "entangle-measure";
    case AttackKind::DishonestParticipant: return "dishonest-participant";
  }
  return "?";
}

void EntangleMeasureParams::validate() const {
  if (probe_dim < 1) throw std::invalid_argument("probe_dim must be >= 1");
  if (initial_probe.size() != static_cast<size_t>(probe_dim))
    throw std::invalid_argument("initial probe must have probe_dim entries");
  double n2 = 0.0;
  for (const Complex& a : initial_probe) n2 += std::norm(a);
  if (std::abs(n2 - 1.0) > kAmpTol)
    throw std::invalid_argument("initial probe must be normalized");
  if (forward.dim != 2 * probe_dim || backward.dim != 2 * probe_dim)
    throw std::invalid_argument("probe couplings must act on (qubit x probe)");
  if (forward.unitarity_error() > kAmpTol || backward.unitarity_error() > kAmpTol)
    throw std::invalid_argument("probe couplings must be unitary");
}

AttackModel AttackModel::none() { return AttackModel{}; }

AttackModel AttackModel::measure_resend() {
  AttackModel m;
  m.kind = AttackKind::MeasureResend;
  return m;
}

AttackModel AttackModel::intercept_resend(Bits fake_bits, bool measure_kept) {
  AttackModel m;
  m.kind = AttackKind::InterceptResend;
  m.fake_bits = std::move(fake_bits);
  m.measure_kept = measure_kept;
  return m;
}

AttackModel AttackModel::entangle_measure(EntangleMeasureParams params) {
  AttackModel m;
  m.kind = AttackKind::EntangleMeasure;
  m.probe = std::move(params);
  return m;
}

AttackModel AttackModel::dishonest_participant(int cheater, Bits target_key) {
  AttackModel m;
  m.kind = AttackKind::DishonestParticipant;
  m.cheaters = {cheater};
  m.target_key = std::move(target_key);
  return m;
}

AttackModel AttackModel::colluding_participants(std::vector<int> cheaters, Bits target_key) {
  AttackModel m;
  m.kind = AttackKind::DishonestParticipant;
  m.cheaters = std::move(cheaters);
  m.target_key = std::move(target_key);
  return m;
}

int AttackModel::extra_qubits_per_party() const {
  switch (kind) {
    case AttackKind::InterceptResend: return 1;
    case AttackKind::EntangleMeasure: return probe_qubit_count(probe.probe_dim);
    default: return 0;
  }
}

void AttackModel::validate(const ProtocolConfig& config) const {
  switch (kind) {
    case AttackKind::None:
    case AttackKind::MeasureResend:
      break;
    case AttackKind::InterceptResend:
      if (fake_bits.size() != static_cast<size_t>(config.classical_parties()))
        throw std::invalid_argument("intercept-resend: one fake bit per classical party");
      break;
    case AttackKind::EntangleMeasure:
      probe.validate();
      break;
    case AttackKind::DishonestParticipant: {
      if (cheaters.empty())
        throw std::invalid_argument("dishonest-participant: need at least one cheater");
      for (int c : cheaters)
        if (c < 0 || c >= config.num_parties)
          throw std::invalid_argument("dishonest-participant: cheater index out of range");
      std::vector<int> sorted = cheaters;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("dishonest-participant: duplicate cheater");
      if (static_cast<int>(cheaters.size()) >= config.num_parties)
        throw std::invalid_argument("dishonest-participant: need at least one honest party");
      if (target_key.size() != static_cast<size_t>(config.key_length))
        throw std::invalid_argument("dishonest-participant: target key must have n bits");
      break;
    }
  }
  const int qubits_per_position =
      config.num_parties + config.classical_parties() * extra_qubits_per_party();
  if (qubits_per_position > config.max_qubits)
    throw std::invalid_argument("attack exceeds the per-position qubit cap");
}

int probe_qubit_count(int probe_dim) {
  int q = 0;
  while ((1 << q) < probe_dim) ++q;
  return q;
}

Unitary embed_probe_unitary(const Unitary& u, int probe_dim) {
  if (u.dim != 2 * probe_dim)
    throw std::invalid_argument("embed_probe_unitary: dimension mismatch");
  const int padded = 1 << probe_qubit_count(probe_dim);
  if (padded == probe_dim) return u;

  Unitary out(2 * padded,
              std::vector<Complex>(static_cast<size_t>(2 * padded) * (2 * padded)), false);
  for (int br = 0; br < 2; ++br)
    for (int pr = 0; pr < probe_dim; ++pr)
      for (int bc = 0; bc < 2; ++bc)
        for (int pc = 0; pc < probe_dim; ++pc)
          out.at(br * padded + pr, bc * padded + pc) = u.at(br * probe_dim + pr, bc * probe_dim + pc);
  for (int b = 0; b < 2; ++b)
    for (int p = probe_dim; p < padded; ++p) out.at(b * padded + p, b * padded + p) = 1.0;
  return Unitary(2 * padded, std::move(out.entries));
}

StateVector padded_probe_state(const std::vector<Complex>& probe, int probe_dim) {
  if (probe.size() != static_cast<size_t>(probe_dim))
    throw std::invalid_argument("padded_probe_state: wrong probe length");
  const int q = probe_qubit_count(probe_dim);
  if (q == 0) throw std::invalid_argument("padded_probe_state: trivial probe has no qubits");
  std::vector<Complex> amps(size_t{1} << q, Complex{0.0, 0.0});
  std::copy(probe.begin(), probe.end(), amps.begin());
  return StateVector(q, std::move(amps));
}

namespace {

void guard_leg(uint32_t& done, int party, const char* leg) {
  const uint32_t flag = uint32_t{1} << party;
  if (done & flag)
    throw std::logic_error(std::string("attack hook applied twice to the same ") + leg);
  done |= flag;
}

std::vector<int> leg_targets(const PositionState& pos, int party) {
  std::vector<int> targets{pos.qubits.transit[static_cast<size_t>(party)]};
  for (int q : pos.qubits.probes[static_cast<size_t>(party)]) targets.push_back(q);
  return targets;
}

}  // namespace

void attack_forward(const AttackModel& model, PositionState& pos, int party,
                    EveRecord& eve, Rng& rng) {
  if (party < 0 || static_cast<size_t>(party) >= pos.qubits.transit.size())
    throw std::invalid_argument("attack_forward: bad party index");
  guard_leg(pos.qubits.forward_done, party, "forward leg");

  switch (model.kind) {
    case AttackKind::None:
    case AttackKind::DishonestParticipant:
      break;

    case AttackKind::MeasureResend: {
      auto [bit, post] =
          measure_z(pos.joint_state, pos.qubits.transit[static_cast<size_t>(party)], rng);
      pos.joint_state = std::move(post);
      if (eve.forward_bits.size() <= static_cast<size_t>(party))
        eve.forward_bits.resize(pos.qubits.transit.size());
      eve.forward_bits[static_cast<size_t>(party)] = bit;
      break;
    }

    case AttackKind::InterceptResend: {
      const int fresh = pos.joint_state.num_qubits();
      pos.joint_state = tensor(
          pos.joint_state,
          StateVector::qubit(model.fake_bits[static_cast<size_t>(party)]));
      pos.joint_state.set_label(fresh, "fake_P" + std::to_string(party + 2));
      pos.qubits.eve_kept.push_back(pos.qubits.transit[static_cast<size_t>(party)]);
      pos.qubits.transit[static_cast<size_t>(party)] = fresh;
      break;
    }

    case AttackKind::EntangleMeasure: {
      const int q = probe_qubit_count(model.probe.probe_dim);
      if (q > 0) {
        const int base = pos.joint_state.num_qubits();
        pos.joint_state = tensor(
            pos.joint_state, padded_probe_state(model.probe.initial_probe, model.probe.probe_dim));
        auto& probe_qubits = pos.qubits.probes[static_cast<size_t>(party)];
        for (int i = 0; i < q; ++i) {
          probe_qubits.push_back(base + i);
          pos.joint_state.set_label(base + i, "probe_P" + std::to_string(party + 2));
        }
      }
      pos.joint_state =
          apply_unitary(pos.joint_state,
                        embed_probe_unitary(model.probe.forward, model.probe.probe_dim),
                        leg_targets(pos, party));
      break;
    }
  }
}

void attack_backward(const AttackModel& model, PositionState& pos, int party, Rng&) {
  if (party < 0 || static_cast<size_t>(party) >= pos.qubits.transit.size())
    throw std::invalid_argument("attack_backward: bad party index");
  guard_leg(pos.qubits.backward_done, party, "return leg");

  if (model.kind != AttackKind::EntangleMeasure) return;
  pos.joint_state =
      apply_unitary(pos.joint_state,
                    embed_probe_unitary(model.probe.backward, model.probe.probe_dim),
                    leg_targets(pos, party));
}

Bits dishonest_publish(const Bits& target_key, const Bits& info_bits,
                       const std::vector<Bits>& other_party_keys) {
  Bits payload = target_key;
  for (const Bits& key : other_party_keys) payload = xor_bits(payload, key);
  return xor_bits(info_bits, payload);
}

Unitary probe_builtin(const std::string& name, int probe_dim) {
  if (name == "identity") return Unitary::identity(2 * probe_dim);
  if (name == "copy" || name == "cnot-probe") {
    if (probe_dim != 2)
      throw std::invalid_argument("built-in '" + name + "' requires probe_dim == 2");
    if (name == "copy")  // transit qubit controls a probe flip
      return Unitary(4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
    // probe qubit controls a transit flip
    return Unitary(4, {1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0});
  }
  throw std::invalid_argument("unknown probe coupling '" + name + "'");
}

}  // namespace sqka
