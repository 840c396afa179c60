#include "sqka/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "sqka/adversary.hpp"

namespace sqka {

void ProtocolConfig::validate() const {
  if (num_parties < 3) throw std::invalid_argument("config: N must be >= 3");
  if (key_length < 1) throw std::invalid_argument("config: n must be >= 1");
  if (digest_bits < 1) throw std::invalid_argument("config: m must be >= 1");
  if (digest_bits > 256 || digest_bits % 8 != 0)
    throw std::invalid_argument("config: m must be a multiple of 8, at most 256");
  if (check_threshold < 0.0 || check_threshold > 1.0)
    throw std::invalid_argument("config: check_threshold must lie in [0,1]");
  if (max_restarts < 0) throw std::invalid_argument("config: max_restarts must be >= 0");
  if (num_parties > max_qubits)
    throw std::invalid_argument("config: N exceeds the qubit cap");
  if (positions_per_round() > max_positions)
    throw std::invalid_argument("config: 2^N * n exceeds the position cap");
}

KeyMaterial generate_key_material(int key_length, Rng& rng, int digest_bits) {
  if (key_length < 1) throw std::invalid_argument("key length must be >= 1");
  KeyMaterial out;
  out.key_bits = random_bits(static_cast<size_t>(key_length), rng);
  out.commitment = commit_key(out.key_bits, digest_bits);
  return out;
}

std::string CaseTag::key() const {
  if (actions.size() == 2) {
    switch (kind) {
      case CaseKind::AllCtrl: return "a";
      case CaseKind::AllSift: return "d";
      case CaseKind::Mixed:
        return actions[0] == PartyAction::Ctrl ? "b" : "c";
    }
  }
  switch (kind) {
    case CaseKind::AllCtrl: return "all_ctrl";
    case CaseKind::Mixed: return "mixed";
    case CaseKind::AllSift: return "all_sift";
  }
  return "?";
}

CaseTag classify_case(const std::vector<PartyAction>& actions) {
  if (actions.empty()) throw std::invalid_argument("classify_case: no actions");
  const bool any_sift = std::any_of(actions.begin(), actions.end(),
                                    [](PartyAction a) { return a == PartyAction::Sift; });
  const bool all_sift = std::all_of(actions.begin(), actions.end(),
                                    [](PartyAction a) { return a == PartyAction::Sift; });
  CaseTag tag;
  tag.actions = actions;
  tag.kind = all_sift ? CaseKind::AllSift
                      : (any_sift ? CaseKind::Mixed : CaseKind::AllCtrl);
  return tag;
}

std::string verdict_name(VerdictKind v) {
  switch (v) {
    case VerdictKind::Accepted: return "accepted";
    case VerdictKind::AbortedAtCheck: return "aborted_at_check";
    case VerdictKind::RejectedAtHash: return "rejected_at_hash";
    case VerdictKind::Restarted: return "restarted";
  }
  return "?";
}

std::vector<PositionState> prepare_round(const ProtocolConfig& config) {
  config.validate();
  const int n_classical = config.classical_parties();
  const long total = config.positions_per_round();

  const StateVector initial = ghz_state(
      config.num_parties, Bits(static_cast<size_t>(n_classical), 0), '+');

  std::vector<PositionState> positions(static_cast<size_t>(total));
  for (long j = 0; j < total; ++j) {
    PositionState& pos = positions[static_cast<size_t>(j)];
    pos.index = j + 1;
    pos.joint_state = initial;
    pos.joint_state.set_label(0, "P1");
    pos.sift_results.assign(static_cast<size_t>(n_classical), std::nullopt);
    pos.qubits.alice = 0;
    pos.qubits.transit.resize(static_cast<size_t>(n_classical));
    pos.qubits.probes.assign(static_cast<size_t>(n_classical), {});
    for (int t = 0; t < n_classical; ++t) {
      pos.qubits.transit[static_cast<size_t>(t)] = 1 + t;
      pos.joint_state.set_label(1 + t, "P" + std::to_string(t + 2));
    }
  }
  return positions;
}

std::vector<std::vector<PartyAction>> choose_actions(const ProtocolConfig& config,
                                                     Rng& rng) {
  const long total = config.positions_per_round();
  const size_t sift_count = static_cast<size_t>(config.sift_count_per_party());

  std::vector<std::vector<PartyAction>> actions(
      static_cast<size_t>(config.classical_parties()),
      std::vector<PartyAction>(static_cast<size_t>(total), PartyAction::Ctrl));
  for (auto& party_actions : actions) {
    for (size_t j : rng.subset(static_cast<size_t>(total), sift_count))
      party_actions[j] = PartyAction::Sift;
  }
  return actions;
}

void classical_party_action(PositionState& pos, int party, PartyAction action, Rng& rng) {
  if (party < 0 || static_cast<size_t>(party) >= pos.qubits.transit.size())
    throw std::invalid_argument("classical_party_action: bad party index");
  const uint32_t flag = uint32_t{1} << party;
  if (pos.qubits.party_acted & flag)
    throw std::logic_error("classical_party_action: position already processed for party");
  pos.qubits.party_acted |= flag;

  if (action == PartyAction::Ctrl) return;
  auto [bit, post] =
      measure_z(pos.joint_state, pos.qubits.transit[static_cast<size_t>(party)], rng);
  pos.sift_results[static_cast<size_t>(party)] = bit;
  pos.joint_state = std::move(post);
}

CheckOutcome alice_check_action(PositionState& pos,
                                const std::vector<std::optional<int>>& reported,
                                Rng& rng) {
  const CaseTag& tag = pos.case_tag;
  if (tag.actions.size() != pos.qubits.transit.size())
    throw std::invalid_argument("alice_check_action: position not classified");

  std::vector<int> observed;

  if (tag.kind == CaseKind::AllCtrl) {
    std::vector<int> targets{pos.qubits.alice};
    for (int q : pos.qubits.transit) targets.push_back(q);
    auto [label, post] = measure_ghz(pos.joint_state, targets, rng);
    pos.joint_state = std::move(post);
    const bool pass = label.sign == '+' &&
                      std::all_of(label.bits.begin(), label.bits.end(),
                                  [](uint8_t b) { return b == 0; });
    pos.check_outcome = pass ? CheckOutcome::Pass : CheckOutcome::Fail;
    return pos.check_outcome;
  }

  // Mixed: Alice's own particle plus every CTRL party's returned particle.
  // AllSift: all particles.
  {
    auto [bit, post] = measure_z(pos.joint_state, pos.qubits.alice, rng);
    pos.joint_state = std::move(post);
    observed.push_back(bit);
  }
  for (size_t t = 0; t < tag.actions.size(); ++t) {
    const bool measure_returned =
        tag.kind == CaseKind::AllSift || tag.actions[t] == PartyAction::Ctrl;
    if (measure_returned) {
      auto [bit, post] = measure_z(pos.joint_state, pos.qubits.transit[t], rng);
      pos.joint_state = std::move(post);
      observed.push_back(bit);
    }
    if (tag.actions[t] == PartyAction::Sift) {
      if (t >= reported.size() || !reported[t].has_value())
        throw std::invalid_argument(
            "alice_check_action: missing reported bit for SIFTing party");
      observed.push_back(*reported[t]);
    }
  }

  const bool pass = std::all_of(observed.begin(), observed.end(),
                                [&](int b) { return b == observed.front(); });
  pos.check_outcome = pass ? CheckOutcome::Pass : CheckOutcome::Fail;
  return pos.check_outcome;
}

PositionSelection select_positions(const std::vector<long>& all_sift_positions, int n,
                                   Rng& rng) {
  if (static_cast<long>(all_sift_positions.size()) < 2L * n)
    throw InsufficientSiftOverlap(
        "only " + std::to_string(all_sift_positions.size()) +
        " all-SIFT positions, need " + std::to_string(2L * n));
  std::vector<long> pool = all_sift_positions;
  rng.shuffle(pool);
  PositionSelection sel;
  sel.check.assign(pool.begin(), pool.begin() + n);
  sel.info.assign(pool.begin() + n, pool.begin() + 2L * n);
  sel.discard.assign(pool.begin() + 2L * n, pool.end());
  std::sort(sel.check.begin(), sel.check.end());
  std::sort(sel.info.begin(), sel.info.end());
  std::sort(sel.discard.begin(), sel.discard.end());
  return sel;
}

Bits mask_key(const Bits& info_bits, const Bits& key) { return xor_bits(info_bits, key); }

Bits unmask_key(const Bits& masked, const Bits& info_bits) {
  return xor_bits(masked, info_bits);
}

PartyVerdict finalize_key(const KeyMaterial& own,
                          const std::vector<std::pair<int, Bits>>& recovered,
                          const std::vector<std::pair<int, Bits>>& commitments,
                          int digest_bits) {
  if (recovered.size() != commitments.size())
    throw std::invalid_argument("finalize_key: one commitment per recovered key");

  PartyVerdict verdict;
  verdict.final_key = own.key_bits;
  for (const auto& [party, key] : recovered) {
    verdict.final_key = xor_bits(verdict.final_key, key);
    const Bits* expected = nullptr;
    for (const auto& [p, digest] : commitments)
      if (p == party) expected = &digest;
    if (expected == nullptr)
      throw std::invalid_argument("finalize_key: missing commitment for party");
    if (commit_key(key, digest_bits) != *expected) verdict.mismatched.push_back(party);
  }
  verdict.accepted = verdict.mismatched.empty();
  return verdict;
}

namespace {

struct Attempt {
  enum class Status { Accepted, AbortedAtCheck, RejectedAtHash, InsufficientSift };
  Status status = Status::InsufficientSift;
  Transcript transcript;
  Bits final_key;
  std::vector<int> offenders;
  std::vector<Bits> per_party_keys;

  AttemptStats stats() const {
    AttemptStats s;
    s.completed_checks = status != Status::InsufficientSift;
    s.aborted = status == Status::AbortedAtCheck;
    s.positions = static_cast<long>(transcript.positions.size());
    s.case_stats = transcript.case_error_rates;
    return s;
  }
};

bool position_is_checked(const PositionState& pos) {
  return pos.case_tag.kind != CaseKind::AllSift || pos.role == PositionRole::Check;
}

Attempt run_attempt(const ProtocolConfig& config, const AttackModel* attack, Rng& rng) {
  const int num_parties = config.num_parties;
  const int n_classical = config.classical_parties();
  const int n = config.key_length;
  const long total = config.positions_per_round();

  Attempt attempt;
  Transcript& tr = attempt.transcript;
  tr.config = config;

  // Step 1: original keys and commitments.
  std::vector<KeyMaterial> keys;
  keys.reserve(static_cast<size_t>(num_parties));
  for (int p = 0; p < num_parties; ++p)
    keys.push_back(generate_key_material(n, rng, config.digest_bits));
  for (const KeyMaterial& k : keys) tr.commitments.push_back(k.commitment);

  // Step 2: GHZ resource, one position at a time (strictly sequential).
  tr.positions = prepare_round(config);

  // Step 3: CTRL/SIFT choices, transit with adversary hooks on both legs.
  const auto actions = choose_actions(config, rng);
  EveMemory eve;
  eve.records.resize(static_cast<size_t>(total));
  const bool hooks = attack != nullptr;

  for (long j = 0; j < total; ++j) {
    PositionState& pos = tr.positions[static_cast<size_t>(j)];
    pos.actions.resize(static_cast<size_t>(n_classical));
    for (int t = 0; t < n_classical; ++t)
      pos.actions[static_cast<size_t>(t)] = actions[static_cast<size_t>(t)][static_cast<size_t>(j)];

    EveRecord& record = eve.records[static_cast<size_t>(j)];
    if (hooks) {
      record.forward_bits.assign(static_cast<size_t>(n_classical), std::nullopt);
      record.kept_bits.assign(static_cast<size_t>(n_classical), std::nullopt);
      for (int t = 0; t < n_classical; ++t) attack_forward(*attack, pos, t, record, rng);
    }
    for (int t = 0; t < n_classical; ++t)
      classical_party_action(pos, t, pos.actions[static_cast<size_t>(t)], rng);
    if (hooks)
      for (int t = 0; t < n_classical; ++t) attack_backward(*attack, pos, t, rng);

    pos.case_tag = classify_case(pos.actions);
  }

  // Step 4: parties announce their SIFT positions.
  tr.published_sift_positions.assign(static_cast<size_t>(n_classical), {});
  tr.reported_results.assign(static_cast<size_t>(n_classical), {});
  for (long j = 0; j < total; ++j) {
    const PositionState& pos = tr.positions[static_cast<size_t>(j)];
    for (int t = 0; t < n_classical; ++t)
      if (pos.actions[static_cast<size_t>(t)] == PartyAction::Sift)
        tr.published_sift_positions[static_cast<size_t>(t)].push_back(pos.index);
  }

  // Split the all-SIFT positions into check / INFO / discard.
  std::vector<long> all_sift;
  for (long j = 0; j < total; ++j)
    if (tr.positions[static_cast<size_t>(j)].case_tag.kind == CaseKind::AllSift)
      all_sift.push_back(j);
  PositionSelection selection;
  try {
    selection = select_positions(all_sift, n, rng);
  } catch (const InsufficientSiftOverlap&) {
    attempt.status = Attempt::Status::InsufficientSift;
    return attempt;
  }
  for (long j : selection.check)
    tr.positions[static_cast<size_t>(j)].role = PositionRole::Check;
  for (long j : selection.info)
    tr.positions[static_cast<size_t>(j)].role = PositionRole::Info;
  for (long j : selection.discard)
    tr.positions[static_cast<size_t>(j)].role = PositionRole::Discarded;
  for (long j = 0; j < total; ++j) {
    PositionState& pos = tr.positions[static_cast<size_t>(j)];
    if (pos.case_tag.kind != CaseKind::AllSift) pos.role = PositionRole::SecurityOnly;
  }

  // SIFTing parties disclose their bits at every checked position.
  for (long j = 0; j < total; ++j) {
    const PositionState& pos = tr.positions[static_cast<size_t>(j)];
    if (!position_is_checked(pos)) continue;
    for (int t = 0; t < n_classical; ++t)
      if (pos.actions[static_cast<size_t>(t)] == PartyAction::Sift)
        tr.reported_results[static_cast<size_t>(t)][pos.index] =
            *pos.sift_results[static_cast<size_t>(t)];
  }

  // Alice's check measurements, in position order.
  for (long j = 0; j < total; ++j) {
    PositionState& pos = tr.positions[static_cast<size_t>(j)];
    if (!position_is_checked(pos)) continue;
    std::vector<std::optional<int>> reported(static_cast<size_t>(n_classical));
    for (int t = 0; t < n_classical; ++t) {
      const auto& results = tr.reported_results[static_cast<size_t>(t)];
      if (auto it = results.find(pos.index); it != results.end())
        reported[static_cast<size_t>(t)] = it->second;
    }
    const CheckOutcome outcome = alice_check_action(pos, reported, rng);
    CaseErrorStats& stats = tr.case_error_rates[pos.case_tag.key()];
    ++stats.checked;
    if (outcome == CheckOutcome::Fail) ++stats.failures;
  }

  const bool abort = std::any_of(
      tr.case_error_rates.begin(), tr.case_error_rates.end(),
      [&](const auto& kv) { return kv.second.rate() > config.check_threshold; });
  if (abort) {
    attempt.status = Attempt::Status::AbortedAtCheck;
    return attempt;
  }

  // Step 5: INFO readouts and masked-key publication.
  std::vector<Bits> info_bits(static_cast<size_t>(num_parties));
  for (long j : selection.info) {
    PositionState& pos = tr.positions[static_cast<size_t>(j)];
    auto [bit, post] = measure_z(pos.joint_state, pos.qubits.alice, rng);
    pos.joint_state = std::move(post);
    pos.alice_info_bit = bit;
    info_bits[0].push_back(static_cast<uint8_t>(bit));
    for (int t = 0; t < n_classical; ++t)
      info_bits[static_cast<size_t>(1 + t)].push_back(
          static_cast<uint8_t>(*pos.sift_results[static_cast<size_t>(t)]));
  }

  tr.masked_keys.resize(static_cast<size_t>(num_parties));
  for (int p = 0; p < num_parties; ++p)
    tr.masked_keys[static_cast<size_t>(p)] =
        mask_key(info_bits[static_cast<size_t>(p)], keys[static_cast<size_t>(p)].key_bits);

  if (attack != nullptr && attack->kind == AttackKind::DishonestParticipant) {
    const int publisher = attack->cheaters.back();
    std::vector<Bits> other_keys;
    for (int p = 0; p < num_parties; ++p)
      if (p != publisher) other_keys.push_back(keys[static_cast<size_t>(p)].key_bits);
    tr.masked_keys[static_cast<size_t>(publisher)] = dishonest_publish(
        attack->target_key, info_bits[static_cast<size_t>(publisher)], other_keys);
  }

  // Step 6: every party unmasks and verifies the others.
  attempt.per_party_keys.resize(static_cast<size_t>(num_parties));
  std::vector<int> offenders;
  bool all_accept = true;
  for (int p = 0; p < num_parties; ++p) {
    std::vector<std::pair<int, Bits>> recovered;
    std::vector<std::pair<int, Bits>> commitments;
    for (int v = 0; v < num_parties; ++v) {
      if (v == p) continue;
      recovered.emplace_back(v, unmask_key(tr.masked_keys[static_cast<size_t>(v)],
                                           info_bits[static_cast<size_t>(p)]));
      commitments.emplace_back(v, keys[static_cast<size_t>(v)].commitment);
    }
    const PartyVerdict verdict =
        finalize_key(keys[static_cast<size_t>(p)], recovered, commitments, config.digest_bits);
    attempt.per_party_keys[static_cast<size_t>(p)] = verdict.final_key;
    if (!verdict.accepted) {
      all_accept = false;
      for (int v : verdict.mismatched)
        if (std::find(offenders.begin(), offenders.end(), v) == offenders.end())
          offenders.push_back(v);
    }
  }

  // Eve's optional post-processing of kept genuine qubits.
  if (attack != nullptr && attack->kind == AttackKind::InterceptResend &&
      attack->measure_kept) {
    for (long j = 0; j < total; ++j) {
      PositionState& pos = tr.positions[static_cast<size_t>(j)];
      EveRecord& record = eve.records[static_cast<size_t>(j)];
      for (size_t t = 0; t < pos.qubits.eve_kept.size(); ++t) {
        auto [bit, post] = measure_z(pos.joint_state, pos.qubits.eve_kept[t], rng);
        pos.joint_state = std::move(post);
        record.kept_bits[t] = bit;
      }
    }
  }

  if (!all_accept) {
    std::sort(offenders.begin(), offenders.end());
    attempt.status = Attempt::Status::RejectedAtHash;
    attempt.offenders = std::move(offenders);
    return attempt;
  }

  attempt.status = Attempt::Status::Accepted;
  attempt.final_key = attempt.per_party_keys.front();
  return attempt;
}

}  // namespace

namespace {

ProtocolOutcome run_protocol_impl(const ProtocolConfig& config, const AttackModel* attack,
                                  Rng& rng) {
  config.validate();
  if (attack != nullptr) attack->validate(config);

  std::vector<AttemptStats> history;
  auto to_outcome = [&history](Attempt&& attempt, int attempts) {
    ProtocolOutcome out;
    out.attempt_stats = std::move(history);
    out.restarts = attempts;
    out.transcript = std::move(attempt.transcript);
    out.per_party_final_keys = std::move(attempt.per_party_keys);
    switch (attempt.status) {
      case Attempt::Status::Accepted:
        out.verdict = VerdictKind::Accepted;
        out.final_key = std::move(attempt.final_key);
        break;
      case Attempt::Status::AbortedAtCheck:
        out.verdict = VerdictKind::AbortedAtCheck;
        break;
      case Attempt::Status::RejectedAtHash:
        out.verdict = VerdictKind::RejectedAtHash;
        out.offending_parties = std::move(attempt.offenders);
        break;
      case Attempt::Status::InsufficientSift:
        out.verdict = VerdictKind::Restarted;
        break;
    }
    return out;
  };

  // A hash rejection whose restart budget ran out is still the substantive
  // result of the session; a bare Restarted verdict is reported only when no
  // attempt ever got past position selection.
  std::optional<Attempt> last_completed;
  for (int attempts = 0;; ++attempts) {
    Attempt attempt = run_attempt(config, attack, rng);
    attempt.transcript.restarts = attempts;
    history.push_back(attempt.stats());

    const bool wants_restart = attempt.status == Attempt::Status::InsufficientSift ||
                               attempt.status == Attempt::Status::RejectedAtHash;
    if (!wants_restart) return to_outcome(std::move(attempt), attempts);
    if (attempt.status == Attempt::Status::RejectedAtHash)
      last_completed = std::move(attempt);
    if (attempts >= config.max_restarts) {
      if (last_completed.has_value()) {
        last_completed->transcript.restarts = attempts;
        return to_outcome(std::move(*last_completed), attempts);
      }
      return to_outcome(std::move(attempt), attempts);
    }
  }
}

}  // namespace

ProtocolOutcome run_protocol(const ProtocolConfig& config, const AttackModel& attack,
                             Rng& rng) {
  return run_protocol_impl(config, &attack, rng);
}

ProtocolOutcome run_protocol(const ProtocolConfig& config, Rng& rng) {
  return run_protocol_impl(config, nullptr, rng);
}

}  // namespace sqka
