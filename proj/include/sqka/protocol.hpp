#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqka/bits.hpp"
#include "sqka/hash.hpp"
#include "sqka/quantum.hpp"
#include "sqka/rng.hpp"

namespace sqka {

struct AttackModel;

/// Parameters of one key-agreement session: N parties (party 0 quantum,
/// parties 1..N-1 classical), an n-bit key, m-bit commitments.
struct ProtocolConfig {
  int num_parties = 3;        // N
  int key_length = 16;        // n
  int digest_bits = 256;      // m
  double check_threshold = 0.0;
  uint64_t seed = 0;
  int max_restarts = 64;
  int max_qubits = 16;        // dense joint-state cap per position
  long max_positions = 1 << 20;

  long positions_per_round() const {
    return (long{1} << num_parties) * key_length;
  }
  int sift_count_per_party() const { return (1 << (num_parties - 1)) * key_length; }
  int classical_parties() const { return num_parties - 1; }
  void validate() const;
};

/// A party's original random key plus its published commitment digest.
struct KeyMaterial {
  Bits key_bits;    // length n
  Bits commitment;  // length m
};

KeyMaterial generate_key_material(int key_length, Rng& rng,
                                  int digest_bits = kDefaultDigestBits);

enum class PartyAction : uint8_t { Ctrl, Sift };

enum class CaseKind : uint8_t { AllCtrl, Mixed, AllSift };

/// Classification of one position by the classical parties' choices.
struct CaseTag {
  CaseKind kind = CaseKind::AllCtrl;
  std::vector<PartyAction> actions;  // per classical party

  /// Stats key: "a".."d" for two classical parties (three-party session),
  /// otherwise "all_ctrl" / "mixed" / "all_sift".
  std::string key() const;
};

CaseTag classify_case(const std::vector<PartyAction>& actions);

enum class PositionRole : uint8_t { Unassigned, SecurityOnly, Check, Info, Discarded };
enum class CheckOutcome : uint8_t { NotChecked, Pass, Fail };

/// Which tensor slot currently plays which role within a position's joint
/// state. Attacks may append qubits (fakes, probes) and relabel transit slots.
struct QubitRoles {
  int alice = 0;
  std::vector<int> transit;              // per classical party: in-flight qubit
  std::vector<std::vector<int>> probes;  // per classical party: attached probe qubits
  std::vector<int> eve_kept;             // genuine qubits detached by Eve
  uint32_t forward_done = 0;             // per-party leg guards (bit t)
  uint32_t backward_done = 0;
  uint32_t party_acted = 0;
};

/// Per-position record: the evolving joint state plus everything the
/// transcript needs (actions, results, classification, role, check outcome).
struct PositionState {
  long index = 0;  // 1-based position number within the round
  StateVector joint_state;
  std::vector<PartyAction> actions;
  std::vector<std::optional<int>> sift_results;  // per classical party
  std::optional<int> alice_info_bit;             // Alice's own-particle readout
  CaseTag case_tag;
  CheckOutcome check_outcome = CheckOutcome::NotChecked;
  PositionRole role = PositionRole::Unassigned;
  QubitRoles qubits;
};

struct CaseErrorStats {
  long checked = 0;
  long failures = 0;
  double rate() const { return checked == 0 ? 0.0 : double(failures) / double(checked); }
};

struct Transcript {
  ProtocolConfig config;
  std::vector<PositionState> positions;
  std::vector<std::vector<long>> published_sift_positions;  // per classical party
  std::vector<std::map<long, int>> reported_results;        // per classical party
  std::vector<Bits> masked_keys;                            // per party
  std::vector<Bits> commitments;                            // per party
  std::map<std::string, CaseErrorStats> case_error_rates;
  int restarts = 0;
};

enum class VerdictKind : uint8_t { Accepted, AbortedAtCheck, RejectedAtHash, Restarted };

std::string verdict_name(VerdictKind v);

/// Check statistics of one attempt (restarted attempts included), kept so
/// that experiment aggregation sees every performed check.
struct AttemptStats {
  bool completed_checks = false;  // got past position selection
  bool aborted = false;
  long positions = 0;
  std::map<std::string, CaseErrorStats> case_stats;
};

struct ProtocolOutcome {
  VerdictKind verdict = VerdictKind::Restarted;
  Bits final_key;                          // set when accepted
  std::vector<int> offending_parties;      // set when rejected at hash
  std::vector<Bits> per_party_final_keys;  // candidate key as computed by each party
  Transcript transcript;
  int restarts = 0;
  std::vector<AttemptStats> attempt_stats;  // one entry per attempt, in order
};

/// Step-2 preparation: 2^N * n positions, each holding the all-zero-subscript
/// plus-branch GHZ state with party roles attached.
std::vector<PositionState> prepare_round(const ProtocolConfig& config);

/// Step-3 choices: for each classical party independently, a uniformly random
/// half of the positions is SIFT, the rest CTRL. Indexed [party][position].
std::vector<std::vector<PartyAction>> choose_actions(const ProtocolConfig& config, Rng& rng);

/// Step-3 execution for one classical party at one position. CTRL reflects
/// (leaves the state untouched); SIFT measures the party's transit qubit in
/// the Z basis, records the bit and keeps the collapsed qubit as the fresh
/// resent particle (state-identical under ideal channels).
void classical_party_action(PositionState& pos, int party, PartyAction action, Rng& rng);

/// Step-4 check at one position. AllCtrl: GHZ measurement over all particles,
/// pass iff the outcome is the (+, all-zeros) element. Mixed: Z measurements
/// on Alice's particle and each CTRL party's returned particle, pass iff they
/// and the reported SIFT bits all agree. AllSift: Z measurements on all
/// particles, pass iff they and all reported bits agree.
CheckOutcome alice_check_action(PositionState& pos,
                                const std::vector<std::optional<int>>& reported, Rng& rng);

class InsufficientSiftOverlap : public std::runtime_error {
 public:
  explicit InsufficientSiftOverlap(const std::string& what) : std::runtime_error(what) {}
};

struct PositionSelection {
  std::vector<long> check;
  std::vector<long> info;
  std::vector<long> discard;
};

/// Step-4/5 split of the all-SIFT positions: n check positions and n INFO
/// positions chosen uniformly, extras discarded. Throws
/// InsufficientSiftOverlap when fewer than 2n positions are available.
PositionSelection select_positions(const std::vector<long>& all_sift_positions, int n,
                                   Rng& rng);

/// Q^r = M^r xor K^r.
Bits mask_key(const Bits& info_bits, const Bits& key);

/// K^r = Q^r xor M^r.
Bits unmask_key(const Bits& masked, const Bits& info_bits);

struct PartyVerdict {
  bool accepted = false;
  Bits final_key;               // XOR of own key and all recovered keys
  std::vector<int> mismatched;  // parties whose commitment failed to verify
};

/// Step-6 verification from one party's point of view: recompute each other
/// party's digest and accept the XOR of all keys iff every digest matches.
PartyVerdict finalize_key(const KeyMaterial& own,
                          const std::vector<std::pair<int, Bits>>& recovered,
                          const std::vector<std::pair<int, Bits>>& commitments,
                          int digest_bits);

/// Full six-step session with optional adversary hooks around the two transit
/// legs. Aborts at step 4 when any per-case error rate exceeds the threshold;
/// hash rejection and insufficient SIFT overlap restart from step 1 (fresh
/// keys) up to max_restarts times.
ProtocolOutcome run_protocol(const ProtocolConfig& config, const AttackModel& attack,
                             Rng& rng);

/// Same session with no adversary hooks installed at all.
ProtocolOutcome run_protocol(const ProtocolConfig& config, Rng& rng);

}  // namespace sqka
