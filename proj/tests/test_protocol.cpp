#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "sqka/adversary.hpp"
#include "sqka/json_io.hpp"
#include "sqka/protocol.hpp"

using namespace sqka;

namespace {

ProtocolConfig small_config(int n_parties = 3, int n = 4, uint64_t seed = 1) {
  ProtocolConfig c;
  c.num_parties = n_parties;
  c.key_length = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("commit_key is a truncatable SHA-256 over the ascii bits") {
  // reference digests computed with an independent SHA-256 implementation
  CHECK(bits_to_hex(commit_key(Bits{}, 256)) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(bits_to_hex(commit_key(bits_from_string("0101"), 256)) ==
        "07334386287751ba02a4588c1a0875dbd074a61bd9e6ab7c48d244eacd0c99e0");
  // single-bit changes move the digest
  CHECK(commit_key(bits_from_string("1101")) != commit_key(bits_from_string("0101")));
  CHECK(commit_key(bits_from_string("0100")) != commit_key(bits_from_string("0101")));
  // determinism and length
  CHECK(commit_key(bits_from_string("10101010")) ==
        commit_key(bits_from_string("10101010")));
  CHECK(commit_key(bits_from_string("1"), 256).size() == 256);
  // truncation keeps the digest prefix
  const Bits full = commit_key(bits_from_string("0101"), 256);
  const Bits trunc = commit_key(bits_from_string("0101"), 64);
  CHECK(trunc.size() == 64);
  CHECK(std::equal(trunc.begin(), trunc.end(), full.begin()));
  CHECK_THROWS_AS(commit_key(Bits{}, 0), std::invalid_argument);
  CHECK_THROWS_AS(commit_key(Bits{}, 12), std::invalid_argument);
  CHECK_THROWS_AS(commit_key(Bits{}, 512), std::invalid_argument);
}

TEST_CASE("generate_key_material") {
  Rng a(42), b(42);
  const KeyMaterial ka = generate_key_material(8, a);
  const KeyMaterial kb = generate_key_material(8, b);
  CHECK(ka.key_bits == kb.key_bits);
  CHECK(ka.key_bits.size() == 8);
  CHECK(ka.commitment == commit_key(ka.key_bits));

  // single-bit frequency: binomial 4-sigma bound around 1/2 over 10^4 draws
  Rng rng(7);
  long ones = 0;
  const long draws = 10000;
  for (long i = 0; i < draws; ++i) ones += generate_key_material(1, rng).key_bits[0];
  CHECK(std::abs(double(ones) / draws - 0.5) < 0.02);
}

TEST_CASE("prepare_round builds the GHZ resource") {
  SUBCASE("three parties, n=2: 16 positions") {
    const auto positions = prepare_round(small_config(3, 2));
    REQUIRE(positions.size() == 16);
    for (const auto& pos : positions) {
      CHECK(pos.joint_state.num_qubits() == 3);
      CHECK(pos.joint_state.amplitude(0).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
      CHECK(pos.joint_state.amplitude(7).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
      CHECK(pos.joint_state.norm() == doctest::Approx(1.0));
    }
    CHECK(positions.front().index == 1);
    CHECK(positions.back().index == 16);
  }
  SUBCASE("four parties, n=1: 16 positions of the 4-particle state") {
    const auto positions = prepare_round(small_config(4, 1));
    REQUIRE(positions.size() == 16);
    CHECK(positions[0].joint_state.num_qubits() == 4);
    CHECK(positions[0].joint_state.amplitude(15).real() ==
          doctest::Approx(1.0 / std::sqrt(2.0)));
  }
  SUBCASE("resource cap") {
    ProtocolConfig c = small_config(3, 4);
    c.max_positions = 16;
    CHECK_THROWS_AS(prepare_round(c), std::invalid_argument);
  }
}

TEST_CASE("choose_actions picks exactly half per party") {
  for (int n_parties : {3, 4}) {
    const ProtocolConfig c = small_config(n_parties, 2);
    Rng rng(5);
    const auto actions = choose_actions(c, rng);
    REQUIRE(actions.size() == static_cast<size_t>(n_parties - 1));
    for (const auto& party : actions) {
      const long sifts = std::count(party.begin(), party.end(), PartyAction::Sift);
      CHECK(sifts == c.sift_count_per_party());
      CHECK(party.size() == static_cast<size_t>(c.positions_per_round()));
    }
  }
  // determinism and seed sensitivity
  Rng r1(9), r2(9), r3(10);
  const ProtocolConfig c = small_config(3, 4);
  CHECK(choose_actions(c, r1) == choose_actions(c, r2));
  CHECK(choose_actions(c, r1) != choose_actions(c, r3));
}

TEST_CASE("classify_case") {
  using PA = PartyAction;
  CHECK(classify_case({PA::Ctrl, PA::Ctrl}).key() == "a");
  CHECK(classify_case({PA::Ctrl, PA::Sift}).key() == "b");
  CHECK(classify_case({PA::Sift, PA::Ctrl}).key() == "c");
  CHECK(classify_case({PA::Sift, PA::Sift}).key() == "d");
  CHECK(classify_case({PA::Ctrl, PA::Sift, PA::Ctrl}).key() == "mixed");
  CHECK(classify_case({PA::Ctrl, PA::Sift, PA::Ctrl}).kind == CaseKind::Mixed);
  CHECK(classify_case({PA::Ctrl, PA::Ctrl, PA::Ctrl}).kind == CaseKind::AllCtrl);
  CHECK(classify_case({PA::Sift, PA::Sift, PA::Sift}).kind == CaseKind::AllSift);
}

TEST_CASE("classical_party_action") {
  auto make_pos = [] {
    auto positions = prepare_round(small_config(3, 1));
    return positions.front();
  };

  SUBCASE("CTRL leaves the state bitwise identical") {
    Rng rng(3);
    PositionState pos = make_pos();
    const auto before = pos.joint_state.amplitudes();
    classical_party_action(pos, 0, PartyAction::Ctrl, rng);
    CHECK(pos.joint_state.amplitudes() == before);
    CHECK_FALSE(pos.sift_results[0].has_value());
  }

  SUBCASE("SIFT collapses and records") {
    Rng rng(3);
    int seen[2] = {0, 0};
    for (int trial = 0; trial < 100; ++trial) {
      PositionState pos = make_pos();
      classical_party_action(pos, 0, PartyAction::Sift, rng);
      REQUIRE(pos.sift_results[0].has_value());
      const int bit = *pos.sift_results[0];
      ++seen[bit];
      CHECK(pos.joint_state.amplitude(bit ? 7 : 0).real() == doctest::Approx(1.0));
    }
    CHECK(seen[0] > 20);
    CHECK(seen[1] > 20);
  }

  SUBCASE("SIFT on a collapsed state is deterministic") {
    Rng rng(3);
    PositionState pos = make_pos();
    classical_party_action(pos, 0, PartyAction::Sift, rng);
    const int first = *pos.sift_results[0];
    classical_party_action(pos, 1, PartyAction::Sift, rng);
    CHECK(*pos.sift_results[1] == first);
  }

  SUBCASE("double-processing the same party throws") {
    Rng rng(3);
    PositionState pos = make_pos();
    classical_party_action(pos, 0, PartyAction::Ctrl, rng);
    CHECK_THROWS_AS(classical_party_action(pos, 0, PartyAction::Ctrl, rng),
                    std::logic_error);
  }
}

TEST_CASE("alice_check_action passes pristine positions") {
  Rng rng(11);
  auto fresh = [&](std::vector<PartyAction> actions) {
    auto positions = prepare_round(small_config(3, 1));
    PositionState pos = positions.front();
    pos.actions = actions;
    for (size_t t = 0; t < actions.size(); ++t)
      classical_party_action(pos, static_cast<int>(t), actions[t], rng);
    pos.case_tag = classify_case(actions);
    return pos;
  };

  for (int trial = 0; trial < 50; ++trial) {
    using PA = PartyAction;
    for (auto actions : {std::vector<PA>{PA::Ctrl, PA::Ctrl},
                         std::vector<PA>{PA::Ctrl, PA::Sift},
                         std::vector<PA>{PA::Sift, PA::Ctrl},
                         std::vector<PA>{PA::Sift, PA::Sift}}) {
      PositionState pos = fresh(actions);
      CHECK(alice_check_action(pos, pos.sift_results, rng) == CheckOutcome::Pass);
    }
  }

  SUBCASE("missing reported bit throws") {
    PositionState pos = fresh({PartyAction::Ctrl, PartyAction::Sift});
    std::vector<std::optional<int>> reported(2);
    CHECK_THROWS_AS(alice_check_action(pos, reported, rng), std::invalid_argument);
  }
}

TEST_CASE("select_positions") {
  Rng rng(13);
  std::vector<long> pool;
  for (long i = 0; i < 8; ++i) pool.push_back(i * 3);

  SUBCASE("exact split, nothing discarded") {
    const auto sel = select_positions(pool, 4, rng);
    CHECK(sel.check.size() == 4);
    CHECK(sel.info.size() == 4);
    CHECK(sel.discard.empty());
    std::set<long> all(sel.check.begin(), sel.check.end());
    all.insert(sel.info.begin(), sel.info.end());
    CHECK(all.size() == 8);
  }
  SUBCASE("extras are discarded") {
    std::vector<long> big = pool;
    big.push_back(100);
    big.push_back(101);
    big.push_back(102);
    const auto sel = select_positions(big, 4, rng);
    CHECK(sel.check.size() == 4);
    CHECK(sel.info.size() == 4);
    CHECK(sel.discard.size() == 3);
  }
  SUBCASE("one short throws") {
    std::vector<long> short_pool(pool.begin(), pool.end() - 1);
    CHECK_THROWS_AS(select_positions(short_pool, 4, rng), InsufficientSiftOverlap);
  }
}

TEST_CASE("mask/unmask") {
  CHECK(bits_to_string(mask_key(bits_from_string("1010"), bits_from_string("0110"))) ==
        "1100");
  CHECK(mask_key(bits_from_string("1010"), bits_from_string("0000")) ==
        bits_from_string("1010"));
  CHECK(bits_to_string(unmask_key(bits_from_string("1100"), bits_from_string("1010"))) ==
        "0110");
  CHECK_THROWS_AS(mask_key(bits_from_string("10"), bits_from_string("101")),
                  std::invalid_argument);

  // exhaustive involution at n = 8
  for (uint32_t m = 0; m < 256; ++m) {
    Bits info(8), key(8);
    for (int i = 0; i < 8; ++i) info[static_cast<size_t>(i)] = (m >> i) & 1;
    for (uint32_t k = 0; k < 256; ++k) {
      for (int i = 0; i < 8; ++i) key[static_cast<size_t>(i)] = (k >> i) & 1;
      if (unmask_key(mask_key(info, key), info) != key) {
        FAIL("mask/unmask failed to round-trip");
      }
    }
  }
}

TEST_CASE("finalize_key") {
  Rng rng(17);
  const int n = 16;
  KeyMaterial alice = generate_key_material(n, rng);
  KeyMaterial bob = generate_key_material(n, rng);
  KeyMaterial charlie = generate_key_material(n, rng);

  SUBCASE("honest recovery accepts the XOR of all keys") {
    const auto verdict = finalize_key(
        alice, {{1, bob.key_bits}, {2, charlie.key_bits}},
        {{1, bob.commitment}, {2, charlie.commitment}}, kDefaultDigestBits);
    CHECK(verdict.accepted);
    CHECK(verdict.final_key ==
          xor_bits(alice.key_bits, xor_bits(bob.key_bits, charlie.key_bits)));
  }

  SUBCASE("a substituted key is rejected and named") {
    Bits fake = bob.key_bits;
    fake[3] ^= 1;
    const auto verdict =
        finalize_key(alice, {{1, fake}, {2, charlie.key_bits}},
                     {{1, bob.commitment}, {2, charlie.commitment}}, kDefaultDigestBits);
    CHECK_FALSE(verdict.accepted);
    CHECK(verdict.mismatched == std::vector<int>{1});
  }

  SUBCASE("all-zero keys accept the all-zero final key") {
    KeyMaterial zero{Bits(4, 0), commit_key(Bits(4, 0))};
    const auto verdict = finalize_key(zero, {{1, Bits(4, 0)}, {2, Bits(4, 0)}},
                                      {{1, zero.commitment}, {2, zero.commitment}},
                                      kDefaultDigestBits);
    CHECK(verdict.accepted);
    CHECK(verdict.final_key == Bits(4, 0));
  }
}

TEST_CASE("run_protocol honest runs accept with matching keys") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Rng rng(seed);
    const ProtocolConfig config = small_config(3, 16, seed);
    const auto outcome = run_protocol(config, rng);
    REQUIRE(outcome.verdict == VerdictKind::Accepted);
    for (const auto& key : outcome.per_party_final_keys) CHECK(key == outcome.final_key);
    for (const auto& [key, stats] : outcome.transcript.case_error_rates)
      CHECK(stats.failures == 0);
  }
}

TEST_CASE("run_protocol upholds the transcript invariants") {
  Rng rng(23);
  const ProtocolConfig config = small_config(3, 8, 23);
  const auto outcome = run_protocol(config, rng);
  REQUIRE(outcome.verdict == VerdictKind::Accepted);
  const Transcript& tr = outcome.transcript;

  // SIFT cardinality per party
  for (const auto& published : tr.published_sift_positions)
    CHECK(published.size() == static_cast<size_t>(config.sift_count_per_party()));

  // reported bits only at positions the party SIFTed
  for (size_t t = 0; t < tr.reported_results.size(); ++t) {
    const auto& published = tr.published_sift_positions[t];
    for (const auto& [position, bit] : tr.reported_results[t]) {
      CHECK(std::find(published.begin(), published.end(), position) != published.end());
      CHECK((bit == 0 || bit == 1));
    }
  }

  // check/info split: disjoint, exactly n each, info only in the all-SIFT case
  long checks = 0, infos = 0;
  for (const auto& pos : tr.positions) {
    if (pos.role == PositionRole::Check) ++checks;
    if (pos.role == PositionRole::Info) {
      ++infos;
      CHECK(pos.case_tag.kind == CaseKind::AllSift);
      CHECK(pos.check_outcome == CheckOutcome::NotChecked);
    }
  }
  CHECK(checks == config.key_length);
  CHECK(infos == config.key_length);

  // masked keys have length n; commitments have length m
  for (const auto& q : tr.masked_keys)
    CHECK(q.size() == static_cast<size_t>(config.key_length));
  for (const auto& c : tr.commitments)
    CHECK(c.size() == static_cast<size_t>(config.digest_bits));

  // INFO bits agree across parties (correctness of the agreement rounds)
  for (const auto& pos : tr.positions) {
    if (pos.role != PositionRole::Info) continue;
    REQUIRE(pos.alice_info_bit.has_value());
    for (const auto& r : pos.sift_results) {
      REQUIRE(r.has_value());
      CHECK(*r == *pos.alice_info_bit);
    }
  }
}

TEST_CASE("run_protocol is deterministic per seed") {
  const ProtocolConfig config = small_config(3, 8, 99);
  Rng r1(99), r2(99);
  const auto a = outcome_to_json(run_protocol(config, r1));
  const auto b = outcome_to_json(run_protocol(config, r2));
  CHECK(a.dump() == b.dump());
}

TEST_CASE("run_protocol restarts on insufficient SIFT overlap") {
  // At n=1 the all-SIFT count falls below 2n in a ~24% fraction of attempts,
  // so some seed in a small range restarts at least once.
  bool saw_restart = false;
  for (uint64_t seed = 0; seed < 20 && !saw_restart; ++seed) {
    Rng rng(seed);
    const auto outcome = run_protocol(small_config(3, 1, seed), rng);
    if (outcome.restarts > 0) saw_restart = true;
    CHECK(outcome.verdict == VerdictKind::Accepted);  // generous default budget
  }
  CHECK(saw_restart);
}

TEST_CASE("run_protocol works for four and five parties") {
  for (int n_parties : {4, 5}) {
    Rng rng(31);
    const auto outcome = run_protocol(small_config(n_parties, 4, 31), rng);
    REQUIRE(outcome.verdict == VerdictKind::Accepted);
    Bits expected = outcome.per_party_final_keys.front();
    for (const auto& key : outcome.per_party_final_keys) CHECK(key == expected);
  }
}

TEST_CASE("transcript serialization carries the documented fields") {
  Rng rng(7);
  const auto outcome = run_protocol(small_config(3, 2, 7), rng);
  const Json doc = outcome_to_json(outcome);

  for (const char* field : {"config", "positions", "masked_keys", "commitments", "verdict"})
    CHECK(doc.contains(field));
  CHECK(doc["config"]["N"] == 3);
  CHECK(doc["positions"].size() == 16);
  const Json& pos = doc["positions"][0];
  for (const char* field : {"index", "actions", "case", "results", "role", "check_outcome"})
    CHECK(pos.contains(field));
  for (const auto& masked : doc["masked_keys"]) {
    const std::string s = masked.get<std::string>();
    CHECK(s.size() == 2);
    CHECK(s.find_first_not_of("01") == std::string::npos);
  }
  for (const auto& commitment : doc["commitments"]) {
    const std::string s = commitment.get<std::string>();
    CHECK(s.size() == 64);
    CHECK(s.find_first_not_of("0123456789abcdef") == std::string::npos);
  }
  CHECK(doc["verdict"]["type"] == "accepted");
}

TEST_CASE("config validation") {
  ProtocolConfig c = small_config();
  c.num_parties = 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.key_length = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.digest_bits = 57;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.check_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
