#include "sqka/analysis.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sqka {

namespace {

// two-sided tail mass outside +/- 3 sigma of a normal
constexpr double kAlpha3Sigma = 0.0026997960632601866;
constexpr double kBranchEps = 1e-15;

}  // namespace

Interval binomial_interval_3sigma(long successes, long total) {
  Interval out;
  if (total <= 0) return out;
  if (successes < 0 || successes > total)
    throw std::invalid_argument("binomial_interval_3sigma: successes out of range");
  const double p = double(successes) / double(total);
  // exact bounds for small samples and at the boundaries, where the normal
  // approximation degenerates
  if (total < 30 || successes == 0 || successes == total) {
    using boost::math::binomial_distribution;
    out.low = binomial_distribution<>::find_lower_bound_on_p(
        double(total), double(successes), kAlpha3Sigma / 2);
    out.high = binomial_distribution<>::find_upper_bound_on_p(
        double(total), double(successes), kAlpha3Sigma / 2);
    return out;
  }
  const double half = 3.0 * std::sqrt(p * (1.0 - p) / double(total));
  out.low = std::max(0.0, p - half);
  out.high = std::min(1.0, p + half);
  return out;
}

namespace {

PositionState make_single_position(int num_parties) {
  const int n_classical = num_parties - 1;
  PositionState pos;
  pos.index = 1;
  pos.joint_state = ghz_state(num_parties, Bits(static_cast<size_t>(n_classical), 0), '+');
  pos.sift_results.assign(static_cast<size_t>(n_classical), std::nullopt);
  pos.qubits.alice = 0;
  pos.qubits.transit.resize(static_cast<size_t>(n_classical));
  for (int t = 0; t < n_classical; ++t) pos.qubits.transit[static_cast<size_t>(t)] = 1 + t;
  pos.qubits.probes.assign(static_cast<size_t>(n_classical), {});
  return pos;
}

struct PosBranch {
  double prob = 1.0;
  PositionState pos;
  std::string sift_key;   // one char per classical party: '0' / '1' / '-'
  std::string check_key;  // measurement record of Alice's check
  bool failed = false;
};

// Split every branch on a Z measurement; `target_of` names the qubit within
// each branch and `record` stores the observed bit.
template <typename TargetFn, typename Record>
void split_on_z(std::vector<PosBranch>& branches, TargetFn target_of, Record record) {
  std::vector<PosBranch> next;
  next.reserve(branches.size() * 2);
  for (PosBranch& b : branches) {
    const int target = target_of(b);
    for (int bit = 0; bit < 2; ++bit) {
      Branch proj = project_z(b.pos.joint_state, target, bit);
      if (proj.prob * b.prob < kBranchEps) continue;
      PosBranch child = b;
      child.prob *= proj.prob;
      child.pos.joint_state = std::move(proj.state);
      record(child, bit);
      next.push_back(std::move(child));
    }
  }
  branches = std::move(next);
}

// Every measurement branch of one attacked position under the given
// CTRL/SIFT pattern, checks included. Exact probabilities via projections.
std::vector<PosBranch> enumerate_position(const AttackModel& attack,
                                          const std::vector<PartyAction>& actions,
                                          int num_parties) {
  const int n_classical = num_parties - 1;
  if (actions.size() != static_cast<size_t>(n_classical))
    throw std::invalid_argument("enumerate_position: one action per classical party");

  PosBranch root;
  root.pos = make_single_position(num_parties);
  root.pos.actions = actions;
  root.pos.case_tag = classify_case(actions);
  root.sift_key.assign(static_cast<size_t>(n_classical), '-');

  std::vector<PosBranch> branches{std::move(root)};
  Rng unused(0);  // the deterministic hooks never draw from it
  EveRecord record;
  record.forward_bits.assign(static_cast<size_t>(n_classical), std::nullopt);

  // forward leg
  for (int t = 0; t < n_classical; ++t) {
    switch (attack.kind) {
      case AttackKind::None:
      case AttackKind::DishonestParticipant:
        break;
      case AttackKind::MeasureResend:
        split_on_z(
            branches,
            [t](const PosBranch& b) { return b.pos.qubits.transit[static_cast<size_t>(t)]; },
            [](PosBranch&, int) {});
        break;
      case AttackKind::InterceptResend:
      case AttackKind::EntangleMeasure:
        for (PosBranch& b : branches) attack_forward(attack, b.pos, t, record, unused);
        break;
    }
  }

  // party operations
  for (int t = 0; t < n_classical; ++t) {
    if (actions[static_cast<size_t>(t)] != PartyAction::Sift) continue;
    split_on_z(
        branches,
        [t](const PosBranch& b) { return b.pos.qubits.transit[static_cast<size_t>(t)]; },
        [t](PosBranch& b, int bit) {
          b.pos.sift_results[static_cast<size_t>(t)] = bit;
          b.sift_key[static_cast<size_t>(t)] = static_cast<char>('0' + bit);
        });
  }

  // return leg
  if (attack.kind == AttackKind::EntangleMeasure)
    for (int t = 0; t < n_classical; ++t)
      for (PosBranch& b : branches) attack_backward(attack, b.pos, t, unused);

  // Alice's check
  const CaseKind kind = classify_case(actions).kind;
  if (kind == CaseKind::AllCtrl) {
    std::vector<PosBranch> next;
    const auto labels = ghz_labels(num_parties);
    for (PosBranch& b : branches) {
      std::vector<int> targets{b.pos.qubits.alice};
      for (int q : b.pos.qubits.transit) targets.push_back(q);
      for (const GhzLabel& label : labels) {
        Branch proj = project_ghz(b.pos.joint_state, targets, label);
        if (proj.prob * b.prob < kBranchEps) continue;
        PosBranch child = b;
        child.prob *= proj.prob;
        child.pos.joint_state = std::move(proj.state);
        child.check_key = label.to_string();
        child.failed = !(label.sign == '+' &&
                         std::all_of(label.bits.begin(), label.bits.end(),
                                     [](uint8_t v) { return v == 0; }));
        child.pos.check_outcome = child.failed ? CheckOutcome::Fail : CheckOutcome::Pass;
        next.push_back(std::move(child));
      }
    }
    branches = std::move(next);
    return branches;
  }

  // Mixed / AllSift: Z measurements on Alice's particle and on the returned
  // particle of every party that must be checked; Alice's own particle first.
  split_on_z(
      branches, [](const PosBranch& b) { return b.pos.qubits.alice; },
      [](PosBranch& b, int bit) { b.check_key.push_back(static_cast<char>('0' + bit)); });
  for (int t = 0; t < n_classical; ++t) {
    const bool measure_returned =
        kind == CaseKind::AllSift || actions[static_cast<size_t>(t)] == PartyAction::Ctrl;
    if (!measure_returned) continue;
    split_on_z(
        branches,
        [t](const PosBranch& b) { return b.pos.qubits.transit[static_cast<size_t>(t)]; },
        [](PosBranch& b, int bit) {
          b.check_key.push_back(static_cast<char>('0' + bit));
        });
  }
  for (PosBranch& b : branches) {
    std::vector<int> observed;
    for (char c : b.check_key) observed.push_back(c - '0');
    for (int t = 0; t < n_classical; ++t)
      if (actions[static_cast<size_t>(t)] == PartyAction::Sift)
        observed.push_back(*b.pos.sift_results[static_cast<size_t>(t)]);
    b.failed = !std::all_of(observed.begin(), observed.end(),
                            [&](int v) { return v == observed.front(); });
    b.pos.check_outcome = b.failed ? CheckOutcome::Fail : CheckOutcome::Pass;
  }
  return branches;
}

std::vector<std::vector<PartyAction>> all_patterns(int n_classical) {
  std::vector<std::vector<PartyAction>> out;
  for (uint32_t mask = 0; mask < (uint32_t{1} << n_classical); ++mask) {
    std::vector<PartyAction> actions(static_cast<size_t>(n_classical));
    for (int t = 0; t < n_classical; ++t)
      actions[static_cast<size_t>(t)] =
          (mask >> t) & 1 ? PartyAction::Sift : PartyAction::Ctrl;
    out.push_back(std::move(actions));
  }
  return out;
}

}  // namespace

double case_detection_oracle(const AttackModel& attack,
                             const std::vector<PartyAction>& actions, int num_parties) {
  double detection = 0.0;
  for (const PosBranch& b : enumerate_position(attack, actions, num_parties))
    if (b.failed) detection += b.prob;
  return detection;
}

double theoretical_case_detection(const AttackModel& attack, const CaseTag& tag,
                                  int num_parties) {
  if (!attack.touches_channel()) return 0.0;
  const int n_classical = num_parties - 1;

  if (num_parties == 3 && !tag.actions.empty()) {
    if (attack.kind == AttackKind::MeasureResend)
      return tag.kind == CaseKind::AllCtrl ? 0.5 : 0.0;
    if (attack.kind == AttackKind::InterceptResend && all_bits_equal(attack.fake_bits)) {
      switch (tag.kind) {
        case CaseKind::AllCtrl: return 0.75;
        case CaseKind::Mixed: return 0.5;
        case CaseKind::AllSift: return 0.5;
      }
    }
  }

  if (!tag.actions.empty()) return case_detection_oracle(attack, tag.actions, num_parties);

  // aggregate over all patterns of this kind
  double sum = 0.0;
  long count = 0;
  for (const auto& actions : all_patterns(n_classical)) {
    if (classify_case(actions).kind != tag.kind) continue;
    CaseTag exact;
    exact.kind = tag.kind;
    exact.actions = actions;
    sum += theoretical_case_detection(attack, exact, num_parties);
    ++count;
  }
  return count == 0 ? 0.0 : sum / double(count);
}

double per_position_theory(const AttackModel& attack, int num_parties) {
  if (!attack.touches_channel()) return 0.0;
  const int n_classical = num_parties - 1;
  const double pattern_prob = 1.0 / double(uint64_t{1} << n_classical);
  double total = 0.0;
  for (const auto& actions : all_patterns(n_classical)) {
    const CaseTag tag = classify_case(actions);
    const double checked_fraction = tag.kind == CaseKind::AllSift ? 0.5 : 1.0;
    total += pattern_prob * checked_fraction *
             theoretical_case_detection(attack, tag, num_parties);
  }
  return total;
}

double published_run_abort_formula(const AttackModel& attack, int num_parties, int key_length) {
  if (num_parties != 3) return std::nan("");
  if (attack.kind == AttackKind::MeasureResend)
    return 1.0 - std::pow(7.0 / 8.0, 7.0 * key_length);
  if (attack.kind == AttackKind::InterceptResend)
    return 1.0 - std::pow(0.5, 7.0 * key_length);
  return std::nan("");
}

namespace {

CaseTag case_tag_for_key(const std::string& key, int n_classical) {
  CaseTag tag;
  if (n_classical == 2) {
    if (key == "a") {
      tag.kind = CaseKind::AllCtrl;
      tag.actions = {PartyAction::Ctrl, PartyAction::Ctrl};
    } else if (key == "b") {
      tag.kind = CaseKind::Mixed;
      tag.actions = {PartyAction::Ctrl, PartyAction::Sift};
    } else if (key == "c") {
      tag.kind = CaseKind::Mixed;
      tag.actions = {PartyAction::Sift, PartyAction::Ctrl};
    } else if (key == "d") {
      tag.kind = CaseKind::AllSift;
      tag.actions = {PartyAction::Sift, PartyAction::Sift};
    } else {
      throw std::invalid_argument("unknown case key: " + key);
    }
    return tag;
  }
  if (key == "all_ctrl") tag.kind = CaseKind::AllCtrl;
  else if (key == "mixed") tag.kind = CaseKind::Mixed;
  else if (key == "all_sift") tag.kind = CaseKind::AllSift;
  else throw std::invalid_argument("unknown case key: " + key);
  return tag;  // aggregate (no specific actions)
}

}  // namespace

DetectionStats monte_carlo(const ProtocolConfig& config, const AttackModel& attack,
                           long trials, uint64_t seed, int threads) {
  config.validate();
  attack.validate(config);
  if (trials < 1) throw std::invalid_argument("monte_carlo: need at least one trial");

  struct TrialResult {
    std::vector<AttemptStats> attempts;
    VerdictKind verdict = VerdictKind::Restarted;
  };
  std::vector<TrialResult> results(static_cast<size_t>(trials));

  long worker_count = threads > 0 ? threads
                                  : static_cast<long>(std::thread::hardware_concurrency());
  worker_count = std::max(1L, std::min(worker_count, trials));

  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  std::atomic<long> cursor{0};
  std::mutex error_mutex;
  for (int w = 0; w < worker_count; ++w) {
    workers.emplace_back([&]() {
      for (;;) {
        const long trial = cursor.fetch_add(1);
        if (trial >= trials) return;
        try {
          Rng rng = Rng::substream(seed, static_cast<uint64_t>(trial));
          ProtocolOutcome out = run_protocol(config, attack, rng);
          results[static_cast<size_t>(trial)] =
              TrialResult{std::move(out.attempt_stats), out.verdict};
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (first_error) std::rethrow_exception(first_error);

  DetectionStats stats;
  stats.config = config;
  stats.attack = attack_name(attack.kind);
  stats.seed = seed;
  stats.trials = trials;
  stats.per_position_theory = per_position_theory(attack, config.num_parties);
  stats.published_run_abort = published_run_abort_formula(attack, config.num_parties,
                                                  config.key_length);

  // per-case theory rates, reused by the run-abort oracle
  std::map<std::string, double> theory;
  for (const auto& actions : all_patterns(config.classical_parties())) {
    const CaseTag tag = classify_case(actions);
    if (!theory.count(tag.key()))
      theory[tag.key()] = theoretical_case_detection(attack, tag, config.num_parties);
  }

  double oracle_abort_sum = 0.0;
  for (const TrialResult& trial : results) {
    ++stats.verdicts[verdict_name(trial.verdict)];
    bool any_completed = false;
    for (const AttemptStats& attempt : trial.attempts) {
      ++stats.total_attempts;
      if (!attempt.completed_checks) continue;
      ++stats.completed_attempts;
      any_completed = true;
      stats.total_positions += attempt.positions;
      double pass_prob = 1.0;
      for (const auto& [key, cs] : attempt.case_stats) {
        CaseRate& rate = stats.per_case[key];
        rate.checked += cs.checked;
        rate.failures += cs.failures;
        stats.position_failures += cs.failures;
        pass_prob *= std::pow(1.0 - theory[key], double(cs.checked));
      }
      oracle_abort_sum += 1.0 - pass_prob;
    }
    if (any_completed) {
      ++stats.completed_runs;
      if (trial.verdict == VerdictKind::AbortedAtCheck) ++stats.aborted_runs;
    }
  }

  for (auto& [key, rate] : stats.per_case) {
    rate.rate = rate.checked == 0 ? 0.0 : double(rate.failures) / double(rate.checked);
    const Interval ci = binomial_interval_3sigma(rate.failures, rate.checked);
    rate.ci_low = ci.low;
    rate.ci_high = ci.high;
    rate.theory = theory.count(key)
                      ? theory[key]
                      : theoretical_case_detection(
                            attack, case_tag_for_key(key, config.classical_parties()),
                            config.num_parties);
  }

  stats.per_position_rate =
      stats.total_positions == 0
          ? 0.0
          : double(stats.position_failures) / double(stats.total_positions);
  const Interval pos_ci =
      binomial_interval_3sigma(stats.position_failures, stats.total_positions);
  stats.per_position_ci_low = pos_ci.low;
  stats.per_position_ci_high = pos_ci.high;

  // mixture of the per-case rates under the published weighting
  std::map<std::string, double> weight;
  const double pattern_prob = 1.0 / double(uint64_t{1} << config.classical_parties());
  for (const auto& actions : all_patterns(config.classical_parties())) {
    const CaseTag tag = classify_case(actions);
    weight[tag.key()] += pattern_prob * (tag.kind == CaseKind::AllSift ? 0.5 : 1.0);
  }
  double aggregate = 0.0, variance = 0.0;
  for (const auto& [key, w] : weight) {
    const auto it = stats.per_case.find(key);
    const double rate = it == stats.per_case.end() ? 0.0 : it->second.rate;
    const double sigma = it == stats.per_case.end()
                             ? 1.0 / 6.0
                             : (it->second.ci_high - it->second.ci_low) / 6.0;
    aggregate += w * rate;
    variance += w * w * sigma * sigma;
  }
  stats.weighted_aggregate_rate = aggregate;
  stats.weighted_aggregate_ci_low = std::max(0.0, aggregate - 3.0 * std::sqrt(variance));
  stats.weighted_aggregate_ci_high = std::min(1.0, aggregate + 3.0 * std::sqrt(variance));

  stats.run_abort_rate = stats.completed_runs == 0
                             ? 0.0
                             : double(stats.aborted_runs) / double(stats.completed_runs);
  const Interval run_ci = binomial_interval_3sigma(stats.aborted_runs, stats.completed_runs);
  stats.run_abort_ci_low = run_ci.low;
  stats.run_abort_ci_high = run_ci.high;
  if (stats.completed_attempts > 0)
    stats.oracle_run_abort = oracle_abort_sum / double(stats.completed_attempts);

  return stats;
}

EfficiencyReport qubit_efficiency(int num_parties, long key_length, long digest_bits) {
  if (num_parties < 3) throw std::invalid_argument("qubit_efficiency: N must be >= 3");
  if (key_length < 1) throw std::invalid_argument("qubit_efficiency: n must be >= 1");
  if (digest_bits < 0) throw std::invalid_argument("qubit_efficiency: m must be >= 0");

  EfficiencyReport report;
  report.num_parties = num_parties;
  report.key_length = key_length;
  report.digest_bits = digest_bits;
  report.f = double(key_length);
  report.q = std::pow(2.0, num_parties - 1) * double(key_length) * double(3 * num_parties - 1);
  report.c = double(digest_bits) * num_parties + double(key_length) * num_parties;
  report.eta = report.f / (report.q + report.c);
  return report;
}

IndependenceReport probe_independence(const EntangleMeasureParams& params,
                                      const ProtocolConfig& config, long samples,
                                      uint64_t seed) {
  params.validate();
  const int num_parties = config.num_parties;
  const int n_classical = num_parties - 1;
  const AttackModel attack = AttackModel::entangle_measure(params);
  attack.validate(config);

  IndependenceReport report;
  const double pattern_prob = 1.0 / double(uint64_t{1} << n_classical);

  for (const auto& actions : all_patterns(n_classical)) {
    std::string ops;
    for (PartyAction a : actions) ops.push_back(a == PartyAction::Sift ? 'S' : 'C');
    for (const PosBranch& b : enumerate_position(attack, actions, num_parties)) {
      const double prob = pattern_prob * b.prob;
      if (prob < kBranchEps) continue;
      if (b.failed) report.empirical_detection += prob;

      std::vector<int> probe_qubits;
      for (const auto& leg : b.pos.qubits.probes)
        probe_qubits.insert(probe_qubits.end(), leg.begin(), leg.end());
      BranchProbe bp;
      bp.branch = "ops=" + ops + ";m=" + b.sift_key + ";chk=" + b.check_key;
      bp.prob = prob;
      bp.detected = b.failed;
      bp.probe = reduced_density(b.pos.joint_state, probe_qubits);
      report.conditional_probes.push_back(std::move(bp));
    }
  }

  for (size_t i = 0; i < report.conditional_probes.size(); ++i)
    for (size_t j = i + 1; j < report.conditional_probes.size(); ++j)
      report.max_pairwise_trace_distance =
          std::max(report.max_pairwise_trace_distance,
                   trace_distance(report.conditional_probes[i].probe,
                                  report.conditional_probes[j].probe));

  if (samples > 0) {
    long detected = 0;
    for (long s = 0; s < samples; ++s) {
      Rng rng = Rng::substream(seed, static_cast<uint64_t>(s));
      PositionState pos = make_single_position(num_parties);
      std::vector<PartyAction> actions(static_cast<size_t>(n_classical));
      for (auto& a : actions) a = rng.bit() ? PartyAction::Sift : PartyAction::Ctrl;
      pos.actions = actions;
      EveRecord record;
      record.forward_bits.assign(static_cast<size_t>(n_classical), std::nullopt);
      for (int t = 0; t < n_classical; ++t) attack_forward(attack, pos, t, record, rng);
      for (int t = 0; t < n_classical; ++t)
        classical_party_action(pos, t, actions[static_cast<size_t>(t)], rng);
      for (int t = 0; t < n_classical; ++t) attack_backward(attack, pos, t, rng);
      pos.case_tag = classify_case(actions);
      detected += alice_check_action(pos, pos.sift_results, rng) == CheckOutcome::Fail;
    }
    report.sampled_detection = double(detected) / double(samples);
  }
  return report;
}

namespace {

std::vector<Complex> random_unit_vector(int dim, Rng& rng) {
  std::vector<Complex> v(static_cast<size_t>(dim));
  double n2 = 0.0;
  for (auto& a : v) {
    a = Complex{rng.normal(), rng.normal()};
    n2 += std::norm(a);
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : v) a *= scale;
  return v;
}

// |b> (x) probe as a 2d-dimensional column
std::vector<Complex> qubit_block(int b, const std::vector<Complex>& probe) {
  std::vector<Complex> out(2 * probe.size(), Complex{0.0, 0.0});
  std::copy(probe.begin(), probe.end(),
            out.begin() + static_cast<long>(b * probe.size()));
  return out;
}

}  // namespace

EntangleMeasureParams random_satisfying_attack(int probe_dim, Rng& rng) {
  if (probe_dim < 1) throw std::invalid_argument("probe_dim must be >= 1");
  const auto xi = random_unit_vector(probe_dim, rng);
  const auto xi00 = random_unit_vector(probe_dim, rng);
  const auto xi11 = random_unit_vector(probe_dim, rng);
  const auto final_probe = random_unit_vector(probe_dim, rng);

  EntangleMeasureParams params;
  params.probe_dim = probe_dim;
  params.initial_probe = xi;
  params.forward = unitary_mapping(2 * probe_dim,
                                   {qubit_block(0, xi), qubit_block(1, xi)},
                                   {qubit_block(0, xi00), qubit_block(1, xi11)}, rng);
  params.backward = unitary_mapping(
      2 * probe_dim, {qubit_block(0, xi00), qubit_block(1, xi11)},
      {qubit_block(0, final_probe), qubit_block(1, final_probe)}, rng);
  return params;
}

EntangleMeasureParams random_violating_attack(int probe_dim, Rng& rng) {
  if (probe_dim < 2)
    throw std::invalid_argument("a which-path recording probe needs probe_dim >= 2");
  const auto xi = random_unit_vector(probe_dim, rng);
  const auto xi00 = random_unit_vector(probe_dim, rng);

  // xi11 at angle theta in [pi/4, pi/2] from xi00: overlap at most 1/sqrt2
  std::vector<Complex> perp;
  for (int attempt = 0;; ++attempt) {
    perp = random_unit_vector(probe_dim, rng);
    Complex overlap = 0.0;
    for (int i = 0; i < probe_dim; ++i)
      overlap += std::conj(xi00[static_cast<size_t>(i)]) * perp[static_cast<size_t>(i)];
    double n2 = 0.0;
    for (int i = 0; i < probe_dim; ++i) {
      perp[static_cast<size_t>(i)] -= overlap * xi00[static_cast<size_t>(i)];
      n2 += std::norm(perp[static_cast<size_t>(i)]);
    }
    if (n2 > 1e-12) {
      const double scale = 1.0 / std::sqrt(n2);
      for (auto& a : perp) a *= scale;
      break;
    }
    if (attempt > 32)
      throw std::runtime_error("failed to draw a vector independent of xi00");
  }
  const double theta = M_PI / 4 + rng.uniform() * M_PI / 4;
  std::vector<Complex> xi11(static_cast<size_t>(probe_dim));
  for (int i = 0; i < probe_dim; ++i)
    xi11[static_cast<size_t>(i)] = std::cos(theta) * xi00[static_cast<size_t>(i)] +
                                   std::sin(theta) * perp[static_cast<size_t>(i)];

  EntangleMeasureParams params;
  params.probe_dim = probe_dim;
  params.initial_probe = xi;
  params.forward = unitary_mapping(2 * probe_dim,
                                   {qubit_block(0, xi), qubit_block(1, xi)},
                                   {qubit_block(0, xi00), qubit_block(1, xi11)}, rng);
  params.backward = Unitary::identity(2 * probe_dim);
  return params;
}

double forward_structure_deviation(const EntangleMeasureParams& params) {
  params.validate();
  const int num_parties = 3;
  const int d = params.probe_dim;
  const int q = probe_qubit_count(d);
  const int padded = 1 << q;

  const AttackModel attack = AttackModel::entangle_measure(params);
  PositionState pos = make_single_position(num_parties);
  Rng unused(0);
  EveRecord record;
  record.forward_bits.assign(2, std::nullopt);
  for (int t = 0; t < 2; ++t) attack_forward(attack, pos, t, record, unused);

  // image of |x> (x) |xi> under the coupling, split into qubit blocks
  auto image_block = [&](int x, int y) {
    std::vector<Complex> block(static_cast<size_t>(d), Complex{0.0, 0.0});
    for (int p = 0; p < d; ++p)
      for (int pp = 0; pp < d; ++pp)
        block[static_cast<size_t>(p)] += params.forward.at(y * d + p, x * d + pp) *
                                         params.initial_probe[static_cast<size_t>(pp)];
    return block;
  };

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double worst = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int z = 0; z < 2; ++z) {
        const auto block_b = image_block(x, y);
        const auto block_c = image_block(x, z);
        for (int pb = 0; pb < padded; ++pb) {
          for (int pc = 0; pc < padded; ++pc) {
            const Complex expected =
                (pb < d && pc < d)
                    ? inv_sqrt2 * block_b[static_cast<size_t>(pb)] *
                          block_c[static_cast<size_t>(pc)]
                    : Complex{0.0, 0.0};
            const uint64_t index =
                (((uint64_t(x) << 1 | uint64_t(y)) << 1 | uint64_t(z)) << (2 * q)) |
                (uint64_t(pb) << q) | uint64_t(pc);
            worst = std::max(worst,
                             std::abs(pos.joint_state.amplitude(index) - expected));
          }
        }
      }
    }
  }
  return worst;
}

}  // namespace sqka
