#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqka/adversary.hpp"
#include "sqka/protocol.hpp"

namespace sqka {

/// 3-sigma binomial confidence interval: normal approximation for large
/// samples, exact Clopper-Pearson below 30 observations.
struct Interval {
  double low = 0.0;
  double high = 1.0;
};
Interval binomial_interval_3sigma(long successes, long total);

/// Exact per-checked-position detection probability for one position with the
/// given CTRL/SIFT pattern, computed by enumerating every measurement branch
/// of the simulated position (the module's ground-truth oracle).
double case_detection_oracle(const AttackModel& attack,
                             const std::vector<PartyAction>& actions, int num_parties);

/// Per-checked-position detection probability for a case. Three-party
/// measure-resend and (equal-fake) intercept-resend use the published closed
/// forms; everything else is delegated to the branch-enumeration oracle. A
/// tag with empty actions means the aggregate over all patterns of its kind.
double theoretical_case_detection(const AttackModel& attack, const CaseTag& tag,
                                  int num_parties);

/// Expected detections per prepared position (all-SIFT positions counted at
/// their checked fraction 1/2), the published weighted aggregate.
double per_position_theory(const AttackModel& attack, int num_parties);

/// Run-level detection probability printed by the reference analysis
/// (1-(7/8)^{7n} and 1-(1/2)^{7n} for the three-party attacks); NaN when no
/// published formula applies.
double published_run_abort_formula(const AttackModel& attack, int num_parties, int key_length);

struct CaseRate {
  long checked = 0;
  long failures = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double theory = 0.0;
};

struct DetectionStats {
  ProtocolConfig config;
  std::string attack;
  uint64_t seed = 0;
  long trials = 0;

  long total_attempts = 0;      // protocol attempts started (restarts included)
  long completed_attempts = 0;  // attempts that reached the step-4 checks

  std::map<std::string, CaseRate> per_case;

  long total_positions = 0;  // positions of check-completing attempts
  long position_failures = 0;
  /// raw detections / prepared positions; inflated above the idealized value
  /// by the restart rule, which conditions runs on an all-SIFT count >= 2n
  double per_position_rate = 0.0;
  double per_position_ci_low = 0.0;
  double per_position_ci_high = 1.0;
  double per_position_theory = 0.0;

  /// unbiased estimate of the idealized per-position rate: per-case rates
  /// mixed with the case probabilities (all-SIFT counted at its checked
  /// fraction 1/2), the weighting used by the published aggregates
  double weighted_aggregate_rate = 0.0;
  double weighted_aggregate_ci_low = 0.0;
  double weighted_aggregate_ci_high = 1.0;

  long completed_runs = 0;  // runs with at least one check-completing attempt
  long aborted_runs = 0;
  double run_abort_rate = 0.0;
  double run_abort_ci_low = 0.0;
  double run_abort_ci_high = 1.0;
  /// mean over completing attempts of 1 - prod_c (1-p_c)^{checked_c}, with
  /// p_c the per-case theory rates and checked_c the realized counts
  double oracle_run_abort = std::nan("");
  double published_run_abort = std::nan("");

  std::map<std::string, long> verdicts;
};

/// `trials` independent protocol executions on substreams derived from
/// (seed, trial index); per-case failures, per-position rate and run-level
/// abort rate with 3-sigma intervals. threads = 0 picks the hardware count;
/// results are identical for any thread count.
DetectionStats monte_carlo(const ProtocolConfig& config, const AttackModel& attack,
                           long trials, uint64_t seed, int threads = 0);

struct EfficiencyReport {
  int num_parties = 0;  // N
  long key_length = 0;  // n
  long digest_bits = 0; // m
  double f = 0.0;       // final key bits
  double q = 0.0;       // consumed qubits
  double c = 0.0;       // classical bits
  double eta = 0.0;     // f / (q + c)
};

/// f = n, q = 2^(N-1) n (3N-1), c = mN + nN, eta = f / (q + c).
EfficiencyReport qubit_efficiency(int num_parties, long key_length, long digest_bits);

struct BranchProbe {
  std::string branch;  // party operations and measurement results
  double prob = 0.0;
  bool detected = false;
  DensityMatrix probe;
};

struct IndependenceReport {
  std::vector<BranchProbe> conditional_probes;
  double max_pairwise_trace_distance = 0.0;
  /// exact detection probability from exhaustive branch enumeration
  double empirical_detection = 0.0;
  /// Monte Carlo cross-estimate over `samples` sampled positions (NaN if 0)
  double sampled_detection = std::nan("");
};

/// Enumerates every protocol branch of one attacked position (all CTRL/SIFT
/// patterns, all measurement outcomes of nonzero amplitude), conditions Eve's
/// probe on each branch and reports the worst pairwise trace distance
/// together with the attack's exact detection probability.
IndependenceReport probe_independence(const EntangleMeasureParams& params,
                                      const ProtocolConfig& config, long samples = 0,
                                      uint64_t seed = 0);

/// Random attack satisfying the undetectability constraints: the forward
/// coupling never flips a transit qubit, and both collapsed probe states are
/// returned to one common final state by the backward coupling.
EntangleMeasureParams random_satisfying_attack(int probe_dim, Rng& rng);

/// Random attack whose forward coupling records which-path information
/// (collapsed probe states far from parallel), backward coupling identity.
EntangleMeasureParams random_violating_attack(int probe_dim, Rng& rng);

/// Max deviation between the simulated three-party forward-leg state and the
/// product structure of its probe coefficients (coefficient of |xyz> equals
/// the tensor product of the matching coupling blocks, scaled by 1/sqrt2).
double forward_structure_deviation(const EntangleMeasureParams& params);

}  // namespace sqka
