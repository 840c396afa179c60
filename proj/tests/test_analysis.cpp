#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqka/analysis.hpp"
#include "sqka/json_io.hpp"

using namespace sqka;

namespace {

ProtocolConfig config(int n_parties, int n) {
  ProtocolConfig c;
  c.num_parties = n_parties;
  c.key_length = n;
  return c;
}

CaseTag tag3(const std::string& key) {
  using PA = PartyAction;
  CaseTag t;
  if (key == "a") t = classify_case({PA::Ctrl, PA::Ctrl});
  if (key == "b") t = classify_case({PA::Ctrl, PA::Sift});
  if (key == "c") t = classify_case({PA::Sift, PA::Ctrl});
  if (key == "d") t = classify_case({PA::Sift, PA::Sift});
  return t;
}

}  // namespace

TEST_CASE("theoretical per-case detection matches the published closed forms") {
  const AttackModel mr = AttackModel::measure_resend();
  CHECK(theoretical_case_detection(mr, tag3("a"), 3) == doctest::Approx(0.5));
  CHECK(theoretical_case_detection(mr, tag3("b"), 3) == doctest::Approx(0.0));
  CHECK(theoretical_case_detection(mr, tag3("c"), 3) == doctest::Approx(0.0));
  CHECK(theoretical_case_detection(mr, tag3("d"), 3) == doctest::Approx(0.0));

  const AttackModel ir = AttackModel::intercept_resend(bits_from_string("00"));
  CHECK(theoretical_case_detection(ir, tag3("a"), 3) == doctest::Approx(0.75));
  CHECK(theoretical_case_detection(ir, tag3("b"), 3) == doctest::Approx(0.5));
  CHECK(theoretical_case_detection(ir, tag3("c"), 3) == doctest::Approx(0.5));
  CHECK(theoretical_case_detection(ir, tag3("d"), 3) == doctest::Approx(0.5));

  const AttackModel none = AttackModel::none();
  for (const char* key : {"a", "b", "c", "d"})
    CHECK(theoretical_case_detection(none, tag3(key), 3) == doctest::Approx(0.0));
}

TEST_CASE("the branch-enumeration oracle reproduces the closed forms") {
  using PA = PartyAction;
  const AttackModel mr = AttackModel::measure_resend();
  CHECK(case_detection_oracle(mr, {PA::Ctrl, PA::Ctrl}, 3) == doctest::Approx(0.5));
  CHECK(case_detection_oracle(mr, {PA::Ctrl, PA::Sift}, 3) == doctest::Approx(0.0));
  CHECK(case_detection_oracle(mr, {PA::Sift, PA::Ctrl}, 3) == doctest::Approx(0.0));
  CHECK(case_detection_oracle(mr, {PA::Sift, PA::Sift}, 3) == doctest::Approx(0.0));

  const AttackModel ir = AttackModel::intercept_resend(bits_from_string("00"));
  CHECK(case_detection_oracle(ir, {PA::Ctrl, PA::Ctrl}, 3) == doctest::Approx(0.75));
  CHECK(case_detection_oracle(ir, {PA::Ctrl, PA::Sift}, 3) == doctest::Approx(0.5));
  CHECK(case_detection_oracle(ir, {PA::Sift, PA::Ctrl}, 3) == doctest::Approx(0.5));
  CHECK(case_detection_oracle(ir, {PA::Sift, PA::Sift}, 3) == doctest::Approx(0.5));

  // ones as fakes behave identically by symmetry
  const AttackModel ir1 = AttackModel::intercept_resend(bits_from_string("11"));
  CHECK(case_detection_oracle(ir1, {PA::Ctrl, PA::Ctrl}, 3) == doctest::Approx(0.75));
  // mismatched fakes can never satisfy the agreement checks
  const AttackModel irx = AttackModel::intercept_resend(bits_from_string("01"));
  CHECK(case_detection_oracle(irx, {PA::Ctrl, PA::Ctrl}, 3) == doctest::Approx(1.0));
  CHECK(case_detection_oracle(irx, {PA::Sift, PA::Sift}, 3) == doctest::Approx(1.0));

  // four parties: measure-resend still only disturbs the all-CTRL case
  const std::vector<PA> all_ctrl4{PA::Ctrl, PA::Ctrl, PA::Ctrl};
  CHECK(case_detection_oracle(mr, all_ctrl4, 4) == doctest::Approx(0.5));
  CHECK(case_detection_oracle(mr, {PA::Ctrl, PA::Sift, PA::Ctrl}, 4) ==
        doctest::Approx(0.0));
  const AttackModel ir4 = AttackModel::intercept_resend(bits_from_string("000"));
  CHECK(case_detection_oracle(ir4, all_ctrl4, 4) == doctest::Approx(0.75));
  CHECK(case_detection_oracle(ir4, {PA::Sift, PA::Sift, PA::Sift}, 4) ==
        doctest::Approx(0.5));
}

TEST_CASE("per-position weighted aggregates match the published sums") {
  CHECK(per_position_theory(AttackModel::measure_resend(), 3) == doctest::Approx(0.125));
  CHECK(per_position_theory(AttackModel::intercept_resend(bits_from_string("00")), 3) ==
        doctest::Approx(0.5));
  CHECK(per_position_theory(AttackModel::none(), 3) == doctest::Approx(0.0));
}

TEST_CASE("published run-abort formulas") {
  CHECK(published_run_abort_formula(AttackModel::measure_resend(), 3, 1) ==
        doctest::Approx(1.0 - std::pow(7.0 / 8.0, 7.0)));
  CHECK(published_run_abort_formula(AttackModel::intercept_resend(bits_from_string("00")), 3,
                                2) == doctest::Approx(1.0 - std::pow(0.5, 14.0)));
  CHECK(std::isnan(published_run_abort_formula(AttackModel::none(), 3, 1)));
  CHECK(std::isnan(published_run_abort_formula(AttackModel::measure_resend(), 4, 1)));
}

TEST_CASE("binomial intervals") {
  const Interval big = binomial_interval_3sigma(500, 1000);
  CHECK(big.low == doctest::Approx(0.5 - 3.0 * std::sqrt(0.25 / 1000)));
  CHECK(big.high == doctest::Approx(0.5 + 3.0 * std::sqrt(0.25 / 1000)));

  // small counts: exact bounds must still bracket the point estimate
  const Interval small = binomial_interval_3sigma(2, 10);
  CHECK(small.low > 0.0);
  CHECK(small.low < 0.2);
  CHECK(small.high > 0.2);
  CHECK(small.high < 1.0);
  const Interval zero = binomial_interval_3sigma(0, 10);
  CHECK(zero.low == doctest::Approx(0.0));
  CHECK(zero.high > 0.0);
  const Interval empty = binomial_interval_3sigma(0, 0);
  CHECK(empty.low == 0.0);
  CHECK(empty.high == 1.0);
}

TEST_CASE("monte_carlo with no attack reports exact zeros") {
  const auto stats = monte_carlo(config(3, 4), AttackModel::none(), 50, 7);
  CHECK(stats.trials == 50);
  CHECK(stats.completed_runs == 50);
  CHECK(stats.aborted_runs == 0);
  CHECK(stats.position_failures == 0);
  for (const auto& [key, rate] : stats.per_case) {
    CHECK(rate.failures == 0);
    CHECK(rate.theory == doctest::Approx(0.0));
  }
  CHECK(stats.verdicts.at("accepted") == 50);
}

TEST_CASE("monte_carlo measure-resend matches the closed forms within 3 sigma") {
  const auto stats = monte_carlo(config(3, 8), AttackModel::measure_resend(), 600, 11);

  for (const char* key : {"a", "b", "c", "d"}) {
    REQUIRE(stats.per_case.count(key));
    const CaseRate& rate = stats.per_case.at(key);
    CHECK(rate.checked > 1000);
    CHECK(rate.theory >= rate.ci_low);
    CHECK(rate.theory <= rate.ci_high);
  }
  CHECK(stats.per_position_theory == doctest::Approx(0.125));
  // the case-weighted aggregate is the unbiased estimate of the 1/8 value
  CHECK(0.125 >= stats.weighted_aggregate_ci_low);
  CHECK(0.125 <= stats.weighted_aggregate_ci_high);
  // the raw ratio runs above it: restarts condition on all-SIFT count >= 2n,
  // which inflates the all-CTRL count
  CHECK(stats.per_position_rate >= 0.125 - 0.01);

  // the oracle prediction sits inside the abort interval
  CHECK(stats.oracle_run_abort >= stats.run_abort_ci_low);
  CHECK(stats.oracle_run_abort <= stats.run_abort_ci_high);
}

TEST_CASE("monte_carlo is deterministic and thread-count independent") {
  const auto a = monte_carlo(config(3, 4), AttackModel::measure_resend(), 60, 3, 1);
  const auto b = monte_carlo(config(3, 4), AttackModel::measure_resend(), 60, 3, 4);
  CHECK(detection_stats_to_json(a).dump() == detection_stats_to_json(b).dump());
}

TEST_CASE("qubit efficiency") {
  SUBCASE("three-party closed form eta = n / (35n + 3m)") {
    for (long n : {1L, 7L, 128L}) {
      for (long m : {0L, 128L, 256L}) {
        const auto r = qubit_efficiency(3, n, m);
        CHECK(r.eta == double(n) / double(35 * n + 3 * m));
      }
    }
  }
  SUBCASE("spot values") {
    const auto r = qubit_efficiency(3, 128, 256);
    CHECK(r.q == 4096.0);
    CHECK(r.c == 1152.0);
    CHECK(r.eta == doctest::Approx(128.0 / 5248.0).epsilon(1e-15));
    CHECK(qubit_efficiency(3, 64, 0).eta == doctest::Approx(1.0 / 35.0).epsilon(1e-15));
  }
  SUBCASE("exactness across the grid") {
    for (int N : {3, 4, 5, 6}) {
      for (long n : {1L, 64L, 128L}) {
        for (long m : {0L, 128L, 256L}) {
          const auto r = qubit_efficiency(N, n, m);
          const double q = std::pow(2.0, N - 1) * double(n) * double(3 * N - 1);
          const double c = double(m) * N + double(n) * N;
          CHECK(r.eta == double(n) / (q + c));
        }
      }
    }
  }
  CHECK_THROWS_AS(qubit_efficiency(2, 1, 0), std::invalid_argument);
}

TEST_CASE("probe independence: factorizable probe") {
  EntangleMeasureParams params;
  params.probe_dim = 2;
  params.initial_probe = {1.0, 0.0};
  params.forward = Unitary::identity(4);
  params.backward = Unitary::identity(4);

  const auto report = probe_independence(params, config(3, 1));
  CHECK(report.empirical_detection == doctest::Approx(0.0));
  CHECK(report.max_pairwise_trace_distance < 1e-9);
  CHECK_FALSE(report.conditional_probes.empty());
}

TEST_CASE("probe independence: the copy attack is loud and distinguishable") {
  EntangleMeasureParams params;
  params.probe_dim = 2;
  params.initial_probe = {1.0, 0.0};
  params.forward = probe_builtin("copy", 2);
  params.backward = Unitary::identity(4);

  const auto report = probe_independence(params, config(3, 1), 4000, 5);
  // all-CTRL fails half the time; the weighted aggregate is 1/8
  CHECK(report.empirical_detection == doctest::Approx(0.125));
  CHECK(report.max_pairwise_trace_distance == doctest::Approx(1.0));
  CHECK(std::abs(report.sampled_detection - 0.125) <
        3.0 * std::sqrt(0.125 * 0.875 / 4000));
}

TEST_CASE("random satisfying attacks are exactly silent") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(4));
    const auto params = random_satisfying_attack(dim, rng);
    const auto report = probe_independence(params, config(3, 1));
    CHECK(report.empirical_detection < 1e-9);
    CHECK(report.max_pairwise_trace_distance < 1e-6);
  }
}

TEST_CASE("random violating attacks are detected") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(3));
    const auto params = random_violating_attack(dim, rng);
    const auto report = probe_independence(params, config(3, 1));
    CHECK(report.empirical_detection > 1e-6);
  }
}

TEST_CASE("forward-leg states carry the product coefficient structure") {
  Rng rng(47);
  // identity and copy couplings, then random unitaries of several probe dims
  EntangleMeasureParams params;
  params.probe_dim = 2;
  params.initial_probe = {1.0, 0.0};
  params.forward = probe_builtin("copy", 2);
  params.backward = Unitary::identity(4);
  CHECK(forward_structure_deviation(params) < 1e-12);

  for (int trial = 0; trial < 25; ++trial) {
    EntangleMeasureParams p;
    p.probe_dim = 1 + static_cast<int>(rng.below(4));
    p.initial_probe.assign(static_cast<size_t>(p.probe_dim), Complex{0.0, 0.0});
    p.initial_probe[0] = 1.0;
    p.forward = random_unitary(2 * p.probe_dim, rng);
    p.backward = Unitary::identity(2 * p.probe_dim);
    CHECK(forward_structure_deviation(p) < 1e-9);
  }
}

TEST_CASE("detection stats serialize to CSV rows") {
  const auto stats = monte_carlo(config(3, 2), AttackModel::measure_resend(), 20, 3);
  const std::string csv = detection_stats_to_csv(stats, "N=3;n=2;attack=measure-resend;", true);
  CHECK(csv.rfind("parameter,rate,ci_low,ci_high,theory\n", 0) == 0);
  CHECK(csv.find("N=3;n=2;attack=measure-resend;case=a,") != std::string::npos);
  CHECK(csv.find("metric=per_position") != std::string::npos);
  CHECK(csv.find("metric=run_abort") != std::string::npos);
}
