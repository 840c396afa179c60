#include "sqka/json_io.hpp"

#include <cmath>
#include <sstream>

namespace sqka {

namespace {

std::string role_name(PositionRole role) {
  switch (role) {
    case PositionRole::Unassigned: return "unassigned";
    case PositionRole::SecurityOnly: return "security_only";
    case PositionRole::Check: return "check";
    case PositionRole::Info: return "info";
    case PositionRole::Discarded: return "discarded";
  }
  return "?";
}

std::string outcome_name(CheckOutcome o) {
  switch (o) {
    case CheckOutcome::NotChecked: return "not_checked";
    case CheckOutcome::Pass: return "pass";
    case CheckOutcome::Fail: return "fail";
  }
  return "?";
}

Json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

Unitary unitary_from_json(const Json& j, int probe_dim, const char* field) {
  if (j.is_string()) return probe_builtin(j.get<std::string>(), probe_dim);
  if (!j.is_array())
    throw std::invalid_argument(std::string(field) +
                                ": expected a built-in name or a [re, im] matrix");
  const int dim = 2 * probe_dim;
  if (j.size() != static_cast<size_t>(dim) * dim)
    throw std::invalid_argument(std::string(field) + ": need (2*probe_dim)^2 entries");
  std::vector<Complex> entries;
  entries.reserve(j.size());
  for (const Json& cell : j) {
    if (!cell.is_array() || cell.size() != 2)
      throw std::invalid_argument(std::string(field) + ": entries are [re, im] pairs");
    entries.emplace_back(cell[0].get<double>(), cell[1].get<double>());
  }
  return Unitary(dim, std::move(entries));
}

Json unitary_to_json(const Unitary& u) {
  Json out = Json::array();
  for (const Complex& e : u.entries) out.push_back({e.real(), e.imag()});
  return out;
}

}  // namespace

Json config_to_json(const ProtocolConfig& config) {
  return Json{{"N", config.num_parties},
              {"n", config.key_length},
              {"m", config.digest_bits},
              {"check_threshold", config.check_threshold},
              {"seed", config.seed},
              {"max_restarts", config.max_restarts},
              {"max_qubits", config.max_qubits},
              {"max_positions", config.max_positions}};
}

ProtocolConfig config_from_json(const Json& j) {
  ProtocolConfig config;
  config.num_parties = j.value("N", config.num_parties);
  config.key_length = j.value("n", config.key_length);
  config.digest_bits = j.value("m", config.digest_bits);
  config.check_threshold = j.value("check_threshold", config.check_threshold);
  config.seed = j.value("seed", config.seed);
  config.max_restarts = j.value("max_restarts", config.max_restarts);
  config.max_qubits = j.value("max_qubits", config.max_qubits);
  config.max_positions = j.value("max_positions", config.max_positions);
  config.validate();
  return config;
}

Json attack_to_json(const AttackModel& attack) {
  Json out{{"variant", attack_name(attack.kind)}};
  switch (attack.kind) {
    case AttackKind::None:
    case AttackKind::MeasureResend:
      break;
    case AttackKind::InterceptResend:
      out["fake_bits"] = bits_to_string(attack.fake_bits);
      out["measure_kept"] = attack.measure_kept;
      break;
    case AttackKind::EntangleMeasure: {
      out["probe_dim"] = attack.probe.probe_dim;
      Json probe = Json::array();
      for (const Complex& a : attack.probe.initial_probe)
        probe.push_back({a.real(), a.imag()});
      out["initial_probe"] = probe;
      out["U_E"] = unitary_to_json(attack.probe.forward);
      out["U_F"] = unitary_to_json(attack.probe.backward);
      break;
    }
    case AttackKind::DishonestParticipant: {
      Json cheaters = Json::array();
      for (int c : attack.cheaters) cheaters.push_back(c + 1);
      out["cheaters"] = cheaters;
      out["target_key"] = bits_to_string(attack.target_key);
      break;
    }
  }
  return out;
}

AttackModel attack_from_json(const Json& j, const ProtocolConfig& config, Rng& rng) {
  const std::string variant = j.value("variant", "none");
  if (variant == "none") return AttackModel::none();
  if (variant == "measure-resend") return AttackModel::measure_resend();

  if (variant == "intercept-resend") {
    Bits fakes(static_cast<size_t>(config.classical_parties()), 0);
    if (j.contains("fake_bits")) fakes = bits_from_string(j["fake_bits"].get<std::string>());
    AttackModel m = AttackModel::intercept_resend(std::move(fakes),
                                                  j.value("measure_kept", true));
    m.validate(config);
    return m;
  }

  if (variant == "entangle-measure") {
    EntangleMeasureParams params;
    params.probe_dim = j.value("probe_dim", 2);
    if (j.contains("initial_probe")) {
      params.initial_probe.clear();
      for (const Json& cell : j["initial_probe"])
        params.initial_probe.emplace_back(cell[0].get<double>(), cell[1].get<double>());
    } else {
      params.initial_probe.assign(static_cast<size_t>(params.probe_dim), Complex{0.0, 0.0});
      params.initial_probe[0] = 1.0;
    }
    params.forward = j.contains("U_E")
                         ? unitary_from_json(j["U_E"], params.probe_dim, "U_E")
                         : Unitary::identity(2 * params.probe_dim);
    params.backward = j.contains("U_F")
                          ? unitary_from_json(j["U_F"], params.probe_dim, "U_F")
                          : Unitary::identity(2 * params.probe_dim);
    AttackModel m = AttackModel::entangle_measure(std::move(params));
    m.validate(config);
    return m;
  }

  if (variant == "dishonest-participant") {
    std::vector<int> cheaters{1};
    if (j.contains("cheaters")) {
      cheaters.clear();
      for (const Json& c : j["cheaters"]) cheaters.push_back(c.get<int>());
    } else if (j.contains("cheater")) {
      cheaters = {j["cheater"].get<int>()};
    }
    for (int& c : cheaters) --c;  // wire format is 1-based
    Bits target = j.contains("target_key")
                      ? bits_from_string(j["target_key"].get<std::string>())
                      : random_bits(static_cast<size_t>(config.key_length), rng);
    AttackModel m = AttackModel::colluding_participants(std::move(cheaters), std::move(target));
    m.validate(config);
    return m;
  }

  throw std::invalid_argument("unknown attack variant '" + variant + "'");
}

Json outcome_to_json(const ProtocolOutcome& outcome) {
  const Transcript& tr = outcome.transcript;
  Json doc;
  doc["config"] = config_to_json(tr.config);

  Json positions = Json::array();
  for (const PositionState& pos : tr.positions) {
    Json p;
    p["index"] = pos.index;
    Json actions = Json::array();
    for (PartyAction a : pos.actions)
      actions.push_back(a == PartyAction::Sift ? "SIFT" : "CTRL");
    p["actions"] = actions;
    p["case"] = pos.case_tag.actions.empty() ? "" : pos.case_tag.key();
    Json results = Json::object();
    for (size_t t = 0; t < pos.sift_results.size(); ++t)
      if (pos.sift_results[t].has_value())
        results[std::to_string(t + 2)] = *pos.sift_results[t];
    if (pos.alice_info_bit.has_value()) results["1"] = *pos.alice_info_bit;
    p["results"] = results;
    p["role"] = role_name(pos.role);
    p["check_outcome"] = outcome_name(pos.check_outcome);
    positions.push_back(std::move(p));
  }
  doc["positions"] = positions;

  Json sift = Json::object();
  for (size_t t = 0; t < tr.published_sift_positions.size(); ++t)
    sift[std::to_string(t + 2)] = tr.published_sift_positions[t];
  doc["published_sift_positions"] = sift;

  Json reported = Json::object();
  for (size_t t = 0; t < tr.reported_results.size(); ++t) {
    Json entry = Json::object();
    for (const auto& [position, bit] : tr.reported_results[t])
      entry[std::to_string(position)] = bit;
    reported[std::to_string(t + 2)] = entry;
  }
  doc["reported_results"] = reported;

  Json masked = Json::array();
  for (const Bits& q : tr.masked_keys) masked.push_back(bits_to_string(q));
  doc["masked_keys"] = masked;

  Json commitments = Json::array();
  for (const Bits& c : tr.commitments) commitments.push_back(bits_to_hex(c));
  doc["commitments"] = commitments;

  Json rates = Json::object();
  for (const auto& [key, stats] : tr.case_error_rates)
    rates[key] = Json{{"checked", stats.checked},
                      {"failures", stats.failures},
                      {"rate", stats.rate()}};
  doc["case_error_rates"] = rates;
  doc["restarts"] = outcome.restarts;

  Json verdict{{"type", verdict_name(outcome.verdict)}};
  switch (outcome.verdict) {
    case VerdictKind::Accepted:
      verdict["final_key"] = bits_to_string(outcome.final_key);
      break;
    case VerdictKind::RejectedAtHash: {
      Json parties = Json::array();
      for (int p : outcome.offending_parties) parties.push_back(p + 1);
      verdict["parties"] = parties;
      break;
    }
    case VerdictKind::Restarted:
      verdict["count"] = outcome.restarts;
      break;
    case VerdictKind::AbortedAtCheck:
      break;
  }
  doc["verdict"] = verdict;

  Json per_party = Json::array();
  for (const Bits& k : outcome.per_party_final_keys) per_party.push_back(bits_to_string(k));
  doc["per_party_final_keys"] = per_party;
  return doc;
}

Json detection_stats_to_json(const DetectionStats& stats) {
  Json per_case = Json::object();
  for (const auto& [key, rate] : stats.per_case)
    per_case[key] = Json{{"checked", rate.checked}, {"failures", rate.failures},
                         {"rate", rate.rate},       {"ci_low", rate.ci_low},
                         {"ci_high", rate.ci_high}, {"theory", rate.theory}};
  return Json{
      {"config", config_to_json(stats.config)},
      {"attack", stats.attack},
      {"seed", stats.seed},
      {"trials", stats.trials},
      {"total_attempts", stats.total_attempts},
      {"completed_attempts", stats.completed_attempts},
      {"per_case", per_case},
      {"per_position",
       Json{{"positions", stats.total_positions},
            {"failures", stats.position_failures},
            {"rate", stats.per_position_rate},
            {"ci_low", stats.per_position_ci_low},
            {"ci_high", stats.per_position_ci_high},
            {"theory", stats.per_position_theory}}},
      {"weighted_aggregate",
       Json{{"rate", stats.weighted_aggregate_rate},
            {"ci_low", stats.weighted_aggregate_ci_low},
            {"ci_high", stats.weighted_aggregate_ci_high},
            {"theory", stats.per_position_theory}}},
      {"run_abort",
       Json{{"completed_runs", stats.completed_runs},
            {"aborted_runs", stats.aborted_runs},
            {"rate", stats.run_abort_rate},
            {"ci_low", stats.run_abort_ci_low},
            {"ci_high", stats.run_abort_ci_high},
            {"oracle", nan_safe(stats.oracle_run_abort)},
            {"published_formula", nan_safe(stats.published_run_abort)}}},
      {"verdicts", stats.verdicts}};
}

Json efficiency_to_json(const EfficiencyReport& report) {
  return Json{{"N", report.num_parties}, {"n", report.key_length},
              {"m", report.digest_bits}, {"f", report.f},
              {"q", report.q},           {"c", report.c},
              {"eta", report.eta}};
}

Json independence_to_json(const IndependenceReport& report, bool include_probes) {
  Json out{{"max_pairwise_trace_distance", report.max_pairwise_trace_distance},
           {"empirical_detection", report.empirical_detection},
           {"sampled_detection", nan_safe(report.sampled_detection)},
           {"branches", Json::array()}};
  for (const BranchProbe& bp : report.conditional_probes) {
    Json b{{"branch", bp.branch}, {"prob", bp.prob}, {"detected", bp.detected}};
    if (include_probes) {
      Json rows = Json::array();
      for (int r = 0; r < bp.probe.dim; ++r) {
        Json row = Json::array();
        for (int c = 0; c < bp.probe.dim; ++c)
          row.push_back({bp.probe.at(r, c).real(), bp.probe.at(r, c).imag()});
        rows.push_back(std::move(row));
      }
      b["probe"] = rows;
    }
    out["branches"].push_back(std::move(b));
  }
  return out;
}

namespace {

void csv_row(std::ostringstream& out, const std::string& parameter, double rate,
             double ci_low, double ci_high, double theory) {
  out << parameter << ',' << rate << ',' << ci_low << ',' << ci_high << ',';
  if (std::isnan(theory))
    out << "";
  else
    out << theory;
  out << '\n';
}

}  // namespace

std::string detection_stats_to_csv(const DetectionStats& stats, const std::string& prefix,
                                   bool header) {
  std::ostringstream out;
  out.precision(10);
  if (header) out << "parameter,rate,ci_low,ci_high,theory\n";
  for (const auto& [key, rate] : stats.per_case)
    csv_row(out, prefix + "case=" + key, rate.rate, rate.ci_low, rate.ci_high, rate.theory);
  csv_row(out, prefix + "metric=per_position", stats.per_position_rate,
          stats.per_position_ci_low, stats.per_position_ci_high,
          stats.per_position_theory);
  csv_row(out, prefix + "metric=weighted_aggregate", stats.weighted_aggregate_rate,
          stats.weighted_aggregate_ci_low, stats.weighted_aggregate_ci_high,
          stats.per_position_theory);
  csv_row(out, prefix + "metric=run_abort", stats.run_abort_rate, stats.run_abort_ci_low,
          stats.run_abort_ci_high, stats.oracle_run_abort);
  return out.str();
}

std::string efficiency_to_csv(const std::vector<EfficiencyReport>& reports) {
  std::ostringstream out;
  out.precision(10);
  out << "N,n,m,f,q,c,eta\n";
  for (const EfficiencyReport& r : reports)
    out << r.num_parties << ',' << r.key_length << ',' << r.digest_bits << ',' << r.f
        << ',' << r.q << ',' << r.c << ',' << r.eta << '\n';
  return out.str();
}

}  // namespace sqka
