#pragma once

#include <json.hpp>

#include "sqka/adversary.hpp"
#include "sqka/analysis.hpp"
#include "sqka/protocol.hpp"

namespace sqka {

using Json = nlohmann::json;

Json config_to_json(const ProtocolConfig& config);
/// Reads {"N","n","m","check_threshold","seed","max_restarts",...}; missing
/// fields keep their defaults.
ProtocolConfig config_from_json(const Json& j);

Json attack_to_json(const AttackModel& attack);
/// Reads {"variant": ...} plus per-variant parameters. Probe couplings accept
/// a built-in name or a row-major [re, im] matrix; a dishonest participant
/// without an explicit target key gets a random one drawn from `rng`.
AttackModel attack_from_json(const Json& j, const ProtocolConfig& config, Rng& rng);

/// The protocol run document: config, per-position records, published masked
/// keys, commitments (lowercase hex) and the verdict. Party numbers and
/// position indices are 1-based on the wire.
Json outcome_to_json(const ProtocolOutcome& outcome);

Json detection_stats_to_json(const DetectionStats& stats);
Json efficiency_to_json(const EfficiencyReport& report);
Json independence_to_json(const IndependenceReport& report, bool include_probes = true);

/// One CSV row per reported metric: parameter,rate,ci_low,ci_high,theory.
std::string detection_stats_to_csv(const DetectionStats& stats, const std::string& prefix,
                                   bool header);
std::string efficiency_to_csv(const std::vector<EfficiencyReport>& reports);

}  // namespace sqka
