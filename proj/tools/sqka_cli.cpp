#include <CLI11.hpp>

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sqka/json_io.hpp"

namespace {

using sqka::Json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;    // configuration / validation problem
constexpr int kExitAborted = 2;  // protocol did not accept (run command)

struct GlobalOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<long> trials;
  std::string output = "json";
  std::vector<std::string> overrides;
  bool no_timestamp = false;
  int threads = 0;
};

std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void emit_json(Json doc, const GlobalOptions& opts) {
  if (!opts.no_timestamp) doc["generated_at"] = iso_timestamp();
  std::cout << doc.dump(2) << '\n';
}

Json load_document(const GlobalOptions& opts) {
  Json doc = Json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + opts.config_path);
    try {
      in >> doc;
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
  }
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(raw);
    } catch (const Json::parse_error&) {
      value = raw;  // plain string
    }
    Json* node = &doc;
    size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (key.empty()) throw std::invalid_argument("--set: empty key in '" + kv + "'");
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
  return doc;
}

uint64_t resolve_seed(const GlobalOptions& opts, const Json& doc) {
  if (opts.seed.has_value()) return *opts.seed;
  if (doc.contains("protocol") && doc["protocol"].contains("seed"))
    return doc["protocol"]["seed"].get<uint64_t>();
  if (const char* env = std::getenv("SQKA_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

sqka::ProtocolConfig resolve_protocol(const Json& doc, uint64_t seed) {
  sqka::ProtocolConfig config =
      sqka::config_from_json(doc.contains("protocol") ? doc["protocol"] : Json::object());
  config.seed = seed;
  return config;
}

sqka::AttackModel resolve_attack(const Json& doc, const sqka::ProtocolConfig& config,
                                 sqka::Rng& rng, const std::string& model_flag) {
  Json attack = doc.contains("attack") ? doc["attack"] : Json::object();
  if (!model_flag.empty()) attack["variant"] = model_flag;
  return sqka::attack_from_json(attack, config, rng);
}

long resolve_trials(const GlobalOptions& opts, const Json& doc, long fallback) {
  if (opts.trials.has_value()) return *opts.trials;
  if (doc.contains("trials")) return doc["trials"].get<long>();
  return fallback;
}

int cmd_run(const GlobalOptions& opts) {
  const Json doc = load_document(opts);
  const uint64_t seed = resolve_seed(opts, doc);
  const sqka::ProtocolConfig config = resolve_protocol(doc, seed);
  sqka::Rng rng(seed);
  const sqka::AttackModel attack = resolve_attack(doc, config, rng, "");

  const sqka::ProtocolOutcome outcome = sqka::run_protocol(config, attack, rng);
  Json report = sqka::outcome_to_json(outcome);
  report["attack"] = sqka::attack_to_json(attack);
  emit_json(std::move(report), opts);
  return outcome.verdict == sqka::VerdictKind::Accepted ? kExitOk : kExitAborted;
}

int cmd_attack(const GlobalOptions& opts, const std::string& model_flag) {
  const Json doc = load_document(opts);
  const uint64_t seed = resolve_seed(opts, doc);
  const sqka::ProtocolConfig config = resolve_protocol(doc, seed);
  sqka::Rng rng(seed);
  const sqka::AttackModel attack = resolve_attack(doc, config, rng, model_flag);
  const long trials = resolve_trials(opts, doc, 1000);

  const sqka::DetectionStats stats =
      sqka::monte_carlo(config, attack, trials, seed, opts.threads);
  if (opts.output == "csv") {
    std::cout << sqka::detection_stats_to_csv(
        stats,
        "N=" + std::to_string(config.num_parties) + ";n=" +
            std::to_string(config.key_length) + ";attack=" + stats.attack + ";",
        true);
    return kExitOk;
  }
  emit_json(sqka::detection_stats_to_json(stats), opts);
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& opts) {
  const Json doc = load_document(opts);
  const uint64_t seed = resolve_seed(opts, doc);
  const Json sweep = doc.contains("sweep") ? doc["sweep"] : Json::object();

  std::vector<int> party_counts{3};
  if (sweep.contains("N")) party_counts = sweep["N"].get<std::vector<int>>();
  std::vector<int> key_lengths{4};
  if (sweep.contains("n")) key_lengths = sweep["n"].get<std::vector<int>>();
  std::vector<std::string> attacks{"measure-resend"};
  if (sweep.contains("attacks")) attacks = sweep["attacks"].get<std::vector<std::string>>();
  const long trials =
      opts.trials.has_value() ? *opts.trials : sweep.value("trials", long{200});

  std::string csv;
  Json cells = Json::array();
  bool first = true;
  for (int num_parties : party_counts) {
    for (int key_length : key_lengths) {
      for (const std::string& attack_name : attacks) {
        Json cell_doc = doc;
        cell_doc["protocol"]["N"] = num_parties;
        cell_doc["protocol"]["n"] = key_length;
        const sqka::ProtocolConfig config = resolve_protocol(cell_doc, seed);
        sqka::Rng rng(seed);
        const sqka::AttackModel attack =
            resolve_attack(cell_doc, config, rng, attack_name);
        const sqka::DetectionStats stats =
            sqka::monte_carlo(config, attack, trials, seed, opts.threads);
        const std::string prefix = "N=" + std::to_string(num_parties) + ";n=" +
                                   std::to_string(key_length) + ";attack=" +
                                   attack_name + ";";
        csv += sqka::detection_stats_to_csv(stats, prefix, first);
        first = false;
        cells.push_back(sqka::detection_stats_to_json(stats));
      }
    }
  }
  if (opts.output == "csv") {
    std::cout << csv;
    return kExitOk;
  }
  emit_json(Json{{"cells", cells}}, opts);
  return kExitOk;
}

int cmd_theorem1(const GlobalOptions& opts, const std::string& family, long instances,
                 int probe_dim, long samples) {
  const Json doc = load_document(opts);
  const uint64_t seed = resolve_seed(opts, doc);
  const sqka::ProtocolConfig config = resolve_protocol(doc, seed);

  if (family.empty()) {
    sqka::Rng rng(seed);
    const sqka::AttackModel attack = resolve_attack(doc, config, rng, "");
    if (attack.kind != sqka::AttackKind::EntangleMeasure)
      throw std::invalid_argument(
          "theorem1 needs an entangle-measure attack in the config (or --family)");
    const auto report = sqka::probe_independence(attack.probe, config, samples, seed);
    emit_json(sqka::independence_to_json(report), opts);
    return kExitOk;
  }

  if (family != "satisfying" && family != "violating")
    throw std::invalid_argument("--family must be 'satisfying' or 'violating'");
  Json rows = Json::array();
  double worst_distance = 0.0;
  double worst_detection = family == "satisfying" ? 0.0 : 1.0;
  for (long i = 0; i < instances; ++i) {
    sqka::Rng rng = sqka::Rng::substream(seed, static_cast<uint64_t>(i));
    const int dim = probe_dim > 0
                        ? probe_dim
                        : (family == "satisfying"
                               ? 1 + static_cast<int>(rng.below(4))
                               : 2 + static_cast<int>(rng.below(3)));
    const sqka::EntangleMeasureParams params =
        family == "satisfying" ? sqka::random_satisfying_attack(dim, rng)
                               : sqka::random_violating_attack(dim, rng);
    const auto report = sqka::probe_independence(params, config, samples, seed + i);
    worst_distance = std::max(worst_distance, report.max_pairwise_trace_distance);
    worst_detection = family == "satisfying"
                          ? std::max(worst_detection, report.empirical_detection)
                          : std::min(worst_detection, report.empirical_detection);
    rows.push_back(Json{{"instance", i},
                        {"probe_dim", dim},
                        {"detection", report.empirical_detection},
                        {"max_pairwise_trace_distance",
                         report.max_pairwise_trace_distance}});
  }
  emit_json(Json{{"family", family},
                 {"instances", instances},
                 {"worst_pairwise_trace_distance", worst_distance},
                 {family == "satisfying" ? "max_detection" : "min_detection",
                  worst_detection},
                 {"rows", rows}},
            opts);
  return kExitOk;
}

int cmd_efficiency(const GlobalOptions& opts, std::vector<int> ns, std::vector<long> keys,
                   std::vector<long> digests) {
  const Json doc = load_document(opts);
  const Json grid = doc.contains("efficiency") ? doc["efficiency"] : Json::object();
  if (ns.empty() && grid.contains("N")) ns = grid["N"].get<std::vector<int>>();
  if (keys.empty() && grid.contains("n")) keys = grid["n"].get<std::vector<long>>();
  if (digests.empty() && grid.contains("m")) digests = grid["m"].get<std::vector<long>>();
  if (ns.empty()) ns = {3};
  if (keys.empty()) keys = {128};
  if (digests.empty()) digests = {256};

  std::vector<sqka::EfficiencyReport> reports;
  for (int N : ns)
    for (long n : keys)
      for (long m : digests) reports.push_back(sqka::qubit_efficiency(N, n, m));

  if (opts.output == "csv") {
    std::cout << sqka::efficiency_to_csv(reports);
    return kExitOk;
  }
  Json rows = Json::array();
  for (const auto& r : reports) rows.push_back(sqka::efficiency_to_json(r));
  emit_json(Json{{"reports", rows}}, opts);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and security-analysis toolkit for a single-state multi-party "
               "semiquantum key agreement protocol on GHZ entangled states"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opts.seed, "randomness seed (fallback: config, then $SQKA_SEED)");
  app.add_option("--trials", opts.trials, "Monte Carlo trial count");
  app.add_option("--output", opts.output, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--set", opts.overrides,
                 "override a config field, e.g. --set protocol.n=8")
      ->take_all();
  app.add_flag("--no-timestamp", opts.no_timestamp, "suppress the generated_at field");
  app.add_option("--threads", opts.threads, "worker threads (0 = hardware)");

  auto* run = app.add_subcommand("run", "execute one protocol session");

  std::string model_flag;
  auto* attack = app.add_subcommand("attack", "Monte Carlo detection statistics");
  attack->add_option("--model", model_flag,
                     "attack variant (none, measure-resend, intercept-resend, "
                     "entangle-measure, dishonest-participant)");

  auto* sweep = app.add_subcommand("sweep", "grid of attack experiments (CSV-oriented)");

  std::string family;
  long instances = 50;
  int probe_dim = 0;
  long samples = 0;
  auto* theorem1 = app.add_subcommand(
      "theorem1", "probe-independence report for an entangle-measure attack");
  theorem1->add_option("--family", family,
                       "check a random attack family: satisfying | violating");
  theorem1->add_option("--instances", instances, "family size");
  theorem1->add_option("--probe-dim", probe_dim, "probe dimension (0 = random 1..4)");
  theorem1->add_option("--samples", samples, "Monte Carlo cross-check sample count");

  std::vector<int> eff_n_parties;
  std::vector<long> eff_keys, eff_digests;
  auto* efficiency = app.add_subcommand("efficiency", "qubit-efficiency table");
  efficiency->add_option("--N", eff_n_parties, "party counts");
  efficiency->add_option("--n", eff_keys, "key lengths");
  efficiency->add_option("--m", eff_digests, "digest lengths");

  for (CLI::App* sub : {run, attack, sweep, theorem1, efficiency}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts);
    if (attack->parsed()) return cmd_attack(opts, model_flag);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (theorem1->parsed()) return cmd_theorem1(opts, family, instances, probe_dim, samples);
    if (efficiency->parsed()) return cmd_efficiency(opts, eff_n_parties, eff_keys, eff_digests);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
