// synaudit command-line front end: one-shot audits of CSV triples, metric
// evaluation of score files, and full benchmark runs.
//
// stdout carries only the machine-readable payload (JSON, or an aligned
// table with --pretty); diagnostics go to stderr. Exit codes: 0 success,
// 2 usage/input error, 1 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "synaudit/synaudit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct AuditArgs {
  std::string synthetic_path;
  std::string reference_path;
  std::string test_path;
  std::string attack = "gen-lra";
  std::size_t k = 10;
  std::string encoding;  // empty = per-attack default
  std::string encoder_fit = "synthetic_stats";
  std::uint64_t seed = 0;
  std::optional<double> radius;
  bool pretty = false;
};

bool attack_needs_reference(synaudit::AttackId id) {
  return id != synaudit::AttackId::dcr && id != synaudit::AttackId::mc;
}

int run_audit(const AuditArgs& args) {
  using namespace synaudit;

  const auto id = attack_from_name(args.attack);
  if (!id) {
    std::cerr << "error: unknown attack '" << args.attack << "'\n";
    return kExitUsage;
  }
  if (attack_needs_reference(*id) && args.reference_path.empty()) {
    std::cerr << "error: --reference is required for attack '" << args.attack << "'\n";
    return kExitUsage;
  }
  if (!attack_needs_reference(*id) && !args.reference_path.empty())
    std::cerr << "warning: --reference is ignored by attack '" << args.attack
              << "' (it uses the synthetic set only)\n";

  const TabularDataset synthetic = load_csv(args.synthetic_path);
  const TabularDataset test = load_csv(args.test_path);
  std::optional<TabularDataset> reference;
  if (!args.reference_path.empty()) reference = load_csv(args.reference_path);

  if (!schema_compatible(synthetic.schema(), test.schema()))
    throw IngestError(IngestError::Kind::schema,
                      "--synthetic and --test have incompatible column types");
  if (reference && !schema_compatible(synthetic.schema(), reference->schema()))
    throw IngestError(IngestError::Kind::schema,
                      "--synthetic and --reference have incompatible column types");

  EncodingStrategy strategy = AttackConfig::default_encoding(*id);
  if (!args.encoding.empty()) {
    const auto parsed = encoding_strategy_from_name(args.encoding);
    if (!parsed) {
      std::cerr << "error: unknown encoding '" << args.encoding
                << "' (expected ordinal, one-hot, or ordinal-pca)\n";
      return kExitUsage;
    }
    strategy = *parsed;
  }

  std::vector<const TabularDataset*> stats, vocab;
  if (args.encoder_fit == "pooled") {
    stats = {&synthetic, &test};
    if (reference) stats.push_back(&*reference);
  } else {
    stats = {&synthetic};
    vocab = {&test};
    if (reference) vocab.push_back(&*reference);
  }
  const Encoder encoder = fit_encoder(strategy, stats, vocab);
  const EncodedMatrix S = encoder.encode(synthetic);
  const EncodedMatrix X = encoder.encode(test);
  EncodedMatrix R;
  if (reference) R = encoder.encode(*reference);

  AttackConfig cfg;
  cfg.attack = *id;
  cfg.encoding = strategy;
  cfg.k = args.k;
  cfg.radius = args.radius;
  const AttackScores scores = synaudit::run_attack(cfg, S, R, X);

  std::cout << scores.to_json().dump(args.pretty ? 2 : -1) << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string scores_path;
  std::string labels_path;
  std::vector<double> fpr_levels = {0.001, 0.01, 0.1};
  bool pretty = false;
};

int run_evaluate(const EvaluateArgs& args) {
  using namespace synaudit;

  std::ifstream in(args.scores_path);
  if (!in) {
    std::cerr << "error: cannot open scores file '" << args.scores_path << "'\n";
    return kExitUsage;
  }
  nlohmann::json j;
  in >> j;
  const AttackScores scores = AttackScores::from_json(j);

  const TabularDataset labels_ds = load_csv(args.labels_path);
  if (labels_ds.column_count() != 1)
    throw IngestError(IngestError::Kind::schema, "--labels must have exactly one column");
  std::vector<std::uint8_t> labels(labels_ds.row_count());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels_ds.schema()[0].kind != ColumnKind::numeric)
      throw IngestError(IngestError::Kind::schema, "--labels column must be numeric 0/1");
    const double v = labels_ds.numeric_at(i, 0);
    if (v != 0.0 && v != 1.0)
      throw IngestError(IngestError::Kind::parse,
                        "--labels row " + std::to_string(i + 1) + ": expected 0 or 1");
    labels[i] = v == 1.0 ? 1 : 0;
  }
  if (labels.size() != scores.scores.size()) {
    std::cerr << "error: " << scores.scores.size() << " scores but " << labels.size()
              << " labels\n";
    return kExitUsage;
  }

  const EvalReport report = evaluate(scores, labels, args.fpr_levels);
  std::cout << report.to_json().dump(args.pretty ? 2 : -1) << '\n';
  return kExitOk;
}

struct BenchmarkArgs {
  std::string config_path;
  std::string out_dir;
  bool resume = false;
  bool pretty = false;
};

int run_benchmark(const BenchmarkArgs& args) {
  using namespace synaudit;

  std::ifstream in(args.config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << args.config_path << "'\n";
    return kExitUsage;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << '\n';
    return kExitUsage;
  }
  const ExperimentConfig config =
      ExperimentConfig::from_json(j, std::filesystem::path(args.config_path).parent_path());

  std::filesystem::path out_dir;
  if (!args.out_dir.empty()) {
    out_dir = args.out_dir;
  } else if (const char* env = std::getenv("SYNAUDIT_OUT_DIR"); env && *env) {
    out_dir = env;
  } else if (config.output_dir.has_value()) {
    out_dir = *config.output_dir;
  } else {
    std::cerr << "error: no output directory (--out, SYNAUDIT_OUT_DIR, or config output_dir)\n";
    return kExitUsage;
  }
  std::filesystem::create_directories(out_dir);

  const RunRecord record = run_experiment(config, out_dir, args.resume);
  if (!record.errors.empty())
    std::cerr << "warning: " << record.errors.size() << " cell(s) failed; see summary.json\n";
  if (record.resumed > 0)
    std::cerr << "resumed " << record.resumed << " completed cell(s)\n";

  if (args.pretty) {
    std::cout << record.summary.to_text_table();
  } else {
    nlohmann::json out;
    out["config_hash"] = record.config_hash;
    out["completed_cells"] = record.cells.size();
    out["failed_cells"] = record.errors.size();
    out["aggregate"] = record.summary.to_json();
    std::cout << out.dump(-1) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synaudit: membership-inference auditing for synthetic tabular data"};
  app.require_subcommand(1);

  AuditArgs audit_args;
  CLI::App* audit = app.add_subcommand(
      "audit", "Score test records against a released synthetic dataset");
  audit->add_option("--synthetic", audit_args.synthetic_path, "Synthetic dataset CSV (S)")
      ->required();
  audit->add_option("--reference", audit_args.reference_path,
                    "Reference sample CSV (R); required by reference-calibrated attacks");
  audit->add_option("--test", audit_args.test_path, "Test records CSV (X)")->required();
  audit->add_option("--attack", audit_args.attack,
                    "gen-lra | domias | dcr | dcr-diff | mc | dpi | logan");
  audit->add_option("--k", audit_args.k, "Neighborhood size for gen-lra / dpi");
  audit->add_option("--encoding", audit_args.encoding,
                    "ordinal | one-hot | ordinal-pca (default: per-attack)");
  audit->add_option("--encoder-fit", audit_args.encoder_fit,
                    "synthetic_stats | pooled")
      ->check(CLI::IsMember({"synthetic_stats", "pooled"}));
  audit->add_option("--seed", audit_args.seed,
                    "Accepted for interface stability; bundled attacks are deterministic");
  double mc_radius = 0.0;
  CLI::Option* radius_opt =
      audit->add_option("--radius", mc_radius, "Neighborhood radius for mc (default: median)");
  audit->add_flag("--pretty", audit_args.pretty, "Indent the JSON output");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Compute AUC, TPR@FPR, and median-threshold accuracy for a score file");
  evaluate->add_option("--scores", eval_args.scores_path, "Attack scores JSON")->required();
  evaluate->add_option("--labels", eval_args.labels_path, "CSV with a single 0/1 column")
      ->required();
  evaluate->add_option("--fpr", eval_args.fpr_levels, "FPR levels (default 0.001 0.01 0.1)");
  evaluate->add_flag("--pretty", eval_args.pretty, "Indent the JSON output");

  BenchmarkArgs bench_args;
  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Run a full generator x attack x seed sweep");
  benchmark->add_option("--config", bench_args.config_path, "Experiment config JSON")->required();
  benchmark->add_option("--out", bench_args.out_dir,
                        "Output directory (falls back to SYNAUDIT_OUT_DIR, then the config)");
  benchmark->add_flag("--resume", bench_args.resume, "Skip cells already completed for this config");
  benchmark->add_flag("--pretty", bench_args.pretty, "Print aligned tables instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (audit->parsed()) {
      if (radius_opt->count() > 0) audit_args.radius = mc_radius;
      return run_audit(audit_args);
    }
    if (evaluate->parsed()) return run_evaluate(eval_args);
    if (benchmark->parsed()) return run_benchmark(bench_args);
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const synaudit::Error& e) {
    // Everything the library throws on these paths stems from the inputs:
    // files, flags, or the config document.
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
