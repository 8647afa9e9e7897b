#pragma once

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "synaudit/attacks.hpp"
#include "synaudit/common.hpp"
#include "synaudit/dataset.hpp"
#include "synaudit/encode.hpp"
#include "synaudit/eval.hpp"
#include "synaudit/toygen.hpp"

namespace synaudit {

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

/// How encoder statistics are fitted inside a benchmark cell. Category
/// vocabularies always cover S u R u X so no test row hits an unseen label.
///   synthetic_stats  means/sigmas/PCA from the synthetic data only
///                    (default: the released data is the only fit surface)
///   pooled           statistics from S u R u X
enum class EncoderFitMode { synthetic_stats, pooled };

/// One attack configuration inside an experiment. k = 0 stands for |S|
/// (the un-localized end of the ablation grid).
struct AttackConfig {
  AttackId attack = AttackId::gen_lra;
  std::string label;  // unique within the experiment; defaults to the attack name
  EncodingStrategy encoding = EncodingStrategy::ordinal_standardize;
  std::size_t k = 10;                  // gen_lra, dpi
  std::optional<double> radius;        // mc
  LoganConfig logan_config;            // logan
  GenLraOptions gen_lra_options;       // gen_lra

  static EncodingStrategy default_encoding(AttackId id) {
    switch (id) {
      case AttackId::gen_lra:
      case AttackId::domias:
        return EncodingStrategy::ordinal_standardize;
      default:
        return EncodingStrategy::one_hot_scale;
    }
  }
};

using PopulationSource = std::variant<PopulationSpec, TabularDataset>;

struct ExperimentConfig {
  PopulationSource population;
  std::vector<GeneratorSpec> generators;
  std::vector<AttackConfig> attacks;
  std::vector<std::size_t> n_sizes;
  std::vector<std::uint64_t> seeds;
  std::vector<double> fpr_levels = {0.001, 0.01, 0.1};
  EncoderFitMode encoder_fit = EncoderFitMode::synthetic_stats;
  std::optional<std::filesystem::path> csv_path;  // set when population came from a CSV
  std::optional<std::filesystem::path> output_dir;

  // Labels become cell file names.
  static bool label_ok(std::string_view label) {
    if (label.empty()) return false;
    for (char c : label)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
        return false;
    return true;
  }

  void validate() const {
    if (generators.empty()) throw ConfigError("/generators: must not be empty");
    if (attacks.empty()) throw ConfigError("/attacks: must not be empty");
    if (seeds.empty()) throw ConfigError("/seeds: must not be empty");
    if (n_sizes.empty()) throw ConfigError("/n_sizes: must not be empty");
    for (std::size_t n : n_sizes)
      if (n == 0) throw ConfigError("/n_sizes: sizes must be positive");
    for (std::size_t i = 0; i < attacks.size(); ++i) {
      const std::string label = attacks[i].label.empty()
                                    ? std::string(attack_name(attacks[i].attack))
                                    : attacks[i].label;
      if (!label_ok(label))
        throw ConfigError("/attacks/" + std::to_string(i) +
                          "/label: must be non-empty [A-Za-z0-9_.-], got '" + label + "'");
      for (std::size_t j = i + 1; j < attacks.size(); ++j)
        if (attacks[i].label == attacks[j].label)
          throw ConfigError("/attacks: duplicate label '" + attacks[i].label + "'");
    }
    for (std::size_t i = 0; i < generators.size(); ++i) {
      if (!label_ok(generators[i].label()))
        throw ConfigError("/generators/" + std::to_string(i) +
                          "/name: must be non-empty [A-Za-z0-9_.-], got '" +
                          generators[i].label() + "'");
      for (std::size_t j = i + 1; j < generators.size(); ++j)
        if (generators[i].label() == generators[j].label())
          throw ConfigError("/generators: duplicate label '" + generators[i].label() + "'");
    }
    if (const auto* ds = std::get_if<TabularDataset>(&population)) {
      for (std::size_t n : n_sizes)
        if (3 * n > ds->row_count())
          throw ConfigError("/n_sizes: 3*" + std::to_string(n) + " exceeds the CSV row count " +
                            std::to_string(ds->row_count()));
    }
  }

  /// Canonical form used for hashing and resume keys. Excludes output_dir.
  nlohmann::json canonical_json() const;
  std::string config_hash() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical_json().dump());
    return os.str();
  }

  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = ".");
};

// ---------------------------------------------------------------------------
// Cell & run records
// ---------------------------------------------------------------------------

struct CellKey {
  std::string generator;
  std::string attack_label;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  std::string filename() const {
    return generator + "_" + attack_label + "_" + std::to_string(n) + "_" +
           std::to_string(seed) + ".json";
  }
};

struct CellResult {
  CellKey key;
  AttackScores scores;
  std::vector<std::uint8_t> labels;
  EvalReport report;
  std::map<std::string, double> stage_ms;  // not part of the deterministic cell file

  /// Deterministic JSON persisted under cells/<hash>/: identical
  /// (config, seed) reruns produce byte-identical output.
  nlohmann::json cell_json() const {
    nlohmann::json j;
    j["generator"] = key.generator;
    j["attack_label"] = key.attack_label;
    j["n"] = key.n;
    j["seed"] = key.seed;
    j["scores"] = scores.to_json();
    nlohmann::json lbl = nlohmann::json::array();
    for (auto b : labels) lbl.push_back(static_cast<int>(b));
    j["labels"] = lbl;
    j["report"] = report.to_json();
    return j;
  }

  static CellResult from_cell_json(const nlohmann::json& j) {
    CellResult c;
    c.key.generator = j.at("generator").get<std::string>();
    c.key.attack_label = j.at("attack_label").get<std::string>();
    c.key.n = j.at("n").get<std::size_t>();
    c.key.seed = j.at("seed").get<std::uint64_t>();
    c.scores = AttackScores::from_json(j.at("scores"));
    for (const auto& b : j.at("labels")) c.labels.push_back(b.get<int>() ? 1 : 0);
    c.report = EvalReport::from_json(j.at("report"));
    return c;
  }
};

struct CellError {
  CellKey key;
  std::string message;
};

struct RunRecord {
  std::string config_hash;
  std::vector<CellResult> cells;
  std::vector<CellError> errors;
  std::size_t resumed = 0;  // cells loaded from a previous run
  AggregateSummary summary;
};

/// Test instrumentation: observes exactly which datasets reach encoder
/// fitting inside a cell. The pointers are valid only for the duration of
/// the callback.
struct CellObserver {
  std::function<void(const std::vector<const TabularDataset*>& stats,
                     const std::vector<const TabularDataset*>& vocab)>
      on_encoder_fit;
};

// ---------------------------------------------------------------------------
// Cell execution
// ---------------------------------------------------------------------------

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& out) : out_(out) { reset(); }
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    out_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }
  void reset() { last_ = std::chrono::steady_clock::now(); }

 private:
  std::map<std::string, double>& out_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace detail

/// Dispatch one configured attack over encoded matrices. R may be empty for
/// attacks that ignore the reference set (dcr, mc).
inline AttackScores run_attack(const AttackConfig& cfg, const EncodedMatrix& S,
                               const EncodedMatrix& R, const EncodedMatrix& X) {
  const std::size_t k = cfg.k == 0 ? S.values.rows() : cfg.k;
  AttackScores scores = [&] {
    switch (cfg.attack) {
      case AttackId::gen_lra: return gen_lra(S, R, X, k, cfg.gen_lra_options);
      case AttackId::domias: return domias(S, R, X);
      case AttackId::dcr: return dcr(S, X);
      case AttackId::dcr_diff: return dcr_diff(S, R, X);
      case AttackId::mc: return mc(S, X, cfg.radius);
      case AttackId::dpi: return dpi(S, R, X, k);
      case AttackId::logan: return logan(S, R, X, cfg.logan_config);
    }
    throw Error("unreachable attack id");
  }();
  for (double s : scores.scores)
    if (!std::isfinite(s))
      throw Error(std::string(attack_name(cfg.attack)) + ": produced a non-finite score");
  return scores;
}

/// Run one benchmark cell: sample/load 3n rows, split into T/R/H, generate
/// S from T, score X = T then H, evaluate. Deterministic in (config, seed);
/// the population and split depend only on (seed, n) so every generator and
/// attack in a sweep sees the same T/R/H, and S depends only on
/// (seed, n, generator).
inline CellResult run_cell(const PopulationSource& source, EncoderFitMode fit_mode,
                           const GeneratorSpec& generator, const AttackConfig& attack,
                           std::size_t n, std::uint64_t seed,
                           std::span<const double> fpr_levels,
                           const CellObserver* observer = nullptr) {
  CellResult cell;
  cell.key = CellKey{generator.label(), attack.label.empty() ? std::string(attack_name(attack.attack))
                                                             : attack.label,
                     n, seed};
  detail::StageTimer timer(cell.stage_ms);

  // 1. Population rows.
  TabularDataset base;
  if (const auto* spec = std::get_if<PopulationSpec>(&source)) {
    base = sample_population(*spec, 3 * n, Rng::derive(seed, "population", n));
  } else {
    base = std::get<TabularDataset>(source);
  }
  timer.mark("sample");

  // 2. Disjoint equal-size split.
  SplitTriple split = split_disjoint(base, n, Rng::derive(seed, "split", n));
  timer.mark("split");

  // 3. Synthetic data, |S| = n.
  GeneratorSpec gen = generator;
  if (gen.kind == GeneratorKind::population_oracle && !gen.population.has_value()) {
    if (const auto* spec = std::get_if<PopulationSpec>(&source)) gen.population = *spec;
  }
  const TabularDataset synthetic =
      generate(gen, split.train, n, Rng::derive(seed, "generate:" + gen.label(), n));
  timer.mark("generate");

  // 4. Test set: all of T (label 1) then all of H (label 0).
  const TabularDataset test = concat_rows({&split.train, &split.holdout});
  cell.labels.assign(2 * n, 0);
  for (std::size_t i = 0; i < n; ++i) cell.labels[i] = 1;

  // 5. Encoder: statistics per fit_mode, vocabulary always S u R u X.
  std::vector<const TabularDataset*> stats, vocab;
  if (fit_mode == EncoderFitMode::synthetic_stats) {
    stats = {&synthetic};
    vocab = {&split.reference, &test};
  } else {
    stats = {&synthetic, &split.reference, &test};
    vocab = {};
  }
  if (observer && observer->on_encoder_fit) observer->on_encoder_fit(stats, vocab);
  const Encoder encoder = fit_encoder(attack.encoding, stats, vocab);
  const EncodedMatrix S = encoder.encode(synthetic);
  const EncodedMatrix R = encoder.encode(split.reference);
  const EncodedMatrix X = encoder.encode(test);
  timer.mark("encode");

  // 6. Score and evaluate.
  cell.scores = run_attack(attack, S, R, X);
  timer.mark("attack");
  cell.report = evaluate(cell.scores, cell.labels, fpr_levels, seed);
  timer.mark("evaluate");
  return cell;
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

/// Run the full Cartesian product (generators x attacks x n_sizes x seeds),
/// persisting one deterministic JSON per cell plus summary.json and
/// summary.txt under out_dir. Cell failures are recorded and the sweep
/// continues. With resume = true, cells whose file already exists under the
/// same config hash are loaded instead of recomputed.
inline RunRecord run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir, bool resume = false,
                                const CellObserver* observer = nullptr) {
  config.validate();
  RunRecord record;
  record.config_hash = config.config_hash();

  const std::filesystem::path cells_dir = out_dir / "cells" / record.config_hash;
  std::filesystem::create_directories(cells_dir);

  for (const auto& generator : config.generators) {
    for (const auto& attack : config.attacks) {
      for (std::size_t n : config.n_sizes) {
        for (std::uint64_t seed : config.seeds) {
          CellKey key{generator.label(),
                      attack.label.empty() ? std::string(attack_name(attack.attack)) : attack.label,
                      n, seed};
          const std::filesystem::path cell_path = cells_dir / key.filename();
          if (resume && std::filesystem::exists(cell_path)) {
            std::ifstream in(cell_path);
            nlohmann::json j;
            in >> j;
            record.cells.push_back(CellResult::from_cell_json(j));
            ++record.resumed;
            continue;
          }
          try {
            CellResult cell = run_cell(config.population, config.encoder_fit, generator, attack,
                                       n, seed, config.fpr_levels, observer);
            std::ofstream out(cell_path, std::ios::binary);
            out << cell.cell_json().dump(2) << '\n';
            record.cells.push_back(std::move(cell));
          } catch (const std::exception& e) {
            record.errors.push_back(CellError{key, e.what()});
            std::ofstream out(cells_dir / (key.filename() + ".error"));
            out << e.what() << '\n';
          }
        }
      }
    }
  }

  std::vector<TaggedReport> tagged;
  tagged.reserve(record.cells.size());
  for (const auto& cell : record.cells)
    tagged.push_back(TaggedReport{cell.key.generator, cell.key.attack_label, cell.key.n,
                                  cell.report});
  record.summary = aggregate(tagged);

  nlohmann::json summary;
  summary["config_hash"] = record.config_hash;
  summary["aggregate"] = record.summary.to_json();
  nlohmann::json jcells = nlohmann::json::array();
  for (const auto& cell : record.cells) {
    nlohmann::json jc;
    jc["generator"] = cell.key.generator;
    jc["attack"] = cell.key.attack_label;
    jc["n"] = cell.key.n;
    jc["seed"] = cell.key.seed;
    jc["status"] = "ok";
    jc["auc"] = cell.report.auc;
    jc["timings_ms"] = cell.stage_ms;
    jcells.push_back(jc);
  }
  for (const auto& err : record.errors) {
    nlohmann::json jc;
    jc["generator"] = err.key.generator;
    jc["attack"] = err.key.attack_label;
    jc["n"] = err.key.n;
    jc["seed"] = err.key.seed;
    jc["status"] = "error";
    jc["error"] = err.message;
    jcells.push_back(jc);
  }
  summary["cells"] = jcells;

  std::ofstream sj(out_dir / "summary.json", std::ios::binary);
  sj << summary.dump(2) << '\n';
  std::ofstream st(out_dir / "summary.txt", std::ios::binary);
  st << record.summary.to_text_table();

  return record;
}

// ---------------------------------------------------------------------------
// Config JSON (schema documented in the README)
// ---------------------------------------------------------------------------

inline nlohmann::json ExperimentConfig::canonical_json() const {
  nlohmann::json j;
  if (const auto* spec = std::get_if<PopulationSpec>(&population)) {
    j["population"] = spec->to_json();
  } else {
    j["population_csv"] = csv_path.has_value() ? csv_path->string() : "<inline>";
  }
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : generators) {
    nlohmann::json jg;
    jg["kind"] = std::string(generator_kind_name(g.kind));
    jg["name"] = g.label();
    if (g.kind == GeneratorKind::memorizer) {
      jg["noise_fraction"] = g.noise_fraction;
      jg["resample_prob"] = g.resample_prob;
    }
    if (g.population.has_value()) jg["population"] = g.population->to_json();
    gens.push_back(jg);
  }
  j["generators"] = gens;
  nlohmann::json atks = nlohmann::json::array();
  for (const auto& a : attacks) {
    nlohmann::json ja;
    ja["attack"] = std::string(attack_name(a.attack));
    ja["label"] = a.label.empty() ? std::string(attack_name(a.attack)) : a.label;
    ja["encoding"] = std::string(encoding_strategy_name(a.encoding));
    if (a.attack == AttackId::gen_lra || a.attack == AttackId::dpi) ja["k"] = a.k;
    if (a.attack == AttackId::gen_lra)
      ja["recompute_bandwidth"] = a.gen_lra_options.recompute_bandwidth;
    if (a.attack == AttackId::mc && a.radius.has_value()) ja["radius"] = *a.radius;
    if (a.attack == AttackId::logan) {
      ja["iterations"] = a.logan_config.iterations;
      ja["step"] = a.logan_config.step;
      ja["l2"] = a.logan_config.l2;
    }
    atks.push_back(ja);
  }
  j["attacks"] = atks;
  j["n_sizes"] = n_sizes;
  j["seeds"] = seeds;
  j["fpr_levels"] = fpr_levels;
  j["encoder_fit"] = encoder_fit == EncoderFitMode::synthetic_stats ? "synthetic_stats" : "pooled";
  return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  try {
    if (j.contains("population") && j.contains("population_csv"))
      throw ConfigError("/population: give either 'population' or 'population_csv', not both");
    if (j.contains("population")) {
      config.population = PopulationSpec::from_json(j.at("population"));
    } else if (j.contains("population_csv")) {
      std::filesystem::path p = j.at("population_csv").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      config.csv_path = p;
      config.population = load_csv(p);
    } else {
      throw ConfigError("/population: missing ('population' spec or 'population_csv' path)");
    }

    if (!j.contains("generators")) throw ConfigError("/generators: missing");
    for (std::size_t i = 0; i < j.at("generators").size(); ++i) {
      const auto& jg = j.at("generators")[i];
      GeneratorSpec g;
      const std::string kind = jg.at("kind").get<std::string>();
      auto k = generator_kind_from_name(kind);
      if (!k)
        throw ConfigError("/generators/" + std::to_string(i) + "/kind: unknown kind '" + kind + "'");
      g.kind = *k;
      g.name = jg.value("name", std::string());
      g.noise_fraction = jg.value("noise_fraction", 0.0);
      g.resample_prob = jg.value("resample_prob", 0.1);
      if (g.noise_fraction < 0.0)
        throw ConfigError("/generators/" + std::to_string(i) + "/noise_fraction: must be >= 0");
      if (g.resample_prob < 0.0 || g.resample_prob > 1.0)
        throw ConfigError("/generators/" + std::to_string(i) + "/resample_prob: must be in [0, 1]");
      if (jg.contains("population")) g.population = PopulationSpec::from_json(jg.at("population"));
      if (g.kind == GeneratorKind::population_oracle && !g.population.has_value() &&
          !j.contains("population"))
        throw ConfigError("/generators/" + std::to_string(i) +
                          ": population_oracle needs a population spec (inline or top-level)");
      config.generators.push_back(std::move(g));
    }

    if (!j.contains("attacks")) throw ConfigError("/attacks: missing");
    for (std::size_t i = 0; i < j.at("attacks").size(); ++i) {
      const auto& ja = j.at("attacks")[i];
      AttackConfig a;
      const std::string name = ja.at("attack").get<std::string>();
      auto id = attack_from_name(name);
      if (!id)
        throw ConfigError("/attacks/" + std::to_string(i) + "/attack: unknown attack '" + name + "'");
      a.attack = *id;
      a.label = ja.value("label", std::string(attack_name(a.attack)));
      if (ja.contains("encoding")) {
        auto enc = encoding_strategy_from_name(ja.at("encoding").get<std::string>());
        if (!enc)
          throw ConfigError("/attacks/" + std::to_string(i) + "/encoding: unknown strategy");
        a.encoding = *enc;
      } else {
        a.encoding = AttackConfig::default_encoding(a.attack);
      }
      if (ja.contains("k")) {
        if (ja.at("k").is_string()) {
          if (ja.at("k").get<std::string>() != "N")
            throw ConfigError("/attacks/" + std::to_string(i) + "/k: must be a positive integer or \"N\"");
          a.k = 0;  // sentinel: |S|
        } else {
          const auto k = ja.at("k").get<std::int64_t>();
          if (k <= 0)
            throw ConfigError("/attacks/" + std::to_string(i) + "/k: must be a positive integer or \"N\"");
          a.k = static_cast<std::size_t>(k);
        }
      }
      if (ja.contains("radius")) a.radius = ja.at("radius").get<double>();
      if (ja.contains("iterations")) a.logan_config.iterations = ja.at("iterations").get<std::size_t>();
      if (ja.contains("step")) a.logan_config.step = ja.at("step").get<double>();
      if (ja.contains("l2")) a.logan_config.l2 = ja.at("l2").get<double>();
      if (ja.contains("recompute_bandwidth"))
        a.gen_lra_options.recompute_bandwidth = ja.at("recompute_bandwidth").get<bool>();
      config.attacks.push_back(std::move(a));
    }

    if (!j.contains("n_sizes")) throw ConfigError("/n_sizes: missing");
    config.n_sizes = j.at("n_sizes").get<std::vector<std::size_t>>();
    if (!j.contains("seeds")) throw ConfigError("/seeds: missing");
    config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("fpr_levels")) config.fpr_levels = j.at("fpr_levels").get<std::vector<double>>();
    if (j.contains("encoder_fit")) {
      const std::string mode = j.at("encoder_fit").get<std::string>();
      if (mode == "synthetic_stats") config.encoder_fit = EncoderFitMode::synthetic_stats;
      else if (mode == "pooled") config.encoder_fit = EncoderFitMode::pooled;
      else throw ConfigError("/encoder_fit: must be 'synthetic_stats' or 'pooled'");
    }
    if (j.contains("output_dir"))
      config.output_dir = std::filesystem::path(j.at("output_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

}  // namespace synaudit
