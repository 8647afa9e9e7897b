#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synaudit/common.hpp"
#include "synaudit/dataset.hpp"

namespace synaudit {

// ---------------------------------------------------------------------------
// Population specification
// ---------------------------------------------------------------------------

/// One Gaussian mixture component over the numeric columns (diagonal
/// covariance), in schema order of the numeric columns.
struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> variance;
};

/// The synthetic-benchmark population: numeric columns follow a Gaussian
/// mixture, categorical columns are independent with fixed probability
/// tables.
struct PopulationSpec {
  std::vector<ColumnSchema> columns;
  std::vector<GaussianComponent> mixture;
  std::map<std::string, std::vector<double>> categorical_probs;

  std::size_t numeric_count() const {
    std::size_t n = 0;
    for (const auto& c : columns)
      if (c.kind == ColumnKind::numeric) ++n;
    return n;
  }

  void validate() const {
    if (columns.empty()) throw ConfigError("population: no columns");
    const std::size_t numeric = numeric_count();
    if (numeric > 0) {
      if (mixture.empty()) throw ConfigError("population: numeric columns but empty mixture");
      double total = 0.0;
      for (const auto& comp : mixture) {
        if (comp.mean.size() != numeric || comp.variance.size() != numeric)
          throw ConfigError("population: component dimension does not match numeric columns");
        for (double v : comp.variance)
          if (!(v > 0.0)) throw ConfigError("population: variances must be positive");
        total += comp.weight;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("population: mixture weights must sum to 1");
    }
    for (const auto& c : columns) {
      if (c.kind != ColumnKind::categorical) continue;
      auto it = categorical_probs.find(c.name);
      if (it == categorical_probs.end())
        throw ConfigError("population: missing probability table for column '" + c.name + "'");
      if (it->second.size() != c.categories.size())
        throw ConfigError("population: probability table size mismatch for column '" + c.name + "'");
      double total = 0.0;
      for (double p : it->second) {
        if (p < 0.0) throw ConfigError("population: negative probability in column '" + c.name + "'");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw ConfigError("population: probabilities for column '" + c.name + "' must sum to 1");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : columns) {
      nlohmann::json jc;
      jc["name"] = c.name;
      jc["kind"] = c.kind == ColumnKind::numeric ? "numeric" : "categorical";
      if (c.kind == ColumnKind::categorical) jc["categories"] = c.categories;
      cols.push_back(jc);
    }
    j["columns"] = cols;
    nlohmann::json mix = nlohmann::json::array();
    for (const auto& comp : mixture)
      mix.push_back({{"weight", comp.weight}, {"mean", comp.mean}, {"variance", comp.variance}});
    j["mixture"] = mix;
    j["categorical_probs"] = categorical_probs;
    return j;
  }

  static PopulationSpec from_json(const nlohmann::json& j) {
    PopulationSpec spec;
    for (const auto& jc : j.at("columns")) {
      ColumnSchema c;
      c.name = jc.at("name").get<std::string>();
      const std::string kind = jc.at("kind").get<std::string>();
      if (kind == "numeric") {
        c.kind = ColumnKind::numeric;
      } else if (kind == "categorical") {
        c.kind = ColumnKind::categorical;
        c.categories = jc.at("categories").get<std::vector<std::string>>();
      } else {
        throw ConfigError("population column kind must be 'numeric' or 'categorical'");
      }
      spec.columns.push_back(std::move(c));
    }
    if (j.contains("mixture"))
      for (const auto& jm : j.at("mixture")) {
        GaussianComponent comp;
        comp.weight = jm.at("weight").get<double>();
        comp.mean = jm.at("mean").get<std::vector<double>>();
        comp.variance = jm.at("variance").get<std::vector<double>>();
        spec.mixture.push_back(std::move(comp));
      }
    if (j.contains("categorical_probs"))
      spec.categorical_probs =
          j.at("categorical_probs").get<std::map<std::string, std::vector<double>>>();
    spec.validate();
    return spec;
  }
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Three generators spanning the leakage spectrum:
///   memorizer         noised copies of training rows (maximal, controllable
///                     overfitting; noise_fraction scales per-column sigma,
///                     categoricals resampled from the training marginal
///                     with resample_prob)
///   parametric_fit    a single diagonal Gaussian + empirical marginals fit
///                     to T, sampled independently (smooth, mild leakage)
///   population_oracle ignores T and samples the true population (no
///                     leakage by construction)
enum class GeneratorKind { memorizer, parametric_fit, population_oracle };

inline std::string_view generator_kind_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::memorizer: return "memorizer";
    case GeneratorKind::parametric_fit: return "parametric_fit";
    case GeneratorKind::population_oracle: return "population_oracle";
  }
  return "?";
}

inline std::optional<GeneratorKind> generator_kind_from_name(std::string_view name) {
  if (name == "memorizer") return GeneratorKind::memorizer;
  if (name == "parametric_fit") return GeneratorKind::parametric_fit;
  if (name == "population_oracle") return GeneratorKind::population_oracle;
  return std::nullopt;
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::memorizer;
  std::string name;                          // label for reports; defaults to the kind
  double noise_fraction = 0.0;               // memorizer
  double resample_prob = 0.1;                // memorizer, categorical columns
  std::optional<PopulationSpec> population;  // population_oracle

  std::string label() const {
    return name.empty() ? std::string(generator_kind_name(kind)) : name;
  }
};

/// i.i.d. draws from the population. Per row, the draw order is fixed:
/// mixture component first, then columns in schema order.
inline TabularDataset sample_population(const PopulationSpec& spec, std::size_t n,
                                        std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<Row> rows;
  rows.reserve(n);

  auto pick = [&](const std::vector<double>& cumulative) {
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cumulative.size(); ++i)
      if (u < cumulative[i]) return i;
    return cumulative.size() - 1;
  };

  std::vector<double> comp_cum;
  for (const auto& comp : spec.mixture)
    comp_cum.push_back((comp_cum.empty() ? 0.0 : comp_cum.back()) + comp.weight);
  std::map<std::string, std::vector<double>> cat_cum;
  for (const auto& [name, probs] : spec.categorical_probs) {
    std::vector<double> cum;
    for (double p : probs) cum.push_back((cum.empty() ? 0.0 : cum.back()) + p);
    cat_cum[name] = std::move(cum);
  }

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t comp = spec.mixture.empty() ? 0 : pick(comp_cum);
    Row row;
    row.reserve(spec.columns.size());
    std::size_t numeric_index = 0;
    for (const auto& col : spec.columns) {
      if (col.kind == ColumnKind::numeric) {
        const auto& g = spec.mixture[comp];
        row.emplace_back(g.mean[numeric_index] +
                         std::sqrt(g.variance[numeric_index]) * rng.normal());
        ++numeric_index;
      } else {
        row.emplace_back(col.categories[pick(cat_cum.at(col.name))]);
      }
    }
    rows.push_back(std::move(row));
  }
  return TabularDataset(spec.columns, std::move(rows));
}

/// Produce m synthetic rows from the generator. Deterministic in seed; the
/// population_oracle never reads T, so its output is independent of the
/// training set by construction.
inline TabularDataset generate(const GeneratorSpec& gen, const TabularDataset& training,
                               std::size_t m, std::uint64_t seed) {
  if (gen.noise_fraction < 0.0)
    throw ConfigError("generator noise_fraction must be >= 0");
  if (gen.resample_prob < 0.0 || gen.resample_prob > 1.0)
    throw ConfigError("generator resample_prob must be in [0, 1]");
  if (gen.kind == GeneratorKind::population_oracle) {
    if (!gen.population.has_value())
      throw ConfigError("population_oracle generator needs a population spec");
    return sample_population(*gen.population, m, seed);
  }
  if (training.row_count() == 0)
    throw Error("generate: empty training set");

  const auto& schema = training.schema();
  const std::size_t n = training.row_count();
  Rng rng(seed);

  // Per-column training statistics.
  std::vector<double> col_mean(schema.size(), 0.0), col_sigma(schema.size(), 0.0);
  std::vector<std::vector<double>> cat_cum(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].kind == ColumnKind::numeric) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += training.numeric_at(r, c);
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = training.numeric_at(r, c) - mean;
        ss += d * d;
      }
      col_mean[c] = mean;
      col_sigma[c] = std::sqrt(ss / static_cast<double>(n));
    } else {
      std::vector<double> counts(schema[c].categories.size(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& label = training.category_at(r, c);
        const auto it =
            std::find(schema[c].categories.begin(), schema[c].categories.end(), label);
        counts[static_cast<std::size_t>(it - schema[c].categories.begin())] += 1.0;
      }
      std::vector<double> cum;
      double acc = 0.0;
      for (double cnt : counts) {
        acc += cnt / static_cast<double>(n);
        cum.push_back(acc);
      }
      cat_cum[c] = std::move(cum);
    }
  }

  auto pick_cum = [&](const std::vector<double>& cum) {
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cum.size(); ++i)
      if (u < cum[i]) return i;
    return cum.size() - 1;
  };

  std::vector<Row> rows;
  rows.reserve(m);
  for (std::size_t r = 0; r < m; ++r) {
    Row row;
    row.reserve(schema.size());
    if (gen.kind == GeneratorKind::memorizer) {
      const std::size_t src = rng.below(n);
      for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].kind == ColumnKind::numeric) {
          double v = training.numeric_at(src, c);
          if (gen.noise_fraction > 0.0 && col_sigma[c] > 0.0)
            v += gen.noise_fraction * col_sigma[c] * rng.normal();
          row.emplace_back(v);
        } else {
          if (rng.uniform() < gen.resample_prob)
            row.emplace_back(schema[c].categories[pick_cum(cat_cum[c])]);
          else
            row.emplace_back(training.category_at(src, c));
        }
      }
    } else {  // parametric_fit
      for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].kind == ColumnKind::numeric)
          row.emplace_back(col_mean[c] + col_sigma[c] * rng.normal());
        else
          row.emplace_back(schema[c].categories[pick_cum(cat_cum[c])]);
      }
    }
    rows.push_back(std::move(row));
  }
  return TabularDataset(schema, std::move(rows));
}

}  // namespace synaudit
