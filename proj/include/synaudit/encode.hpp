#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "synaudit/common.hpp"
#include "synaudit/dataset.hpp"

namespace synaudit {

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Feature transformations turning mixed-type datasets into real matrices.
///   ordinal_standardize      one real feature per column (categoricals as
///                            lexicographic ordinal codes), standardized;
///                            default arm for density-based attacks
///   one_hot_scale            numeric columns standardized, categoricals
///                            expanded to raw 0/1 indicators; arm for
///                            distance/classifier baselines
///   ordinal_standardize_pca  ordinal_standardize followed by PCA keeping
///                            the smallest component count with cumulative
///                            explained variance >= 0.95
enum class EncodingStrategy { ordinal_standardize, one_hot_scale, ordinal_standardize_pca };

inline std::string_view encoding_strategy_name(EncodingStrategy s) {
  switch (s) {
    case EncodingStrategy::ordinal_standardize: return "ordinal_standardize";
    case EncodingStrategy::one_hot_scale: return "one_hot_scale";
    case EncodingStrategy::ordinal_standardize_pca: return "ordinal_standardize_pca";
  }
  return "?";
}

inline std::optional<EncodingStrategy> encoding_strategy_from_name(std::string_view name) {
  if (name == "ordinal_standardize" || name == "ordinal") return EncodingStrategy::ordinal_standardize;
  if (name == "one_hot_scale" || name == "one-hot" || name == "one_hot") return EncodingStrategy::one_hot_scale;
  if (name == "ordinal_standardize_pca" || name == "ordinal-pca" || name == "pca")
    return EncodingStrategy::ordinal_standardize_pca;
  return std::nullopt;
}

/// Real-valued n x d matrix produced by a fitted Encoder, tagged with the
/// encoder that produced it so attacks can reject mixed encodings.
struct EncodedMatrix {
  Matrix values;
  std::uint64_t encoder_id = 0;
};

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi) for the PCA strategy.
// Deterministic sweep order; plenty at the dimensionalities seen here.
// ---------------------------------------------------------------------------

namespace detail {

struct EigenResult {
  std::vector<double> values;  // unsorted, aligned with vector columns
  Matrix vectors;              // column j is the eigenvector for values[j]
};

inline EigenResult jacobi_eigen(Matrix a) {
  const std::size_t p = a.rows();
  if (p != a.cols()) throw DimensionMismatch("jacobi_eigen: matrix not square");
  Matrix v(p, p);
  for (std::size_t i = 0; i < p; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-24) break;

    for (std::size_t i = 0; i + 1 < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        if (std::abs(a(i, j)) < 1e-300) continue;
        const double theta = (a(j, j) - a(i, i)) / (2.0 * a(i, j));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < p; ++k) {
          const double aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double aik = a(i, k), ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double vki = v(k, i), vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  EigenResult out;
  out.values.resize(p);
  for (std::size_t i = 0; i < p; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

/// A fitted, per-feature-invertible transformation. Immutable after fit;
/// encode() is pure. Serializable to JSON for audit reproducibility.
class Encoder {
 public:
  struct Feature {
    std::size_t column = 0;   // index into schema()
    int category = -1;        // >= 0 for one-hot indicator features
    bool standardize = true;  // false -> raw 0/1 indicator
    double mean = 0.0;
    double stddev = 0.0;      // population (divide by n)
    bool dropped = false;     // sigma == 0 over the fit data
    std::string name;

    friend bool operator==(const Feature&, const Feature&) = default;
  };

  EncodingStrategy strategy() const { return strategy_; }
  const std::vector<ColumnSchema>& schema() const { return schema_; }
  const std::vector<Feature>& features() const { return features_; }
  std::uint64_t id() const { return id_; }

  /// Output dimension after drops (and PCA reduction when applicable).
  std::size_t output_dim() const {
    if (strategy_ == EncodingStrategy::ordinal_standardize_pca) return pca_components_.rows();
    return retained_;
  }

  /// Names of features dropped for zero variance over the fit data.
  std::vector<std::string> dropped_features() const {
    std::vector<std::string> out;
    for (const auto& f : features_)
      if (f.dropped) out.push_back(f.name);
    return out;
  }

  const Matrix& pca_components() const { return pca_components_; }
  const std::vector<double>& pca_eigenvalues() const { return pca_eigenvalues_; }

  EncodedMatrix encode(const TabularDataset& dataset) const {
    if (!schema_compatible(schema_, dataset.schema()))
      throw EncodingError("encode: dataset schema does not match the fitted schema");
    const std::size_t n = dataset.row_count();
    Matrix z(n, retained_);
    std::vector<double> inter(features_.size());
    for (std::size_t r = 0; r < n; ++r) {
      intermediate_row(dataset, r, inter);
      std::size_t out = 0;
      for (std::size_t f = 0; f < features_.size(); ++f) {
        if (features_[f].dropped) continue;
        const auto& ft = features_[f];
        z(r, out++) = ft.standardize ? (inter[f] - ft.mean) / ft.stddev : inter[f];
      }
    }
    if (strategy_ != EncodingStrategy::ordinal_standardize_pca)
      return EncodedMatrix{std::move(z), id_};

    const std::size_t m = pca_components_.rows();
    Matrix y(n, m);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < retained_; ++j)
          acc += pca_components_(i, j) * (z(r, j) - pca_mean_[j]);
        y(r, i) = acc;
      }
    return EncodedMatrix{std::move(y), id_};
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["strategy"] = std::string(encoding_strategy_name(strategy_));
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : schema_) {
      nlohmann::json jc;
      jc["name"] = c.name;
      jc["kind"] = c.kind == ColumnKind::numeric ? "numeric" : "categorical";
      if (c.kind == ColumnKind::categorical) jc["categories"] = c.categories;
      cols.push_back(jc);
    }
    j["columns"] = cols;
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : features_) {
      nlohmann::json jf;
      jf["name"] = f.name;
      jf["column"] = f.column;
      if (f.category >= 0) jf["category"] = f.category;
      jf["transform"] = f.standardize ? "standardize" : "raw01";
      jf["mean"] = f.mean;
      jf["stddev"] = f.stddev;
      jf["dropped"] = f.dropped;
      feats.push_back(jf);
    }
    j["features"] = feats;
    if (strategy_ == EncodingStrategy::ordinal_standardize_pca) {
      nlohmann::json pca;
      pca["mean"] = pca_mean_;
      nlohmann::json comps = nlohmann::json::array();
      for (std::size_t i = 0; i < pca_components_.rows(); ++i) {
        std::vector<double> row(pca_components_.row(i).begin(), pca_components_.row(i).end());
        comps.push_back(row);
      }
      pca["components"] = comps;
      pca["eigenvalues"] = pca_eigenvalues_;
      j["pca"] = pca;
    }
    return j;
  }

  static Encoder from_json(const nlohmann::json& j) {
    Encoder e;
    auto strat = encoding_strategy_from_name(j.at("strategy").get<std::string>());
    if (!strat) throw EncodingError("unknown encoder strategy in JSON");
    e.strategy_ = *strat;
    for (const auto& jc : j.at("columns")) {
      ColumnSchema c;
      c.name = jc.at("name").get<std::string>();
      c.kind = jc.at("kind").get<std::string>() == "numeric" ? ColumnKind::numeric
                                                             : ColumnKind::categorical;
      if (jc.contains("categories")) c.categories = jc.at("categories").get<std::vector<std::string>>();
      e.schema_.push_back(std::move(c));
    }
    for (const auto& jf : j.at("features")) {
      Feature f;
      f.name = jf.at("name").get<std::string>();
      f.column = jf.at("column").get<std::size_t>();
      f.category = jf.contains("category") ? jf.at("category").get<int>() : -1;
      f.standardize = jf.at("transform").get<std::string>() == "standardize";
      f.mean = jf.at("mean").get<double>();
      f.stddev = jf.at("stddev").get<double>();
      f.dropped = jf.at("dropped").get<bool>();
      e.features_.push_back(std::move(f));
    }
    e.retained_ = 0;
    for (const auto& f : e.features_)
      if (!f.dropped) ++e.retained_;
    if (j.contains("pca")) {
      e.pca_mean_ = j.at("pca").at("mean").get<std::vector<double>>();
      e.pca_eigenvalues_ = j.at("pca").at("eigenvalues").get<std::vector<double>>();
      for (const auto& row : j.at("pca").at("components"))
        e.pca_components_.append_row(row.get<std::vector<double>>());
    }
    e.id_ = fnv1a64(e.to_json().dump());
    return e;
  }

 private:
  friend Encoder fit_encoder(EncodingStrategy,
                             const std::vector<const TabularDataset*>&,
                             const std::vector<const TabularDataset*>&,
                             double);

  /// Raw feature expansion of one dataset row, before drops/standardization.
  void intermediate_row(const TabularDataset& ds, std::size_t r,
                        std::vector<double>& out) const {
    std::size_t f = 0;
    for (std::size_t c = 0; c < schema_.size(); ++c) {
      if (schema_[c].kind == ColumnKind::numeric) {
        out[f++] = ds.numeric_at(r, c);
        continue;
      }
      const std::string& label = ds.category_at(r, c);
      const auto& cats = schema_[c].categories;
      const auto it = std::lower_bound(cats.begin(), cats.end(), label);
      if (it == cats.end() || *it != label)
        throw EncodingError("encode: unseen category '" + label + "' in column '" +
                            schema_[c].name + "'");
      const std::size_t code = static_cast<std::size_t>(it - cats.begin());
      if (strategy_ == EncodingStrategy::one_hot_scale) {
        for (std::size_t k = 0; k < cats.size(); ++k) out[f++] = (k == code) ? 1.0 : 0.0;
      } else {
        out[f++] = static_cast<double>(code);
      }
    }
  }

  EncodingStrategy strategy_ = EncodingStrategy::ordinal_standardize;
  std::vector<ColumnSchema> schema_;  // fitted schema; categories = union vocabulary
  std::vector<Feature> features_;
  std::size_t retained_ = 0;
  std::vector<double> pca_mean_;
  Matrix pca_components_;  // retained component rows over the retained features
  std::vector<double> pca_eigenvalues_;
  std::uint64_t id_ = 0;
};

/// Fit an encoder. Statistics (means, sigmas, PCA components) come from the
/// concatenation of `stats_data`; `vocab_data` contributes only category
/// vocabularies so later encode() calls never hit an unseen label.
inline Encoder fit_encoder(EncodingStrategy strategy,
                           const std::vector<const TabularDataset*>& stats_data,
                           const std::vector<const TabularDataset*>& vocab_data = {},
                           double pca_variance = 0.95) {
  if (stats_data.empty()) throw EncodingError("fit_encoder: no fit data");
  const auto& base = stats_data.front()->schema();
  std::size_t stats_rows = 0;
  for (const TabularDataset* ds : stats_data) {
    if (!schema_compatible(base, ds->schema()))
      throw EncodingError("fit_encoder: fit datasets have mismatched schemas");
    stats_rows += ds->row_count();
  }
  for (const TabularDataset* ds : vocab_data)
    if (!schema_compatible(base, ds->schema()))
      throw EncodingError("fit_encoder: vocabulary datasets have mismatched schemas");
  if (stats_rows < 2) throw EncodingError("fit_encoder: need at least 2 rows");

  Encoder e;
  e.strategy_ = strategy;
  e.schema_ = base;
  // Union vocabulary, sorted: ordinal codes are lexicographic and stable.
  for (std::size_t c = 0; c < base.size(); ++c) {
    if (base[c].kind != ColumnKind::categorical) continue;
    std::set<std::string> merged;
    for (const TabularDataset* ds : stats_data)
      merged.insert(ds->schema()[c].categories.begin(), ds->schema()[c].categories.end());
    for (const TabularDataset* ds : vocab_data)
      merged.insert(ds->schema()[c].categories.begin(), ds->schema()[c].categories.end());
    e.schema_[c].categories.assign(merged.begin(), merged.end());
  }

  // Feature layout.
  for (std::size_t c = 0; c < e.schema_.size(); ++c) {
    if (e.schema_[c].kind == ColumnKind::numeric) {
      Encoder::Feature f;
      f.column = c;
      f.name = e.schema_[c].name;
      f.standardize = true;
      e.features_.push_back(std::move(f));
    } else if (strategy == EncodingStrategy::one_hot_scale) {
      for (std::size_t k = 0; k < e.schema_[c].categories.size(); ++k) {
        Encoder::Feature f;
        f.column = c;
        f.category = static_cast<int>(k);
        f.name = e.schema_[c].name + "=" + e.schema_[c].categories[k];
        f.standardize = false;
        e.features_.push_back(std::move(f));
      }
    } else {
      Encoder::Feature f;
      f.column = c;
      f.name = e.schema_[c].name;
      f.standardize = true;  // ordinal codes treated as ordinary reals
      e.features_.push_back(std::move(f));
    }
  }

  // Intermediate expansion of the stats data.
  Matrix inter(stats_rows, e.features_.size());
  {
    std::vector<double> buf(e.features_.size());
    std::size_t r = 0;
    for (const TabularDataset* ds : stats_data)
      for (std::size_t i = 0; i < ds->row_count(); ++i, ++r) {
        e.intermediate_row(*ds, i, buf);
        for (std::size_t f = 0; f < buf.size(); ++f) inter(r, f) = buf[f];
      }
  }

  // Per-feature statistics; drop zero-variance dimensions.
  e.retained_ = 0;
  for (std::size_t f = 0; f < e.features_.size(); ++f) {
    const ColumnStats st = column_stats(inter, f);
    e.features_[f].mean = st.mean;
    e.features_[f].stddev = st.stddev;
    e.features_[f].dropped = (st.stddev == 0.0);
    if (!e.features_[f].dropped) ++e.retained_;
  }
  if (e.retained_ == 0)
    throw EncodingError("fit_encoder: all columns constant over the fit data");

  if (strategy == EncodingStrategy::ordinal_standardize_pca) {
    // Standardized stats matrix over retained features.
    Matrix z(stats_rows, e.retained_);
    {
      std::size_t out = 0;
      for (std::size_t f = 0; f < e.features_.size(); ++f) {
        if (e.features_[f].dropped) continue;
        for (std::size_t r = 0; r < stats_rows; ++r)
          z(r, out) = (inter(r, f) - e.features_[f].mean) / e.features_[f].stddev;
        ++out;
      }
    }
    e.pca_mean_.assign(e.retained_, 0.0);
    for (std::size_t j = 0; j < e.retained_; ++j)
      e.pca_mean_[j] = column_stats(z, j).mean;

    Matrix cov(e.retained_, e.retained_);
    for (std::size_t a = 0; a < e.retained_; ++a)
      for (std::size_t b = a; b < e.retained_; ++b) {
        double acc = 0.0;
        for (std::size_t r = 0; r < stats_rows; ++r)
          acc += (z(r, a) - e.pca_mean_[a]) * (z(r, b) - e.pca_mean_[b]);
        cov(a, b) = cov(b, a) = acc / static_cast<double>(stats_rows);
      }

    auto eig = detail::jacobi_eigen(cov);
    std::vector<std::size_t> order(e.retained_);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eig.values[a] > eig.values[b]; });

    double total = 0.0;
    for (double v : eig.values) total += std::max(v, 0.0);
    double cum = 0.0;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      cum += std::max(eig.values[order[i]], 0.0);
      keep = i + 1;
      if (cum >= pca_variance * total) break;
    }

    e.pca_components_ = Matrix(keep, e.retained_);
    e.pca_eigenvalues_.resize(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t col = order[i];
      e.pca_eigenvalues_[i] = eig.values[col];
      // Deterministic sign: largest-magnitude entry positive.
      std::size_t arg = 0;
      for (std::size_t j = 1; j < e.retained_; ++j)
        if (std::abs(eig.vectors(j, col)) > std::abs(eig.vectors(arg, col))) arg = j;
      const double sign = eig.vectors(arg, col) < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < e.retained_; ++j)
        e.pca_components_(i, j) = sign * eig.vectors(j, col);
    }
  }

  e.id_ = fnv1a64(e.to_json().dump());
  return e;
}

}  // namespace synaudit
