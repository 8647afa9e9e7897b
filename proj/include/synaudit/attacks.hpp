#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synaudit/common.hpp"
#include "synaudit/density.hpp"
#include "synaudit/encode.hpp"
#include "synaudit/neighbors.hpp"

namespace synaudit {

// ---------------------------------------------------------------------------
// Score containers
// ---------------------------------------------------------------------------

enum class AttackId { gen_lra, domias, dcr, dcr_diff, mc, dpi, logan };

inline std::string_view attack_name(AttackId id) {
  switch (id) {
    case AttackId::gen_lra: return "gen_lra";
    case AttackId::domias: return "domias";
    case AttackId::dcr: return "dcr";
    case AttackId::dcr_diff: return "dcr_diff";
    case AttackId::mc: return "mc";
    case AttackId::dpi: return "dpi";
    case AttackId::logan: return "logan";
  }
  return "?";
}

inline std::optional<AttackId> attack_from_name(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "gen_lra") return AttackId::gen_lra;
  if (s == "domias") return AttackId::domias;
  if (s == "dcr") return AttackId::dcr;
  if (s == "dcr_diff") return AttackId::dcr_diff;
  if (s == "mc") return AttackId::mc;
  if (s == "dpi") return AttackId::dpi;
  if (s == "logan") return AttackId::logan;
  return std::nullopt;
}

/// Per-test-point membership scores for one attack configuration. Larger
/// means "member". Scores are finite and aligned with the test rows.
struct AttackScores {
  AttackId attack = AttackId::gen_lra;
  nlohmann::json params = nlohmann::json::object();
  std::vector<double> scores;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["attack"] = std::string(attack_name(attack));
    j["params"] = params;
    j["scores"] = scores;
    return j;
  }

  static AttackScores from_json(const nlohmann::json& j) {
    AttackScores s;
    auto id = attack_from_name(j.at("attack").get<std::string>());
    if (!id) throw Error("unknown attack id in scores JSON");
    s.attack = *id;
    s.params = j.value("params", nlohmann::json::object());
    s.scores = j.at("scores").get<std::vector<double>>();
    return s;
  }
};

/// Thresholded membership guesses: bits[i] = 1 iff scores[i] > threshold.
struct MembershipPrediction {
  std::vector<std::uint8_t> bits;
  double threshold = 0.0;
};

inline MembershipPrediction decide(const AttackScores& scores, double threshold) {
  MembershipPrediction p;
  p.threshold = threshold;
  p.bits.resize(scores.scores.size());
  for (std::size_t i = 0; i < scores.scores.size(); ++i)
    p.bits[i] = scores.scores[i] > threshold ? 1 : 0;
  return p;
}

namespace detail {

inline void require_same_encoder(const EncodedMatrix& a, const EncodedMatrix& b,
                                 std::string_view attack) {
  if (a.encoder_id != b.encoder_id)
    throw EncodingError(std::string(attack) + ": inputs were produced by different encoders");
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  if (m == 0) throw Error("median of empty vector");
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gen-LRA
// ---------------------------------------------------------------------------

struct GenLraOptions {
  /// Refit the bandwidth on R u {x*} instead of reusing R's. The default
  /// reuses R's bandwidth so the test point's kernel contribution is the
  /// only difference between the two surrogates, which also admits a
  /// closed-form update instead of a refit per test point.
  bool recompute_bandwidth = false;
};

/// Likelihood-ratio influence attack. For each test point x*:
///
///   score(x*) = sum over the k nearest synthetic rows s of
///               log p(s | R u {x*}) - log p(s | R)
///
/// where p is a Gaussian KDE with Silverman bandwidth fit once on the
/// reference sample. A positive score means adding x* to the reference fit
/// raises the estimated likelihood of the synthetic data near x*, the
/// signature of local overfitting to x*.
inline AttackScores gen_lra(const EncodedMatrix& synthetic, const EncodedMatrix& reference,
                            const EncodedMatrix& test, std::size_t k,
                            const GenLraOptions& options = {}) {
  detail::require_same_encoder(synthetic, reference, "gen_lra");
  detail::require_same_encoder(synthetic, test, "gen_lra");
  if (reference.values.rows() < 2) throw Error("gen_lra: need |R| >= 2");
  if (k == 0 || k > synthetic.values.rows())
    throw Error("gen_lra: k must be in [1, |S|], got " + std::to_string(k));

  const Matrix& S = synthetic.values;
  const KdeModel base = KdeModel::fit(reference.values);
  const std::vector<double> base_logpdf = base.logpdf(S);

  AttackScores out;
  out.attack = AttackId::gen_lra;
  out.params = {{"k", k}, {"recompute_bandwidth", options.recompute_bandwidth}};
  out.scores.resize(test.values.rows());

  for (std::size_t i = 0; i < test.values.rows(); ++i) {
    const auto x = test.values.row(i);
    const NeighborResult close = knn(x, S, k);
    double score = 0.0;
    if (options.recompute_bandwidth) {
      Matrix augmented = reference.values;
      augmented.append_row(x);
      const KdeModel refit = KdeModel::fit(std::move(augmented));
      for (std::size_t idx : close.indices)
        score += refit.logpdf_one(S.row(idx)) - base_logpdf[idx];
    } else {
      for (std::size_t idx : close.indices)
        score += base.logpdf_augmented_one(x, S.row(idx), base_logpdf[idx]) - base_logpdf[idx];
    }
    out.scores[i] = score;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Density-ratio attack: score = log p_S(x*) - log p_R(x*), each density a
/// Gaussian KDE with Silverman bandwidth (monotone-equivalent to the ratio).
inline AttackScores domias(const EncodedMatrix& synthetic, const EncodedMatrix& reference,
                           const EncodedMatrix& test) {
  detail::require_same_encoder(synthetic, reference, "domias");
  detail::require_same_encoder(synthetic, test, "domias");
  if (synthetic.values.rows() < 2 || reference.values.rows() < 2)
    throw Error("domias: need |S| >= 2 and |R| >= 2");

  const KdeModel kde_s = KdeModel::fit(synthetic.values);
  const KdeModel kde_r = KdeModel::fit(reference.values);
  const std::vector<double> ls = kde_s.logpdf(test.values);
  const std::vector<double> lr = kde_r.logpdf(test.values);

  AttackScores out;
  out.attack = AttackId::domias;
  out.scores.resize(test.values.rows());
  for (std::size_t i = 0; i < out.scores.size(); ++i) out.scores[i] = ls[i] - lr[i];
  return out;
}

/// Distance to closest synthetic record, negated so larger = member. Any
/// strictly monotone transform (e.g. the original sigmoid) yields identical
/// ranking metrics.
inline AttackScores dcr(const EncodedMatrix& synthetic, const EncodedMatrix& test) {
  detail::require_same_encoder(synthetic, test, "dcr");
  AttackScores out;
  out.attack = AttackId::dcr;
  out.scores.resize(test.values.rows());
  for (std::size_t i = 0; i < out.scores.size(); ++i)
    out.scores[i] = -nearest_distance(test.values.row(i), synthetic.values);
  return out;
}

/// Reference-calibrated DCR: distance to the nearest reference record minus
/// distance to the nearest synthetic record (larger = member).
inline AttackScores dcr_diff(const EncodedMatrix& synthetic, const EncodedMatrix& reference,
                             const EncodedMatrix& test) {
  detail::require_same_encoder(synthetic, reference, "dcr_diff");
  detail::require_same_encoder(synthetic, test, "dcr_diff");
  AttackScores out;
  out.attack = AttackId::dcr_diff;
  out.scores.resize(test.values.rows());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    const auto x = test.values.row(i);
    out.scores[i] = nearest_distance(x, reference.values) - nearest_distance(x, synthetic.values);
  }
  return out;
}

/// Neighborhood-count attack: fraction of synthetic rows within `radius` of
/// the test point. The default radius is the median nearest-synthetic
/// distance over the test batch (scale-adaptive; the neighborhood size is
/// otherwise a free hyperparameter).
inline AttackScores mc(const EncodedMatrix& synthetic, const EncodedMatrix& test,
                       std::optional<double> radius = std::nullopt) {
  detail::require_same_encoder(synthetic, test, "mc");
  const Matrix& S = synthetic.values;
  double r;
  if (radius.has_value()) {
    if (!(*radius > 0.0)) throw Error("mc: radius must be positive");
    r = *radius;
  } else {
    std::vector<double> nearest(test.values.rows());
    for (std::size_t i = 0; i < nearest.size(); ++i)
      nearest[i] = nearest_distance(test.values.row(i), S);
    r = detail::median_of(std::move(nearest));
  }

  AttackScores out;
  out.attack = AttackId::mc;
  out.params = {{"radius", r}};
  out.scores.resize(test.values.rows());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    const auto x = test.values.row(i);
    std::size_t inside = 0;
    for (std::size_t s = 0; s < S.rows(); ++s) {
      double acc = 0.0;
      for (std::size_t j = 0; j < S.cols(); ++j) {
        const double d = x[j] - S(s, j);
        acc += d * d;
      }
      if (std::sqrt(acc) <= r) ++inside;
    }
    out.scores[i] = static_cast<double>(inside) / static_cast<double>(S.rows());
  }
  return out;
}

/// k-NN class-ratio attack: among the k nearest rows of the stacked matrix
/// S then R, the fraction drawn from S. Index ties favor S because S rows
/// come first in the stack.
inline AttackScores dpi(const EncodedMatrix& synthetic, const EncodedMatrix& reference,
                        const EncodedMatrix& test, std::size_t k) {
  detail::require_same_encoder(synthetic, reference, "dpi");
  detail::require_same_encoder(synthetic, test, "dpi");
  if (k == 0) throw Error("dpi: k must be positive");
  const std::size_t n_s = synthetic.values.rows();
  const Matrix stacked = vstack(synthetic.values, reference.values);
  if (k > stacked.rows()) throw Error("dpi: k exceeds |S| + |R|");

  AttackScores out;
  out.attack = AttackId::dpi;
  out.params = {{"k", k}};
  out.scores.resize(test.values.rows());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    const NeighborResult nn = knn(test.values.row(i), stacked, k);
    std::size_t from_s = 0;
    for (std::size_t idx : nn.indices)
      if (idx < n_s) ++from_s;
    out.scores[i] = static_cast<double>(from_s) / static_cast<double>(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LOGAN (calibrated): synthetic-vs-reference classifier
// ---------------------------------------------------------------------------

struct LoganConfig {
  std::size_t iterations = 500;
  double step = 0.1;
  double l2 = 1e-3;
};

/// Trains an L2-regularized logistic regression to separate synthetic
/// (label 1) from reference (label 0) rows by full-batch gradient descent
/// from zero weights, then scores test points by predicted probability.
/// Deterministic given the config; a fixed iteration budget, so
/// non-convergence is not an error.
inline AttackScores logan(const EncodedMatrix& synthetic, const EncodedMatrix& reference,
                          const EncodedMatrix& test, const LoganConfig& config = {}) {
  detail::require_same_encoder(synthetic, reference, "logan");
  detail::require_same_encoder(synthetic, test, "logan");
  if (synthetic.values.rows() == 0 || reference.values.rows() == 0)
    throw Error("logan: training input is single-class (one of S, R is empty)");

  const Matrix train = vstack(synthetic.values, reference.values);
  const std::size_t m = train.rows();
  const std::size_t d = train.cols();
  const std::size_t n_s = synthetic.values.rows();

  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> grad(d);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * train(i, j);
      const double err = sigmoid(z) - (i < n_s ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * train(i, j);
      grad_b += err;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < d; ++j)
      w[j] -= config.step * (grad[j] * inv_m + config.l2 * w[j]);
    b -= config.step * grad_b * inv_m;
  }

  AttackScores out;
  out.attack = AttackId::logan;
  out.params = {{"iterations", config.iterations}, {"step", config.step}, {"l2", config.l2}};
  out.scores.resize(test.values.rows());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * test.values(i, j);
    out.scores[i] = sigmoid(z);
  }
  return out;
}

}  // namespace synaudit
