#pragma once

// Shared test helpers: random instance generators and the independent
// oracles the implementation is checked against. Everything here computes
// by a different route than the library (direct summation, naive refits,
// all-pairs counting) and must stay that way.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "synaudit/common.hpp"
#include "synaudit/dataset.hpp"
#include "synaudit/density.hpp"
#include "synaudit/eval.hpp"

namespace testutil {

using synaudit::Bandwidth;
using synaudit::Matrix;
using synaudit::Rng;

inline Matrix random_matrix(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
  return m;
}

// ---------------------------------------------------------------------------
// KDE oracles: naive double-loop direct summation, no log-sum-exp.
// ---------------------------------------------------------------------------

inline double kde_logpdf_direct(const Matrix& support, const Bandwidth& bw,
                                std::span<const double> q) {
  const std::size_t n = support.rows();
  const std::size_t d = support.cols();
  double norm = 1.0;
  for (std::size_t j = 0; j < d; ++j)
    norm *= std::sqrt(2.0 * 3.14159265358979323846) * bw.per_dim[j];
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double e = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = q[j] - support(k, j);
      e += diff * diff / (2.0 * bw.per_dim[j] * bw.per_dim[j]);
    }
    acc += std::exp(-e) / norm;
  }
  return std::log(acc / static_cast<double>(n));
}

/// Refit oracle for the augmented evaluator: rebuild the support with the
/// extra point appended, same bandwidth, and evaluate directly.
inline double kde_logpdf_refit(const Matrix& support, const Bandwidth& bw,
                               std::span<const double> extra, std::span<const double> q) {
  Matrix augmented = support;
  augmented.append_row(extra);
  return kde_logpdf_direct(augmented, bw, q);
}

// ---------------------------------------------------------------------------
// Gen-LRA oracle: Algorithm-by-the-book evaluation with naive refits and a
// brute-force neighbor sort (shared bandwidth semantics).
// ---------------------------------------------------------------------------

inline std::vector<double> gen_lra_oracle(const Matrix& S, const Matrix& R, const Matrix& X,
                                          std::size_t k) {
  const Bandwidth bw = synaudit::silverman_bandwidth(R);
  std::vector<double> scores(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    // Brute-force k nearest rows of S, stable sort, tie by index.
    std::vector<std::pair<double, std::size_t>> order(S.rows());
    for (std::size_t s = 0; s < S.rows(); ++s) {
      double acc = 0.0;
      for (std::size_t j = 0; j < S.cols(); ++j) {
        const double diff = x[j] - S(s, j);
        acc += diff * diff;
      }
      order[s] = {acc, s};
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double score = 0.0;
    for (std::size_t t = 0; t < std::min(k, S.rows()); ++t) {
      const auto s_row = S.row(order[t].second);
      score += kde_logpdf_refit(R, bw, x, s_row) - kde_logpdf_direct(R, bw, s_row);
    }
    scores[i] = score;
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Metric oracles
// ---------------------------------------------------------------------------

/// All-pairs concordance count; the final ratio uses the same integer
/// numerator/denominator convention the midrank identity reduces to.
inline double auc_all_pairs(const synaudit::LabeledScores& data) {
  long long concordant2 = 0;  // 2*concordant + ties, kept integral
  long long pairs = 0;
  for (std::size_t i = 0; i < data.scores.size(); ++i) {
    if (!data.labels[i]) continue;
    for (std::size_t j = 0; j < data.scores.size(); ++j) {
      if (data.labels[j]) continue;
      ++pairs;
      if (data.scores[i] > data.scores[j]) concordant2 += 2;
      else if (data.scores[i] == data.scores[j]) concordant2 += 1;
    }
  }
  return static_cast<double>(concordant2) / (2.0 * static_cast<double>(pairs));
}

/// Threshold-enumeration oracle for TPR at a fixed FPR level: try every
/// candidate threshold (all distinct scores), keep those with FPR <= level,
/// and among them take the smallest threshold.
inline double tpr_at_fpr_enumeration(const synaudit::LabeledScores& data, double level) {
  std::vector<double> candidates = data.scores;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double m1 = 0, m0 = 0;
  for (auto b : data.labels) (b ? m1 : m0) += 1;

  for (double gamma : candidates) {
    double fp = 0, tp = 0;
    for (std::size_t i = 0; i < data.scores.size(); ++i) {
      if (data.scores[i] > gamma) {
        if (data.labels[i]) tp += 1;
        else fp += 1;
      }
    }
    if (fp / m0 <= level) return tp / m1;  // smallest feasible threshold
  }
  return 0.0;
}

inline synaudit::LabeledScores random_labeled_scores(Rng& rng, std::size_t max_m,
                                                     bool inject_ties) {
  synaudit::LabeledScores data;
  const std::size_t m = 2 + rng.below(max_m - 1);
  data.scores.resize(m);
  data.labels.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    data.scores[i] = inject_ties ? std::floor(rng.normal() * 4.0) / 4.0 : rng.normal();
    data.labels[i] = rng.uniform() < 0.5 ? 1 : 0;
  }
  // Both classes must be present.
  data.labels[0] = 1;
  data.labels[m - 1] = 0;
  return data;
}

}  // namespace testutil
