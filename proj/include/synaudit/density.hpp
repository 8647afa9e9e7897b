#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "synaudit/common.hpp"

namespace synaudit {

namespace detail {

constexpr double kPi = 3.14159265358979323846;

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;  // both -inf
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bandwidth
// ---------------------------------------------------------------------------

/// Per-dimension Gaussian kernel bandwidths, all positive and finite.
struct Bandwidth {
  std::vector<double> per_dim;

  std::size_t dims() const { return per_dim.size(); }
};

/// Silverman's rule, multivariate form:
///   h_j = sigma_j * (4 / ((d + 2) * n))^(1 / (d + 4))
/// with population sigma_j. Reduces to the classic 1.06 sigma n^(-1/5) at
/// d = 1. A zero-variance column is an error; the encode stage is expected
/// to have dropped it.
inline Bandwidth silverman_bandwidth(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < 2) throw DegenerateDimension("silverman_bandwidth: need at least 2 points");
  const double factor =
      std::pow(4.0 / ((static_cast<double>(d) + 2.0) * static_cast<double>(n)),
               1.0 / (static_cast<double>(d) + 4.0));
  Bandwidth bw;
  bw.per_dim.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double sigma = column_stats(data, j).stddev;
    if (sigma == 0.0)
      throw DegenerateDimension("silverman_bandwidth: column " + std::to_string(j) +
                                " has zero variance");
    bw.per_dim[j] = sigma * factor;
  }
  return bw;
}

// ---------------------------------------------------------------------------
// KdeModel
// ---------------------------------------------------------------------------

/// Gaussian kernel density estimator with a diagonal bandwidth. The model
/// stores its support verbatim; evaluation is in log space throughout
/// (log-sum-exp), so results are always finite.
///
/// logpdf(q) = log( (1/n) sum_k prod_j (2 pi h_j^2)^(-1/2)
///                                 exp(-(q_j - s_kj)^2 / (2 h_j^2)) )
class KdeModel {
 public:
  /// Fit on data (n >= 1). When the bandwidth is omitted it is computed by
  /// silverman_bandwidth, which requires n >= 2.
  static KdeModel fit(Matrix data, std::optional<Bandwidth> bandwidth = std::nullopt) {
    if (data.rows() == 0) throw Error("kde_fit: no support points");
    KdeModel m;
    if (bandwidth.has_value()) {
      if (bandwidth->dims() != data.cols())
        throw DimensionMismatch("kde_fit: bandwidth dimension mismatch");
      for (double h : bandwidth->per_dim)
        if (!(h > 0.0) || !std::isfinite(h))
          throw Error("kde_fit: bandwidths must be positive and finite");
      m.bw_ = std::move(*bandwidth);
    } else {
      m.bw_ = silverman_bandwidth(data);
    }
    m.support_ = std::move(data);
    m.inv_two_h2_.resize(m.bw_.dims());
    m.log_kernel_norm_ = 0.5 * static_cast<double>(m.bw_.dims()) * std::log(2.0 * detail::kPi);
    for (std::size_t j = 0; j < m.bw_.dims(); ++j) {
      const double h = m.bw_.per_dim[j];
      m.inv_two_h2_[j] = 1.0 / (2.0 * h * h);
      m.log_kernel_norm_ += std::log(h);
    }
    m.log_norm_ = std::log(static_cast<double>(m.support_.rows())) + m.log_kernel_norm_;
    return m;
  }

  const Matrix& support() const { return support_; }
  const Bandwidth& bandwidth() const { return bw_; }

  /// log(n * (2 pi)^(d/2) * prod_j h_j)
  double log_norm() const { return log_norm_; }

  double logpdf_one(std::span<const double> q) const {
    check_dim(q.size());
    std::vector<double> exponents(support_.rows());
    return logpdf_into(q, exponents);
  }

  std::vector<double> logpdf(const Matrix& queries) const {
    check_dim(queries.cols());
    std::vector<double> exponents(support_.rows());
    std::vector<double> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i)
      out[i] = logpdf_into(queries.row(i), exponents);
    return out;
  }

  /// Density of the model refit on support + {extra} with the same
  /// bandwidth, evaluated without refitting:
  ///   log( (n * p(q) + K_h(q, extra)) / (n + 1) )
  double logpdf_augmented_one(std::span<const double> extra, std::span<const double> q) const {
    return logpdf_augmented_one(extra, q, logpdf_one(q));
  }

  /// Same, reusing a precomputed logpdf_one(q).
  double logpdf_augmented_one(std::span<const double> extra, std::span<const double> q,
                              double base_logpdf) const {
    check_dim(extra.size());
    check_dim(q.size());
    const double n = static_cast<double>(support_.rows());
    const double log_mass = std::log(n) + base_logpdf;
    const double log_kernel = exponent(q, extra) - log_kernel_norm_;
    return detail::log_add_exp(log_mass, log_kernel) - std::log(n + 1.0);
  }

  std::vector<double> logpdf_augmented(std::span<const double> extra,
                                       const Matrix& queries) const {
    check_dim(queries.cols());
    std::vector<double> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i)
      out[i] = logpdf_augmented_one(extra, queries.row(i));
    return out;
  }

 private:
  double logpdf_into(std::span<const double> q, std::vector<double>& exponents) const {
    for (std::size_t k = 0; k < support_.rows(); ++k)
      exponents[k] = exponent(q, support_.row(k));
    return detail::log_sum_exp(exponents) - log_norm_;
  }

  double exponent(std::span<const double> a, std::span<const double> b) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - b[j];
      acc -= d * d * inv_two_h2_[j];
    }
    return acc;
  }

  void check_dim(std::size_t d) const {
    if (d != support_.cols())
      throw DimensionMismatch("kde: query dimension " + std::to_string(d) +
                              " does not match model dimension " +
                              std::to_string(support_.cols()));
  }

  Matrix support_;
  Bandwidth bw_;
  std::vector<double> inv_two_h2_;
  double log_kernel_norm_ = 0.0;  // (d/2) log(2 pi) + sum_j log h_j
  double log_norm_ = 0.0;
};

}  // namespace synaudit
