#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace synaudit {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// CSV ingestion failures. The kind distinguishes the failure classes that
/// callers may want to branch on.
class IngestError : public Error {
 public:
  enum class Kind { missing_file, empty_input, ragged_row, parse, schema };

  IngestError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Thrown by split_disjoint when 3n exceeds the available rows.
class InsufficientRows : public Error {
 public:
  using Error::Error;
};

/// Encoder fitting/application failures (schema mismatch, unseen category,
/// no retained dimensions).
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// A zero-variance dimension reached a bandwidth computation.
class DegenerateDimension : public Error {
 public:
  using Error::Error;
};

/// Matrix/vector dimensions do not agree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration is malformed. Messages carry a JSON-path style
/// location, e.g. "/attacks/0/k".
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Metric preconditions violated (e.g. single-class labels for AUC).
class EvalError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense row-major matrix of doubles. Value type: copies are deep and cheap
/// at the scales this toolkit runs at (n <= a few thousand).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw DimensionMismatch("from_rows: ragged input at row " + std::to_string(i));
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_)
      throw DimensionMismatch("append_row: expected " + std::to_string(cols_) +
                              " values, got " + std::to_string(values.size()));
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Rows of `top` followed by rows of `bottom`. Column counts must agree.
inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.empty()) return bottom;
  if (bottom.empty()) return top;
  if (top.cols() != bottom.cols())
    throw DimensionMismatch("vstack: column counts differ");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  for (std::size_t i = 0; i < top.rows(); ++i)
    for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
  for (std::size_t i = 0; i < bottom.rows(); ++i)
    for (std::size_t j = 0; j < top.cols(); ++j) out(top.rows() + i, j) = bottom(i, j);
  return out;
}

/// Mean and population standard deviation (divide by n) of one column.
struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;
};

inline ColumnStats column_stats(const Matrix& m, std::size_t j) {
  const std::size_t n = m.rows();
  if (n == 0) return {};
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += m(i, j);
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = m(i, j) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

// ---------------------------------------------------------------------------
// Hashing & PRNG
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit over bytes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// splitmix64 finalizer; used to spread seeds and derive sub-streams.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Project-wide deterministic PRNG.
///
/// Every module that takes a seed draws from this generator: a Mersenne
/// Twister (std::mt19937_64, fully specified by the standard) seeded through
/// splitmix64, with explicit distribution transforms so the stream does not
/// depend on the standard library's distribution implementations:
///   - uniform(): 53-bit mantissa draw in [0, 1)
///   - normal():  Box-Muller, two uniforms per variate, no caching
///   - below(b):  rejection-corrected modulo (unbiased)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::size_t below(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t threshold = (0 - b) % b;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return static_cast<std::size_t>(x % b);
    }
  }

  /// Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Derive an independent sub-stream seed from (seed, label, extra).
  static std::uint64_t derive(std::uint64_t seed, std::string_view label,
                              std::uint64_t extra = 0) {
    std::uint64_t h = splitmix64(seed ^ fnv1a64(label));
    return splitmix64(h ^ extra);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace synaudit
