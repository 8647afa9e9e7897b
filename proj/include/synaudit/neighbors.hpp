#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "synaudit/common.hpp"

namespace synaudit {

/// Distance on encoded features. Euclidean is the project default; the
/// metric is a parameter because no attack definition pins one down.
enum class Metric { euclidean, manhattan };

/// k smallest distances, ascending, ties broken by lower row index.
struct NeighborResult {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
};

namespace detail {

inline double distance_key(std::span<const double> a, std::span<const double> b, Metric metric) {
  double acc = 0.0;
  if (metric == Metric::euclidean) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - b[j];
      acc += d * d;
    }
  } else {
    for (std::size_t j = 0; j < a.size(); ++j) acc += std::abs(a[j] - b[j]);
  }
  return acc;  // squared for euclidean; callers convert
}

inline double key_to_distance(double key, Metric metric) {
  return metric == Metric::euclidean ? std::sqrt(key) : key;
}

}  // namespace detail

/// Exact k-nearest-neighbor query by full scan and partial selection.
/// Returns min(k, n) neighbors.
inline NeighborResult knn(std::span<const double> query, const Matrix& data, std::size_t k,
                          Metric metric = Metric::euclidean) {
  if (data.rows() == 0) throw Error("knn: empty data");
  if (query.size() != data.cols())
    throw DimensionMismatch("knn: query dimension does not match data");
  if (k == 0) throw Error("knn: k must be positive");

  const std::size_t n = data.rows();
  std::vector<std::pair<double, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i)
    keyed[i] = {detail::distance_key(query, data.row(i), metric), i};

  const std::size_t kk = std::min(k, n);
  std::partial_sort(keyed.begin(), keyed.begin() + kk, keyed.end());

  NeighborResult out;
  out.indices.resize(kk);
  out.distances.resize(kk);
  for (std::size_t i = 0; i < kk; ++i) {
    out.indices[i] = keyed[i].second;
    out.distances[i] = detail::key_to_distance(keyed[i].first, metric);
  }
  return out;
}

/// Distance to the nearest row, via a single linear scan.
inline double nearest_distance(std::span<const double> query, const Matrix& data,
                               Metric metric = Metric::euclidean) {
  if (data.rows() == 0) throw Error("nearest_distance: empty data");
  if (query.size() != data.cols())
    throw DimensionMismatch("nearest_distance: query dimension does not match data");
  double best = detail::distance_key(query, data.row(0), metric);
  for (std::size_t i = 1; i < data.rows(); ++i)
    best = std::min(best, detail::distance_key(query, data.row(i), metric));
  return detail::key_to_distance(best, metric);
}

}  // namespace synaudit
