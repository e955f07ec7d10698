/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file features.hpp
 *  \brief Feature tables and exhaustive distance computation.
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rankflow/rank_core.hpp"

namespace rankflow {

struct FeatureTable {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> values;     // row-major
  std::vector<std::string> ids;   // empty, or one unique identifier per row

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dims, dims}; }

  /// Identifier of row i; the row number when the table carries none.
  std::string id(std::size_t i) const { return ids.empty() ? std::to_string(i) : ids[i]; }

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

enum class DistanceMetric { Euclidean, Cosine };

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

/// Distances from each row of `queries` to every row of `collection`.
/// Self-distances of the same table are exactly zero for both metrics.
inline std::vector<DistanceRow> compute_distances(const FeatureTable& queries, const FeatureTable& collection,
                                                  DistanceMetric metric) {
  if (queries.dims != collection.dims) {
    fail(ErrorKind::DimensionMismatch, "query and collection features differ in dimension");
  }
  std::vector<double> query_norms(queries.rows), collection_norms(collection.rows);
  if (metric == DistanceMetric::Cosine) {
    auto norms = [](const FeatureTable& t, std::vector<double>& out) {
      for (std::size_t i = 0; i < t.rows; ++i) {
        double s = 0.0;
        for (double v : t.row(i)) s += v * v;
        out[i] = std::sqrt(s);
        if (out[i] == 0.0) {
          fail(ErrorKind::InvalidInput, "row " + std::to_string(i) + " has zero norm; cosine distance undefined");
        }
      }
    };
    norms(queries, query_norms);
    norms(collection, collection_norms);
  }
  const bool same_table = &queries == &collection;
  std::vector<DistanceRow> out(queries.rows);
  parallel_for(queries.rows, [&](std::size_t q) {
    auto& row = out[q];
    row.reserve(collection.rows);
    const auto a = queries.row(q);
    for (std::size_t j = 0; j < collection.rows; ++j) {
      double d = 0.0;
      if (!(same_table && j == q)) {
        const auto b = collection.row(j);
        if (metric == DistanceMetric::Euclidean) {
          d = euclidean_distance(a, b);
        } else {
          double dot = 0.0;
          for (std::size_t c = 0; c < a.size(); ++c) dot += a[c] * b[c];
          d = std::max(0.0, 1.0 - dot / (query_norms[q] * collection_norms[j]));
        }
      }
      row.emplace_back(static_cast<Index>(j), d);
    }
  });
  return out;
}

inline std::vector<DistanceRow> compute_distances(const FeatureTable& features, DistanceMetric metric) {
  return compute_distances(features, features, metric);
}

}  // namespace rankflow
