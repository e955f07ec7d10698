/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file sparse.hpp
 *  \brief Row-sparse nonnegative score matrix and a dense-scratch row builder.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankflow/error.hpp"

namespace rankflow {

using Index = std::uint32_t;

struct SparseEntry {
  Index column = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Rows hold (column, value) pairs with strictly increasing columns and
/// values >= 0. Absent entries read as zero.
class SparseScoreMatrix {
 public:
  SparseScoreMatrix() = default;
  explicit SparseScoreMatrix(std::size_t n) : cols_(n), rows_(n) {}
  SparseScoreMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows) {}

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_.size() == cols_; }

  std::span<const SparseEntry> row(std::size_t i) const { return rows_.at(i); }

  void set_row(std::size_t i, std::vector<SparseEntry> entries) {
    if (i >= rows_.size()) {
      fail(ErrorKind::DimensionMismatch, "row " + std::to_string(i) + " out of range");
    }
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto& entry = entries[e];
      if (entry.column >= cols_) {
        fail(ErrorKind::InvalidInput, "column " + std::to_string(entry.column) + " out of range");
      }
      if (!(entry.value >= 0.0) || !std::isfinite(entry.value)) {
        fail(ErrorKind::InvalidInput, "score matrix values must be finite and nonnegative");
      }
      if (e > 0 && entries[e - 1].column >= entry.column) {
        fail(ErrorKind::InvalidInput, "row entries must have strictly increasing columns");
      }
    }
    rows_[i] = std::move(entries);
  }

  double at(std::size_t i, std::size_t j) const {
    const auto& r = rows_.at(i);
    auto it = std::lower_bound(r.begin(), r.end(), j,
                               [](const SparseEntry& e, std::size_t col) { return e.column < col; });
    return (it != r.end() && it->column == j) ? it->value : 0.0;
  }

  bool contains(std::size_t i, std::size_t j) const {
    const auto& r = rows_.at(i);
    return std::binary_search(r.begin(), r.end(), SparseEntry{static_cast<Index>(j), 0.0},
                              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
  }

  std::size_t nonzeros() const noexcept {
    std::size_t total = 0;
    for (const auto& r : rows_) total += r.size();
    return total;
  }

  /// Column-major view: for each column, the (row, value) pairs in ascending row order.
  SparseScoreMatrix transposed() const {
    SparseScoreMatrix t(cols_, rows_.size());
    std::vector<std::size_t> counts(cols_, 0);
    for (const auto& r : rows_)
      for (const auto& e : r) ++counts[e.column];
    for (std::size_t c = 0; c < cols_; ++c) t.rows_[c].reserve(counts[c]);
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& e : rows_[i]) t.rows_[e.column].push_back({static_cast<Index>(i), e.value});
    return t;
  }

  friend bool operator==(const SparseScoreMatrix&, const SparseScoreMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::vector<SparseEntry>> rows_;
};

/// Accumulates one sparse row into dense scratch. Columns are emitted in
/// ascending order; each cell is summed in the order `add` was called, so a
/// fixed call sequence gives bit-identical output.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t cols) : values_(cols, 0.0), seen_(cols, 0) {}

  void add(std::size_t column, double value) {
    if (!seen_[column]) {
      seen_[column] = 1;
      touched_.push_back(static_cast<Index>(column));
    }
    values_[column] += value;
  }

  double value(std::size_t column) const { return values_[column]; }
  bool touched(std::size_t column) const { return seen_[column] != 0; }

  /// Emits positive entries in ascending column order and resets the scratch.
  std::vector<SparseEntry> take() {
    std::sort(touched_.begin(), touched_.end());
    std::vector<SparseEntry> out;
    out.reserve(touched_.size());
    for (Index c : touched_) {
      if (values_[c] > 0.0) out.push_back({c, values_[c]});
    }
    clear();
    return out;
  }

  void clear() {
    for (Index c : touched_) {
      values_[c] = 0.0;
      seen_[c] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> values_;
  std::vector<unsigned char> seen_;
  std::vector<Index> touched_;
};

/// Dot product of two sorted sparse rows; terms summed in ascending column order.
inline double sparse_dot(std::span<const SparseEntry> a, std::span<const SparseEntry> b) {
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].column < b[j].column) {
      ++i;
    } else if (b[j].column < a[i].column) {
      ++j;
    } else {
      sum += a[i].value * b[j].value;
      ++i;
      ++j;
    }
  }
  return sum;
}

inline double sparse_norm(std::span<const SparseEntry> a) {
  double sum = 0.0;
  for (const auto& e : a) sum += e.value * e.value;
  return std::sqrt(sum);
}

/// Row-major dense matrix used for per-object embeddings.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

}  // namespace rankflow
