/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file normalize.hpp
 *  \brief Reciprocal sigmoid rank normalization and multi-ranker fusion.
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankflow/rank_core.hpp"

namespace rankflow {

struct SigmoidParams {
  double alpha = 0.1;
  std::size_t k = 20;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::Configuration, "alpha must be > 0");
    if (k < 2) fail(ErrorKind::Configuration, "sigmoid neighborhood size k must be >= 2");
  }
};

/// 1 - 1 / (1 + exp(-alpha * (position - k/2))). Centred on k/2, strictly
/// decreasing in position.
inline double sigmoid_weight(std::size_t position, const SigmoidParams& params) {
  const double shift = static_cast<double>(position) - static_cast<double>(params.k) / 2.0;
  return 1.0 - 1.0 / (1.0 + std::exp(-params.alpha * shift));
}

/// Scores every (i, j in top-L of i) pair with sigma(tau_i(j))^2 * sigma(tau_j(i))
/// and re-sorts. A reciprocal position outside top-L counts as L + 1.
inline std::pair<RankedListSet, SparseScoreMatrix> normalize(const RankedListSet& lists,
                                                             const SigmoidParams& params) {
  params.validate();
  const std::size_t n = lists.n;
  const PositionIndex positions(lists);
  const std::size_t missing = lists.depth + 1;

  // sigma depends only on the position; tabulate 1..L+1.
  std::vector<double> sigma(missing + 1, 0.0);
  for (std::size_t p = 1; p <= missing; ++p) sigma[p] = sigmoid_weight(p, params);

  SparseScoreMatrix scores(n);
  std::vector<std::vector<SparseEntry>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& entries = lists.lists[i].entries;
    auto& row = rows[i];
    row.reserve(entries.size());
    for (std::size_t p = 0; p < entries.size(); ++p) {
      const Index j = entries[p].object;
      std::size_t reciprocal = positions.position(j, static_cast<Index>(i));
      if (reciprocal == 0) reciprocal = missing;
      const double forward = sigma[p + 1];
      row.push_back({j, forward * forward * sigma[reciprocal]});
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
  });
  for (std::size_t i = 0; i < n; ++i) scores.set_row(i, std::move(rows[i]));
  return {stable_resort(lists, scores), std::move(scores)};
}

/// Normalizes each ranker independently, sums the scores into one matrix and
/// sorts each row's union of candidates by the summed score. Ties keep the
/// first ranker's normalized order, then later rankers' extra objects in input order.
inline std::pair<RankedListSet, SparseScoreMatrix> fuse_rankers(std::span<const RankedListSet> list_sets,
                                                                const SigmoidParams& params) {
  if (list_sets.empty()) fail(ErrorKind::InvalidInput, "rank fusion needs at least one ranker");
  const std::size_t n = list_sets.front().n;
  for (const auto& set : list_sets) {
    if (set.n != n) {
      fail(ErrorKind::DimensionMismatch, "rankers disagree on collection size (" + std::to_string(n) +
                                             " vs " + std::to_string(set.n) + ")");
    }
  }
  std::vector<RankedListSet> normalized;
  std::vector<SparseScoreMatrix> partial;
  normalized.reserve(list_sets.size());
  for (const auto& set : list_sets) {
    auto [lists, scores] = normalize(set, params);
    normalized.push_back(std::move(lists));
    partial.push_back(std::move(scores));
  }

  const std::size_t depth = list_sets.front().depth;
  SparseScoreMatrix fused(n);
  RankedListSet out{n, depth, std::vector<RankedList>(n)};
  std::vector<std::vector<SparseEntry>> rows(n);
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    RowAccumulator acc(n);
    std::vector<unsigned char> listed(n, 0);
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<Index> order;
      for (std::size_t r = 0; r < partial.size(); ++r) {
        for (const auto& e : partial[r].row(i)) acc.add(e.column, e.value);
        for (const auto& e : normalized[r].lists[i].entries) {
          if (!listed[e.object]) {
            listed[e.object] = 1;
            order.push_back(e.object);
          }
        }
      }
      for (Index j : order) listed[j] = 0;
      auto& list = out.lists[i];
      list.owner = static_cast<Index>(i);
      list.entries.reserve(order.size());
      for (Index j : order) list.entries.push_back({j, acc.value(j)});
      std::stable_sort(list.entries.begin(), list.entries.end(),
                       [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
      if (list.entries.size() > depth) list.entries.resize(depth);
      rows[i] = acc.take();
    }
  });
  for (std::size_t i = 0; i < n; ++i) fused.set_row(i, std::move(rows[i]));
  return {std::move(out), std::move(fused)};
}

}  // namespace rankflow
