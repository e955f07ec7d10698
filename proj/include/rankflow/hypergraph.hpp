/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file hypergraph.hpp
 *  \brief Rank-based hypergraph: incidence, h-embeddings, hyperedge weights
 *  and the iterative affinity re-ranking.
 *
 *  Every object i owns a hyperedge e_i holding its k nearest neighbors and
 *  their k nearest neighbors. Membership scores accumulate the log position
 *  weights along each two-step path i -> x -> j. Squaring the incidence
 *  matrix filters members that other hyperedges do not corroborate; rows of
 *  the square are the h-embeddings.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rankflow/rank_core.hpp"

namespace rankflow {

struct HypergraphState {
  SparseScoreMatrix incidence;    // H_m, one row per hyperedge
  SparseScoreMatrix embeddings;   // H = H_m * H_m, rows are h-embeddings
  std::vector<double> edge_weights;
  std::size_t k = 0;

  std::size_t size() const noexcept { return incidence.rows(); }

  friend bool operator==(const HypergraphState&, const HypergraphState&) = default;
};

/// 1 - log_k(rank): 1 at the first position, 0 at position k.
inline double position_weight(std::size_t rank, std::size_t k) {
  if (k < 2) fail(ErrorKind::Configuration, "position weight needs k >= 2 (log base)");
  if (rank < 1 || rank > k) {
    fail(ErrorKind::InvalidInput, "position " + std::to_string(rank) + " outside [1, " +
                                      std::to_string(k) + "]");
  }
  return 1.0 - std::log(static_cast<double>(rank)) / std::log(static_cast<double>(k));
}

namespace detail {
inline std::vector<double> position_weight_table(std::size_t k) {
  std::vector<double> table(k + 1, 0.0);
  for (std::size_t p = 1; p <= k; ++p) table[p] = position_weight(p, k);
  return table;
}

/// Row i of `a * b` for every i, accumulated in (a-column, b-column) order.
inline SparseScoreMatrix multiply(const SparseScoreMatrix& a, const SparseScoreMatrix& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::DimensionMismatch, "sparse product shape mismatch");
  SparseScoreMatrix out(a.rows(), b.cols());
  std::vector<std::vector<SparseEntry>> rows(a.rows());
  parallel_chunks(a.rows(), [&](std::size_t begin, std::size_t end) {
    RowAccumulator acc(b.cols());
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& [x, ax] : a.row(i))
        for (const auto& [j, bj] : b.row(x)) acc.add(j, ax * bj);
      rows[i] = acc.take();
    }
  });
  for (std::size_t i = 0; i < rows.size(); ++i) out.set_row(i, std::move(rows[i]));
  return out;
}
}  // namespace detail

/// H_m(i, j) = sum over x in N(i,k) with j in N(x,k) of w_p(i,x) * w_p(x,j).
/// Neighborhoods shorter than k (short lists) use what is available.
inline SparseScoreMatrix build_incidence(const RankedListSet& lists, std::size_t k) {
  if (k < 2) fail(ErrorKind::Configuration, "hypergraph neighborhood size k must be >= 2");
  const std::size_t n = lists.n;
  const auto weight = detail::position_weight_table(k);
  SparseScoreMatrix incidence(n);
  std::vector<std::vector<SparseEntry>> rows(n);
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    RowAccumulator acc(n);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& first = lists.lists[i].entries;
      const std::size_t kx = std::min(k, first.size());
      for (std::size_t px = 0; px < kx; ++px) {
        const double wx = weight[px + 1];
        const auto& second = lists.lists[first[px].object].entries;
        const std::size_t kj = std::min(k, second.size());
        for (std::size_t pj = 0; pj < kj; ++pj) acc.add(second[pj].object, wx * weight[pj + 1]);
      }
      rows[i] = acc.take();
    }
  });
  for (std::size_t i = 0; i < n; ++i) incidence.set_row(i, std::move(rows[i]));
  return incidence;
}

/// H = H_m^2.
inline SparseScoreMatrix filter_incidence(const SparseScoreMatrix& incidence) {
  if (!incidence.square()) fail(ErrorKind::DimensionMismatch, "incidence matrix must be square");
  return detail::multiply(incidence, incidence);
}

/// w(e_i): sum of the k largest values of row i (all of them when fewer).
inline std::vector<double> hyperedge_weights(const SparseScoreMatrix& embeddings, std::size_t k) {
  if (k < 1) fail(ErrorKind::Configuration, "hyperedge weight needs k >= 1");
  std::vector<double> weights(embeddings.rows(), 0.0);
  parallel_for(embeddings.rows(), [&](std::size_t i) {
    std::vector<double> values;
    values.reserve(embeddings.row(i).size());
    for (const auto& e : embeddings.row(i)) values.push_back(e.value);
    std::sort(values.begin(), values.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t p = 0; p < std::min(k, values.size()); ++p) sum += values[p];
    weights[i] = sum;
  });
  return weights;
}

inline HypergraphState f_h(const RankedListSet& lists, std::size_t k) {
  HypergraphState state;
  state.k = k;
  state.incidence = build_incidence(lists, k);
  state.embeddings = filter_incidence(state.incidence);
  state.edge_weights = hyperedge_weights(state.embeddings, k);
  return state;
}

/// Full A = H * H^T. Symmetric bit-for-bit: both triangles sum the same
/// products in ascending shared-column order.
inline SparseScoreMatrix affinity(const SparseScoreMatrix& embeddings) {
  return detail::multiply(embeddings, embeddings.transposed());
}

/// a_ij restricted to pairs (i, j in list i), as (column-sorted) sparse rows.
inline SparseScoreMatrix affinity_on_lists(const SparseScoreMatrix& embeddings, const RankedListSet& lists) {
  const std::size_t n = lists.n;
  if (embeddings.rows() != n) fail(ErrorKind::DimensionMismatch, "embeddings and lists disagree on n");
  SparseScoreMatrix out(n);
  std::vector<std::vector<SparseEntry>> rows(n);
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dense(embeddings.cols(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& e : embeddings.row(i)) dense[e.column] = e.value;
      auto& row = rows[i];
      for (const auto& entry : lists.lists[i].entries) {
        double dot = 0.0;
        for (const auto& e : embeddings.row(entry.object)) dot += dense[e.column] * e.value;
        if (dot > 0.0) row.push_back({entry.object, dot});
      }
      for (const auto& e : embeddings.row(i)) dense[e.column] = 0.0;
      std::sort(row.begin(), row.end(),
                [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
    }
  });
  for (std::size_t i = 0; i < n; ++i) out.set_row(i, std::move(rows[i]));
  return out;
}

/// rho_h(i, j) = a_ij / tau_i(j) for every j in the current top-L of i.
inline SparseScoreMatrix hypergraph_scores(const SparseScoreMatrix& embeddings, const RankedListSet& lists) {
  const auto affinities = affinity_on_lists(embeddings, lists);
  SparseScoreMatrix scores(lists.n);
  for (std::size_t i = 0; i < lists.n; ++i) {
    const auto& entries = lists.lists[i].entries;
    std::vector<SparseEntry> row;
    row.reserve(entries.size());
    for (std::size_t p = 0; p < entries.size(); ++p) {
      const double a = affinities.at(i, entries[p].object);
      if (a > 0.0) row.push_back({entries[p].object, a / static_cast<double>(p + 1)});
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
    scores.set_row(i, std::move(row));
  }
  return scores;
}

/// T rounds of {f_h, affinity, rho_h, stable re-sort}; returns the refined
/// lists and the hypergraph rebuilt from them.
inline std::pair<RankedListSet, HypergraphState> hypergraph_rerank(const RankedListSet& lists, std::size_t k,
                                                                   std::size_t iterations) {
  if (iterations < 1) fail(ErrorKind::Configuration, "iterations T must be >= 1");
  RankedListSet current = lists;
  for (std::size_t t = 0; t < iterations; ++t) {
    const auto state = f_h(current, k);
    current = stable_resort(current, hypergraph_scores(state.embeddings, current));
  }
  auto state = f_h(current, k);
  return {std::move(current), std::move(state)};
}

}  // namespace rankflow
