/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file cartesian.hpp
 *  \brief Cartesian-product re-ranking: every pair of members inside a
 *  hyperedge e_q receives w(e_q) * h(q, i) * h(q, j), summed over hyperedges.
 *
 *  Members are the support of the incidence row; the scores h are read from
 *  the filtered embeddings.
 */

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "rankflow/hypergraph.hpp"

namespace rankflow {

namespace detail {
/// Embedding values masked to each hyperedge's members (row q = hyperedge q).
inline SparseScoreMatrix hyperedge_members(const HypergraphState& state) {
  const std::size_t n = state.size();
  SparseScoreMatrix members(n);
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<SparseEntry> row;
    row.reserve(state.incidence.row(q).size());
    for (const auto& e : state.incidence.row(q)) {
      const double h = state.embeddings.at(q, e.column);
      if (h > 0.0) row.push_back({e.column, h});
    }
    members.set_row(q, std::move(row));
  }
  return members;
}

/// Calls `emit(i, acc)` with row i of rho_c accumulated in `acc`; the
/// accumulator is cleared afterwards. Each cell sums w_q * (h_qi * h_qj) in
/// ascending q, so rho_c(i, j) and rho_c(j, i) are bit-identical.
template <typename EmitFn>
void for_each_cartesian_row(const HypergraphState& state, EmitFn&& emit) {
  const std::size_t n = state.size();
  const auto members = hyperedge_members(state);
  const auto by_member = members.transposed();
  parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    RowAccumulator acc(n);
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& [q, hi] : by_member.row(i)) {
        const double w = state.edge_weights[q];
        for (const auto& [j, hj] : members.row(q)) acc.add(j, w * (hi * hj));
      }
      emit(i, acc);
      acc.clear();
    }
  });
}
}  // namespace detail

/// p(e_q, v_i, v_j); zero when either vertex is not a member of e_q.
inline double pair_association(const HypergraphState& state, std::size_t q, std::size_t i, std::size_t j) {
  if (!state.incidence.contains(q, i) || !state.incidence.contains(q, j)) return 0.0;
  return state.edge_weights[q] * (state.embeddings.at(q, i) * state.embeddings.at(q, j));
}

/// Full rho_c matrix.
inline SparseScoreMatrix cartesian_scores(const HypergraphState& state) {
  const std::size_t n = state.size();
  std::vector<std::vector<SparseEntry>> rows(n);
  detail::for_each_cartesian_row(state, [&](std::size_t i, RowAccumulator& acc) { rows[i] = acc.take(); });
  SparseScoreMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) out.set_row(i, std::move(rows[i]));
  return out;
}

/// Re-sorts each top-L list by rho_c and rebuilds the hypergraph (H_c).
inline std::pair<RankedListSet, HypergraphState> cartesian_rerank(const HypergraphState& state,
                                                                  const RankedListSet& lists) {
  if (state.size() != lists.n) fail(ErrorKind::DimensionMismatch, "hypergraph and lists disagree on n");
  const std::size_t n = lists.n;
  std::vector<std::vector<SparseEntry>> rows(n);
  detail::for_each_cartesian_row(state, [&](std::size_t i, RowAccumulator& acc) {
    auto& row = rows[i];
    for (const auto& e : lists.lists[i].entries) {
      const double v = acc.value(e.object);
      if (v > 0.0) row.push_back({e.object, v});
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
  });
  SparseScoreMatrix scores(n);
  for (std::size_t i = 0; i < n; ++i) scores.set_row(i, std::move(rows[i]));
  auto reranked = stable_resort(lists, scores);
  auto rebuilt = f_h(reranked, state.k);
  return {std::move(reranked), std::move(rebuilt)};
}

}  // namespace rankflow
