/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file components.hpp
 *  \brief Confident graph over the hypergraph, connected components,
 *  cc-embeddings, object embeddings and the component re-ranking.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "rankflow/hypergraph.hpp"

namespace rankflow {

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index find(Index x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(Index a, Index b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<Index> parent_;
  std::vector<std::size_t> size_;
};

/// Unordered pair stored canonically (first < second).
struct CandidateEdge {
  Index first = 0;
  Index second = 0;
  double confidence = 0.0;

  friend bool operator==(const CandidateEdge&, const CandidateEdge&) = default;
};

struct ConfidentGraph {
  std::size_t n = 0;
  std::vector<CandidateEdge> edges;  // selected edges, by descending confidence
  double threshold = 0.0;
  std::size_t candidate_count = 0;
};

struct ComponentSet {
  std::vector<Index> assignment;              // object -> component id
  std::vector<std::vector<Index>> components; // members, ascending
  SparseScoreMatrix cc_embeddings;            // m x n, row q = sum of member h-rows

  std::size_t count() const noexcept { return components.size(); }
};

/// Factor applied to <e_i, e_j> in rho_e. `Inverted` exists for sensitivity
/// experiments only.
enum class RankFactor { Literal, Inverted };

/// Every {q, i} with i among the first k entries of list q, i != q; sorted, deduplicated.
inline std::vector<std::pair<Index, Index>> candidate_edges(const RankedListSet& lists, std::size_t k) {
  std::vector<std::pair<Index, Index>> pairs;
  for (std::size_t q = 0; q < lists.n; ++q) {
    const auto& entries = lists.lists[q].entries;
    const std::size_t len = std::min(k, entries.size());
    for (std::size_t p = 0; p < len; ++p) {
      const Index i = entries[p].object;
      if (i == q) continue;
      const Index a = std::min<Index>(static_cast<Index>(q), i);
      const Index b = std::max<Index>(static_cast<Index>(q), i);
      pairs.emplace_back(a, b);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

/// s_c(i, j) = <h_i, h_j> * w(e_i) * w(e_j).
inline double edge_confidence(const HypergraphState& state, Index i, Index j) {
  if (i >= state.size() || j >= state.size()) fail(ErrorKind::InvalidInput, "edge endpoint out of range");
  const Index a = std::min(i, j);
  const Index b = std::max(i, j);
  return sparse_dot(state.embeddings.row(a), state.embeddings.row(b)) *
         (state.edge_weights[a] * state.edge_weights[b]);
}

/// t_c = sum of hyperedge weights / (2n).
inline double edge_threshold(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) fail(ErrorKind::InvalidInput, "edge threshold needs n >= 1");
  double total = 0.0;
  for (double w : weights) total += w;
  return total / (2.0 * static_cast<double>(n));
}

inline double edge_threshold(const HypergraphState& state) { return edge_threshold(state.edge_weights); }

/// Which hyperedge weights feed t_c.
///
/// `Literal` uses w(e_i) as stored. Those weights grow roughly with k^3, so
/// for large k the cutoff exceeds the number of candidate edges and the graph
/// collapses into a single component. `ScaleFree` divides each weight by the
/// maximum of its h-row (the weight of the row scaled to unit maximum), which
/// bounds t_c by k/2 and makes it invariant to rescaling H.
enum class ThresholdMode { ScaleFree, Literal };

inline std::vector<double> scale_free_weights(const HypergraphState& state) {
  std::vector<double> out(state.size(), 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) {
    double peak = 0.0;
    for (const auto& e : state.embeddings.row(i)) peak = std::max(peak, e.value);
    if (peak > 0.0) out[i] = state.edge_weights[i] / peak;
  }
  return out;
}

/// Ranks edges by confidence (ties keep the incoming order) and keeps those
/// whose 1-based rank position is strictly below `threshold`.
inline std::vector<CandidateEdge> select_edges(std::vector<CandidateEdge> ranked, double threshold) {
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const CandidateEdge& a, const CandidateEdge& b) { return a.confidence > b.confidence; });
  std::size_t keep = 0;
  if (threshold > 1.0) {
    const double below = std::ceil(threshold) - 1.0;
    keep = below >= static_cast<double>(ranked.size()) ? ranked.size() : static_cast<std::size_t>(below);
  }
  ranked.resize(keep);
  return ranked;
}

/// Candidate edges scored by s_c in canonical pair order, cut at t_c.
inline ConfidentGraph f_g(const HypergraphState& state, const RankedListSet& lists, std::size_t k,
                          ThresholdMode mode = ThresholdMode::ScaleFree) {
  if (state.size() != lists.n) fail(ErrorKind::DimensionMismatch, "hypergraph and lists disagree on n");
  const auto pairs = candidate_edges(lists, k);
  std::vector<CandidateEdge> ranked(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t e) {
    ranked[e] = {pairs[e].first, pairs[e].second, edge_confidence(state, pairs[e].first, pairs[e].second)};
  });

  ConfidentGraph graph;
  graph.n = lists.n;
  graph.threshold = mode == ThresholdMode::Literal ? edge_threshold(state)
                                                  : edge_threshold(scale_free_weights(state));
  graph.candidate_count = ranked.size();
  graph.edges = select_edges(std::move(ranked), graph.threshold);
  return graph;
}

/// Components numbered by their smallest member; no embeddings attached.
inline ComponentSet connected_components(const ConfidentGraph& graph) {
  UnionFind uf(graph.n);
  for (const auto& e : graph.edges) {
    if (e.first >= graph.n || e.second >= graph.n) fail(ErrorKind::InvalidInput, "edge endpoint out of range");
    uf.unite(e.first, e.second);
  }
  ComponentSet out;
  out.assignment.assign(graph.n, 0);
  std::vector<Index> id_of_root(graph.n, static_cast<Index>(-1));
  for (Index v = 0; v < graph.n; ++v) {
    const Index root = uf.find(v);
    if (id_of_root[root] == static_cast<Index>(-1)) {
      id_of_root[root] = static_cast<Index>(out.components.size());
      out.components.emplace_back();
    }
    out.assignment[v] = id_of_root[root];
    out.components[id_of_root[root]].push_back(v);
  }
  return out;
}

/// c_q = sum of the h-rows of the members of component q.
inline SparseScoreMatrix cc_embeddings(const ComponentSet& components, const SparseScoreMatrix& embeddings) {
  const std::size_t m = components.count();
  SparseScoreMatrix out(m, embeddings.cols());
  std::vector<std::vector<SparseEntry>> rows(m);
  parallel_chunks(m, [&](std::size_t begin, std::size_t end) {
    RowAccumulator acc(embeddings.cols());
    for (std::size_t q = begin; q < end; ++q) {
      for (Index member : components.components[q])
        for (const auto& e : embeddings.row(member)) acc.add(e.column, e.value);
      rows[q] = acc.take();
    }
  });
  for (std::size_t q = 0; q < m; ++q) out.set_row(q, std::move(rows[q]));
  return out;
}

/// e_q[i] = <h_q, c_i>, one dense row per object.
inline DenseMatrix object_embeddings(const SparseScoreMatrix& embeddings, const SparseScoreMatrix& cc) {
  if (embeddings.cols() != cc.cols()) fail(ErrorKind::DimensionMismatch, "h-rows and cc-embeddings differ in width");
  const auto by_column = cc.transposed();
  DenseMatrix out(embeddings.rows(), cc.rows());
  parallel_for(embeddings.rows(), [&](std::size_t q) {
    auto row = out.row(q);
    for (const auto& [col, h] : embeddings.row(q))
      for (const auto& [comp, c] : by_column.row(col)) row[comp] += h * c;
  });
  return out;
}

/// Graph, components and their embeddings for one hypergraph.
inline ComponentSet build_components(const HypergraphState& state, const RankedListSet& lists, std::size_t k,
                                     ThresholdMode mode = ThresholdMode::ScaleFree) {
  auto components = connected_components(f_g(state, lists, k, mode));
  components.cc_embeddings = cc_embeddings(components, state.embeddings);
  return components;
}

namespace detail {
inline double dense_dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

/// For each object, the (component, 1-based rank) pairs of every N_c(q, k)
/// containing it, in ascending component order.
inline std::vector<std::vector<std::pair<Index, std::size_t>>> component_neighborhoods(
    const SparseScoreMatrix& cc, std::size_t n, std::size_t k) {
  std::vector<std::vector<SparseEntry>> tops(cc.rows());
  parallel_for(cc.rows(), [&](std::size_t q) {
    const auto row = cc.row(q);
    std::vector<SparseEntry> sorted(row.begin(), row.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SparseEntry& a, const SparseEntry& b) { return a.value > b.value; });
    if (sorted.size() > k) sorted.resize(k);
    tops[q] = std::move(sorted);
  });
  std::vector<std::vector<std::pair<Index, std::size_t>>> membership(n);
  for (std::size_t q = 0; q < tops.size(); ++q)
    for (std::size_t p = 0; p < tops[q].size(); ++p)
      membership[tops[q][p].column].emplace_back(static_cast<Index>(q), p + 1);
  return membership;
}
}  // namespace detail

/// N_c(q, k): the k objects with the highest values in c_q (ties by object
/// index), in rank order.
inline std::vector<Index> component_neighborhood(const SparseScoreMatrix& cc, std::size_t q, std::size_t k) {
  const auto row = cc.row(q);
  std::vector<SparseEntry> sorted(row.begin(), row.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SparseEntry& a, const SparseEntry& b) { return a.value > b.value; });
  std::vector<Index> out;
  for (std::size_t p = 0; p < std::min(k, sorted.size()); ++p) out.push_back(sorted[p].column);
  return out;
}

/// rho_e(i, j) for j in the top-L of i:
///   sum over components q with i, j in N_c(q,k) of
///   (1 + sqrt(tau_cq(i)^2 + tau_cq(j)^2) * <e_i, e_j>) / tau_i(j).
inline SparseScoreMatrix cc_scores(const RankedListSet& lists, const ComponentSet& components,
                                   const DenseMatrix& embeddings, std::size_t k,
                                   RankFactor factor = RankFactor::Literal) {
  const std::size_t n = lists.n;
  if (embeddings.rows != n) fail(ErrorKind::DimensionMismatch, "object embeddings and lists disagree on n");
  const auto membership = detail::component_neighborhoods(components.cc_embeddings, n, k);
  std::vector<std::vector<SparseEntry>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& mine = membership[i];
    const auto& entries = lists.lists[i].entries;
    auto& row = rows[i];
    for (std::size_t p = 0; p < entries.size(); ++p) {
      const Index j = entries[p].object;
      const auto& theirs = membership[j];
      double sum = 0.0;
      double dot = -1.0;
      std::size_t a = 0, b = 0;
      while (a < mine.size() && b < theirs.size()) {
        if (mine[a].first < theirs[b].first) {
          ++a;
        } else if (theirs[b].first < mine[a].first) {
          ++b;
        } else {
          if (dot < 0.0) dot = detail::dense_dot(embeddings.row(i), embeddings.row(j));
          const double ti = static_cast<double>(mine[a].second);
          const double tj = static_cast<double>(theirs[b].second);
          double scale = std::sqrt(ti * ti + tj * tj);
          if (factor == RankFactor::Inverted) scale = 1.0 / scale;
          sum += 1.0 + scale * dot;
          ++a;
          ++b;
        }
      }
      if (sum > 0.0) row.push_back({j, sum / static_cast<double>(p + 1)});
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& x, const SparseEntry& y) { return x.column < y.column; });
  });
  SparseScoreMatrix scores(n);
  for (std::size_t i = 0; i < n; ++i) scores.set_row(i, std::move(rows[i]));
  return scores;
}

/// Re-sorts by rho_e and rebuilds the hypergraph (H_e).
inline std::pair<RankedListSet, HypergraphState> cc_rerank(const RankedListSet& lists,
                                                           const ComponentSet& components,
                                                           const DenseMatrix& embeddings, std::size_t k,
                                                           RankFactor factor = RankFactor::Literal) {
  if (k < 1) fail(ErrorKind::Configuration, "component neighborhood size k must be >= 1");
  auto reranked = stable_resort(lists, cc_scores(lists, components, embeddings, k, factor));
  auto rebuilt = f_h(reranked, std::max<std::size_t>(k, 2));
  return {std::move(reranked), std::move(rebuilt)};
}

struct ClassificationEmbeddings {
  ComponentSet components;
  DenseMatrix values;  // n x m_e
};

/// Components recomputed over H_e; row q holds <h_e_q, c_e_i> for every component i.
inline ClassificationEmbeddings classification_embeddings(const RankedListSet& lists,
                                                          const HypergraphState& state, std::size_t k,
                                                          bool l2_normalize = false,
                                                          ThresholdMode mode = ThresholdMode::ScaleFree) {
  ClassificationEmbeddings out;
  out.components = build_components(state, lists, k, mode);
  out.values = object_embeddings(state.embeddings, out.components.cc_embeddings);
  if (l2_normalize) {
    for (std::size_t q = 0; q < out.values.rows; ++q) {
      auto row = out.values.row(q);
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (double& v : row) v /= norm;
    }
  }
  return out;
}

}  // namespace rankflow
