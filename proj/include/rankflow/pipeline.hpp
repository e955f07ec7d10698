/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file pipeline.hpp
 *  \brief The rank flow: normalization, hypergraph re-ranking, Cartesian
 *  product, connected components and classification embeddings, plus rank
 *  aggregation and the online path for unseen queries.
 */

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rankflow/cartesian.hpp"
#include "rankflow/components.hpp"
#include "rankflow/hypergraph.hpp"
#include "rankflow/normalize.hpp"

namespace rankflow {

struct RfeConfig {
  std::size_t k = 20;
  std::size_t depth = 0;  // L; 0 selects min(n, max(20k, 200))
  double alpha = 0.1;
  std::size_t iterations = 2;
  bool run_cc_stage = true;
  bool emit_embeddings = false;
  bool normalize_embeddings = false;
  RankFactor rank_factor = RankFactor::Literal;
  ThresholdMode threshold_mode = ThresholdMode::ScaleFree;

  /// Neighborhood sizes used for the public benchmarks: 60 for Flowers and
  /// Corel5k, 5 for Holidays and UKBench, 20 otherwise.
  static RfeConfig preset(std::string_view dataset) {
    RfeConfig config;
    std::string name(dataset);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "flowers" || name == "corel5k") {
      config.k = 60;
    } else if (name == "holidays" || name == "ukbench") {
      config.k = 5;
      config.run_cc_stage = false;  // small classes: steps 1-3 only
    }
    return config;
  }

  void validate() const {
    if (k < 2) fail(ErrorKind::Configuration, "k must be >= 2");
    if (depth != 0 && k > depth) {
      fail(ErrorKind::Configuration, "k=" + std::to_string(k) + " exceeds L=" + std::to_string(depth));
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::Configuration, "alpha must be > 0");
    if (iterations < 1) fail(ErrorKind::Configuration, "iterations T must be >= 1");
  }

  static std::size_t default_depth(std::size_t n, std::size_t k) {
    return std::min(n, std::max<std::size_t>(20 * k, 200));
  }

  /// Clamps L to the collection and k to L; k never drops below 2 (log base).
  RfeConfig resolved(std::size_t n) const {
    validate();
    RfeConfig out = *this;
    out.depth = std::max<std::size_t>(1, depth == 0 ? default_depth(n, k) : std::min(depth, n));
    out.k = std::max<std::size_t>(2, std::min(k, out.depth));
    return out;
  }

  /// As `resolved`, additionally capping L at the depth the input lists
  /// actually carry. k may only be clamped when the collection itself is
  /// smaller than k.
  RfeConfig resolved_for(const RankedListSet& lists) const {
    RfeConfig out = resolved(lists.n);
    if (lists.depth < out.depth) out.depth = std::max<std::size_t>(1, lists.depth);
    if (out.k > out.depth) {
      if (out.depth < lists.n && out.depth >= 2) {
        fail(ErrorKind::Configuration, "k=" + std::to_string(out.k) + " exceeds the input lists' depth L=" +
                                           std::to_string(out.depth));
      }
      out.k = std::max<std::size_t>(2, out.depth);
    }
    return out;
  }

  friend bool operator==(const RfeConfig&, const RfeConfig&) = default;
};

/// Everything the online path needs from the offline run.
struct RfeIndex {
  RfeConfig config;  // resolved
  RankedListSet lists;
  HypergraphState state;
  std::optional<DenseMatrix> embeddings;

  std::size_t size() const noexcept { return lists.n; }

  friend bool operator==(const RfeIndex&, const RfeIndex&) = default;
};

struct StageOutput {
  std::string name;
  RankedListSet lists;
};

struct RfeResult {
  RankedListSet lists;
  RfeIndex index;
  std::vector<StageOutput> stages;  // normalize, hypergraph, cartesian[, components]
};

namespace detail {
template <typename Fn>
auto run_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
  }
}

/// Re-sorting only permutes entries, so a list's depth never grows; clamp the
/// declared depth to the resolved L.
inline RankedListSet truncated(const RankedListSet& lists, std::size_t depth) {
  RankedListSet out = lists;
  out.depth = depth;
  for (auto& list : out.lists)
    if (list.entries.size() > depth) list.entries.resize(depth);
  return out;
}
inline RfeResult run_resolved(const RankedListSet& input, const RfeConfig& config) {
  const RankedListSet lists = detail::truncated(input, config.depth);
  const SigmoidParams sigmoid{config.alpha, config.k};

  RfeResult result;
  auto normalized = detail::run_stage("normalize", [&] { return normalize(lists, sigmoid).first; });
  result.stages.push_back({"normalize", normalized});

  auto [hyper_lists, hyper_state] =
      detail::run_stage("hypergraph", [&] { return hypergraph_rerank(normalized, config.k, config.iterations); });
  result.stages.push_back({"hypergraph", hyper_lists});

  auto [cart_lists, cart_state] =
      detail::run_stage("cartesian", [&] { return cartesian_rerank(hyper_state, hyper_lists); });
  result.stages.push_back({"cartesian", cart_lists});

  RankedListSet final_lists = std::move(cart_lists);
  HypergraphState final_state = std::move(cart_state);
  if (config.run_cc_stage) {
    auto [cc_lists, cc_state] = detail::run_stage("components", [&] {
      const auto components = build_components(final_state, final_lists, config.k, config.threshold_mode);
      const auto embeddings = object_embeddings(final_state.embeddings, components.cc_embeddings);
      return cc_rerank(final_lists, components, embeddings, config.k, config.rank_factor);
    });
    result.stages.push_back({"components", cc_lists});
    final_lists = std::move(cc_lists);
    final_state = std::move(cc_state);
  }

  std::optional<DenseMatrix> embeddings;
  if (config.emit_embeddings) {
    embeddings = detail::run_stage("embeddings", [&] {
      return classification_embeddings(final_lists, final_state, config.k, config.normalize_embeddings,
                                       config.threshold_mode)
          .values;
    });
  }

  result.lists = final_lists;
  result.index = RfeIndex{config, std::move(final_lists), std::move(final_state), std::move(embeddings)};
  return result;
}
}  // namespace detail

inline RfeResult run_rfe(const RankedListSet& input, const RfeConfig& requested) {
  input.validate();
  return detail::run_resolved(input, requested.resolved_for(input));
}

/// Fuses the rankers' normalized scores, then runs the full flow on the fused lists.
inline RfeResult run_aggregation(std::span<const RankedListSet> list_sets, const RfeConfig& requested) {
  if (list_sets.empty()) fail(ErrorKind::InvalidInput, "rank aggregation needs at least one ranker");
  const RfeConfig config = requested.resolved_for(list_sets.front());
  std::vector<RankedListSet> prepared;
  prepared.reserve(list_sets.size());
  for (const auto& set : list_sets) {
    set.validate();
    prepared.push_back(detail::truncated(set, config.depth));
  }
  auto fused = detail::run_stage("fusion", [&] {
    return fuse_rankers(prepared, SigmoidParams{config.alpha, config.k}).first;
  });
  return detail::run_resolved(fused, config);
}

/// Ranks every indexed object for a query outside the collection.
///
/// The query's hyperedge is built from its k nearest indexed objects and
/// their (refined) indexed neighborhoods, filtered by one product with the
/// indexed incidence rows, and compared to every indexed h-embedding by
/// cosine similarity. Ties keep ascending object index.
inline RankedList query_unseen(const RfeIndex& index, std::span<const std::pair<Index, double>> neighbors,
                               std::size_t k) {
  const std::size_t n = index.size();
  if (neighbors.empty()) fail(ErrorKind::InvalidInput, "unseen query has an empty neighbor list");
  if (k < 2) fail(ErrorKind::Configuration, "k must be >= 2");
  if (k > index.config.depth) {
    fail(ErrorKind::Configuration, "k=" + std::to_string(k) + " exceeds the index depth L=" +
                                       std::to_string(index.config.depth));
  }
  std::vector<std::pair<Index, double>> ordered(neighbors.begin(), neighbors.end());
  for (const auto& [object, d] : ordered) {
    if (object >= n) fail(ErrorKind::InvalidInput, "neighbor " + std::to_string(object) + " not in the index");
    if (std::isnan(d)) fail(ErrorKind::InvalidInput, "NaN distance in unseen query");
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  const auto weight = detail::position_weight_table(k);
  RowAccumulator membership(n);
  const std::size_t kx = std::min(k, ordered.size());
  for (std::size_t px = 0; px < kx; ++px) {
    const auto& second = index.lists.lists[ordered[px].first].entries;
    const std::size_t kj = std::min(k, second.size());
    for (std::size_t pj = 0; pj < kj; ++pj)
      membership.add(second[pj].object, weight[px + 1] * weight[pj + 1]);
  }
  const auto incidence_row = membership.take();

  RowAccumulator filtered(n);
  for (const auto& [x, rx] : incidence_row)
    for (const auto& [j, hx] : index.state.incidence.row(x)) filtered.add(j, rx * hx);
  const auto query_embedding = filtered.take();
  const double query_norm = sparse_norm(query_embedding);

  RankedList out;
  out.owner = static_cast<Index>(n);
  out.entries.resize(n);
  std::vector<double> dense(n, 0.0);
  for (const auto& e : query_embedding) dense[e.column] = e.value;
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = index.state.embeddings.row(j);
    double dot = 0.0;
    for (const auto& e : row) dot += dense[e.column] * e.value;
    const double norm = sparse_norm(row);
    const double cosine = (query_norm > 0.0 && norm > 0.0) ? dot / (query_norm * norm) : 0.0;
    out.entries[j] = {static_cast<Index>(j), cosine};
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
  return out;
}

}  // namespace rankflow
