/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file metrics.hpp
 *  \brief Retrieval effectiveness: MAP, Precision@K, Recall@K, NS-Score and
 *  rank-1 (CMC) accuracy.
 */

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rankflow/rank_core.hpp"

namespace rankflow {

using WarningHandler = std::function<void(std::string_view)>;

namespace detail {
inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view message) { std::cerr << "warning: " << message << '\n'; };
  return handler;
}
}  // namespace detail

/// Replaces the sink for metric warnings; returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  return std::exchange(detail::warning_handler(), std::move(handler));
}

inline void warn(std::string_view message) {
  if (detail::warning_handler()) detail::warning_handler()(message);
}

enum class QueryMode {
  SelfIncluded,  // every object is a query; the query counts as relevant to itself
  SelfExcluded,  // every object is a query; the query is dropped from its own list
  QueryGallery,  // separate query set ranked against a gallery
};

/// Decides which gallery objects are relevant to which query.
class RelevanceOracle {
 public:
  using Label = std::int64_t;

  static RelevanceOracle from_labels(std::vector<Label> labels, QueryMode mode = QueryMode::SelfIncluded) {
    if (mode == QueryMode::QueryGallery) {
      fail(ErrorKind::Configuration, "query/gallery mode needs separate query labels");
    }
    RelevanceOracle oracle;
    oracle.mode_ = mode;
    oracle.query_labels_ = labels;
    oracle.gallery_labels_ = std::move(labels);
    oracle.count_classes();
    return oracle;
  }

  static RelevanceOracle query_gallery(std::vector<Label> query_labels, std::vector<Label> gallery_labels) {
    RelevanceOracle oracle;
    oracle.mode_ = QueryMode::QueryGallery;
    oracle.query_labels_ = std::move(query_labels);
    oracle.gallery_labels_ = std::move(gallery_labels);
    oracle.count_classes();
    return oracle;
  }

  /// Explicit relevant sets, one per query (whole-collection modes only).
  static RelevanceOracle from_sets(std::vector<std::vector<Index>> relevant, std::size_t gallery_size,
                                   QueryMode mode = QueryMode::SelfIncluded) {
    RelevanceOracle oracle;
    oracle.mode_ = mode;
    oracle.gallery_size_ = gallery_size;
    for (auto& set : relevant) {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
    }
    oracle.sets_ = std::move(relevant);
    return oracle;
  }

  QueryMode mode() const noexcept { return mode_; }
  std::size_t query_count() const noexcept { return sets_.empty() ? query_labels_.size() : sets_.size(); }
  std::size_t gallery_size() const noexcept { return sets_.empty() ? gallery_labels_.size() : gallery_size_; }

  /// True when `object` is the query itself and the mode drops it.
  bool skipped(std::size_t query, Index object) const noexcept {
    return mode_ == QueryMode::SelfExcluded && object == query;
  }

  bool relevant(std::size_t query, Index object) const {
    if (skipped(query, object)) return false;
    if (!sets_.empty()) return std::binary_search(sets_.at(query).begin(), sets_.at(query).end(), object);
    return gallery_labels_.at(object) == query_labels_.at(query);
  }

  std::size_t relevant_count(std::size_t query) const {
    std::size_t count = 0;
    if (!sets_.empty()) {
      for (Index object : sets_.at(query))
        if (!skipped(query, object)) ++count;
      return count;
    }
    const Label label = query_labels_.at(query);
    auto it = std::lower_bound(class_sizes_.begin(), class_sizes_.end(), std::pair<Label, std::size_t>{label, 0});
    count = (it != class_sizes_.end() && it->first == label) ? it->second : 0;
    if (mode_ == QueryMode::SelfExcluded && count > 0) --count;
    return count;
  }

 private:
  void count_classes() {
    std::vector<Label> sorted = gallery_labels_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      class_sizes_.emplace_back(sorted[i], j - i);
      i = j;
    }
  }

  QueryMode mode_ = QueryMode::SelfIncluded;
  std::vector<Label> query_labels_;
  std::vector<Label> gallery_labels_;
  std::vector<std::pair<Label, std::size_t>> class_sizes_;
  std::vector<std::vector<Index>> sets_;
  std::size_t gallery_size_ = 0;
};

namespace detail {
/// The list as evaluated: the query's own entry removed in self-excluded mode.
inline std::vector<Index> evaluated_objects(const RankedList& list, const RelevanceOracle& oracle) {
  std::vector<Index> out;
  out.reserve(list.entries.size());
  for (const auto& e : list.entries)
    if (!oracle.skipped(list.owner, e.object)) out.push_back(e.object);
  return out;
}
}  // namespace detail

/// Mean over relevant positions p of precision@p, divided by the query's
/// total number of relevant objects. nullopt when the query has none.
inline std::optional<double> average_precision(const RankedList& list, const RelevanceOracle& oracle) {
  if (list.entries.empty()) fail(ErrorKind::InvalidInput, "average precision of an empty list");
  const std::size_t total = oracle.relevant_count(list.owner);
  if (total == 0) return std::nullopt;
  const auto objects = detail::evaluated_objects(list, oracle);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 0; p < objects.size(); ++p) {
    if (oracle.relevant(list.owner, objects[p])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(p + 1);
    }
  }
  return sum / static_cast<double>(total);
}

inline double mean_average_precision(const RankedListSet& lists, const RelevanceOracle& oracle) {
  double sum = 0.0;
  std::size_t evaluated = 0, skipped = 0;
  for (const auto& list : lists.lists) {
    if (auto ap = average_precision(list, oracle)) {
      sum += *ap;
      ++evaluated;
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) warn(std::to_string(skipped) + " queries without relevant objects excluded from MAP");
  return evaluated == 0 ? 0.0 : sum / static_cast<double>(evaluated);
}

namespace detail {
inline std::size_t hits_at(const std::vector<Index>& objects, const RankedList& list, const RelevanceOracle& oracle,
                           std::size_t depth) {
  std::size_t hits = 0;
  for (std::size_t p = 0; p < std::min(depth, objects.size()); ++p)
    if (oracle.relevant(list.owner, objects[p])) ++hits;
  return hits;
}
}  // namespace detail

/// Relevant fraction of the first K entries; a shorter list is scored over
/// the prefix it has.
inline double precision_at(const RankedList& list, const RelevanceOracle& oracle, std::size_t k) {
  if (k == 0) fail(ErrorKind::Configuration, "precision@K needs K >= 1");
  const auto objects = detail::evaluated_objects(list, oracle);
  std::size_t depth = k;
  if (objects.size() < k) {
    warn("precision@" + std::to_string(k) + " over a list of length " + std::to_string(objects.size()));
    depth = objects.size();
  }
  if (depth == 0) return 0.0;
  return static_cast<double>(detail::hits_at(objects, list, oracle, depth)) / static_cast<double>(depth);
}

/// Relevant objects found in the first K entries over all relevant objects.
inline std::optional<double> recall_at(const RankedList& list, const RelevanceOracle& oracle, std::size_t k) {
  if (k == 0) fail(ErrorKind::Configuration, "recall@K needs K >= 1");
  const std::size_t total = oracle.relevant_count(list.owner);
  if (total == 0) return std::nullopt;
  const auto objects = detail::evaluated_objects(list, oracle);
  if (objects.size() < k) {
    warn("recall@" + std::to_string(k) + " over a list of length " + std::to_string(objects.size()));
  }
  return static_cast<double>(detail::hits_at(objects, list, oracle, k)) / static_cast<double>(total);
}

inline double mean_precision_at(const RankedListSet& lists, const RelevanceOracle& oracle, std::size_t k) {
  if (lists.lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists.lists) sum += precision_at(list, oracle, k);
  return sum / static_cast<double>(lists.lists.size());
}

inline double mean_recall_at(const RankedListSet& lists, const RelevanceOracle& oracle, std::size_t k) {
  double sum = 0.0;
  std::size_t evaluated = 0, skipped = 0;
  for (const auto& list : lists.lists) {
    if (auto r = recall_at(list, oracle, k)) {
      sum += *r;
      ++evaluated;
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) warn(std::to_string(skipped) + " queries without relevant objects excluded from recall");
  return evaluated == 0 ? 0.0 : sum / static_cast<double>(evaluated);
}

/// Mean number of relevant objects among the first four positions (max 4).
inline double ns_score(const RankedListSet& lists, const RelevanceOracle& oracle) {
  if (lists.lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists.lists) {
    const auto objects = detail::evaluated_objects(list, oracle);
    sum += static_cast<double>(detail::hits_at(objects, list, oracle, 4));
  }
  return sum / static_cast<double>(lists.lists.size());
}

/// Fraction of queries whose first gallery item is relevant. Queries with no
/// relevant gallery item are excluded.
inline double cmc_r1(const RankedListSet& lists, const RelevanceOracle& oracle) {
  std::size_t hits = 0, evaluated = 0, skipped = 0;
  for (const auto& list : lists.lists) {
    if (oracle.relevant_count(list.owner) == 0) {
      ++skipped;
      continue;
    }
    ++evaluated;
    const auto objects = detail::evaluated_objects(list, oracle);
    if (!objects.empty() && oracle.relevant(list.owner, objects.front())) ++hits;
  }
  if (skipped > 0) warn(std::to_string(skipped) + " queries without a gallery match excluded from R1");
  return evaluated == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(evaluated);
}

}  // namespace rankflow
