/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

/** \file rank_core.hpp
 *  \brief Ranked lists, neighborhood sets and stable re-sorting.
 *
 *  Positions are 1-based throughout: the first entry of a list has rank 1,
 *  and in whole-collection protocols that entry is the owner itself.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankflow/error.hpp"
#include "rankflow/parallel.hpp"
#include "rankflow/sparse.hpp"

namespace rankflow {

struct RankedEntry {
  Index object = 0;
  double score = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedList {
  Index owner = 0;
  std::vector<RankedEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }

  /// 1-based position of `object`, or nullopt when it is not in the list.
  std::optional<std::size_t> position_of(Index object) const {
    for (std::size_t p = 0; p < entries.size(); ++p)
      if (entries[p].object == object) return p + 1;
    return std::nullopt;
  }

  std::vector<Index> objects() const {
    std::vector<Index> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.object);
    return out;
  }

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

struct RankedListSet {
  std::size_t n = 0;
  std::size_t depth = 0;  // truncation depth L
  std::vector<RankedList> lists;

  const RankedList& operator[](std::size_t i) const { return lists[i]; }

  /// Same owners and same object orderings; scores are ignored.
  bool same_order(const RankedListSet& other) const {
    if (n != other.n || lists.size() != other.lists.size()) return false;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      const auto& a = lists[i].entries;
      const auto& b = other.lists[i].entries;
      if (lists[i].owner != other.lists[i].owner || a.size() != b.size()) return false;
      for (std::size_t p = 0; p < a.size(); ++p)
        if (a[p].object != b[p].object) return false;
    }
    return true;
  }

  void validate() const {
    if (lists.size() != n) {
      fail(ErrorKind::DimensionMismatch,
           "expected " + std::to_string(n) + " ranked lists, got " + std::to_string(lists.size()));
    }
    std::vector<std::size_t> stamp(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < n; ++i) {
      if (lists[i].entries.size() > depth) {
        fail(ErrorKind::InvalidInput, "list " + std::to_string(i) + " longer than depth L");
      }
      for (const auto& e : lists[i].entries) {
        if (e.object >= n) {
          fail(ErrorKind::InvalidInput, "list " + std::to_string(i) + " references object " +
                                            std::to_string(e.object) + " outside the collection");
        }
        if (stamp[e.object] == i) {
          fail(ErrorKind::InvalidInput, "list " + std::to_string(i) + " repeats object " +
                                            std::to_string(e.object));
        }
        stamp[e.object] = i;
      }
    }
  }

  friend bool operator==(const RankedListSet&, const RankedListSet&) = default;
};

struct NeighborhoodSet {
  Index owner = 0;
  std::vector<Index> members;
};

/// Per-row lookup of 1-based positions, for reciprocal rank queries.
class PositionIndex {
 public:
  explicit PositionIndex(const RankedListSet& lists) : rows_(lists.lists.size()) {
    parallel_for(lists.lists.size(), [&](std::size_t i) {
      const auto& entries = lists.lists[i].entries;
      auto& row = rows_[i];
      row.reserve(entries.size());
      for (std::size_t p = 0; p < entries.size(); ++p) row.emplace_back(entries[p].object, p + 1);
      std::sort(row.begin(), row.end());
    });
  }

  /// Position of `object` in list `owner`, or 0 when absent.
  std::size_t position(std::size_t owner, Index object) const {
    const auto& row = rows_[owner];
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<Index, std::size_t>{object, 0});
    return (it != row.end() && it->first == object) ? it->second : 0;
  }

 private:
  std::vector<std::vector<std::pair<Index, std::size_t>>> rows_;
};

/// Monotone inversion used to turn a nonnegative distance into a similarity.
inline double similarity_from_distance(double distance) noexcept { return 1.0 / (1.0 + distance); }

using DistanceRow = std::vector<std::pair<Index, double>>;

/// Sorts each query's distances ascending (stable), puts the query itself at
/// position 1 when present, and truncates to `depth`.
inline RankedListSet build_ranked_lists(std::span<const DistanceRow> distances, std::size_t depth) {
  if (depth < 1) fail(ErrorKind::Configuration, "truncation depth L must be >= 1");
  const std::size_t n = distances.size();
  RankedListSet out{n, depth, std::vector<RankedList>(n)};
  for (std::size_t q = 0; q < n; ++q) {
    for (const auto& [object, d] : distances[q]) {
      if (std::isnan(d)) {
        fail(ErrorKind::InvalidInput, "NaN distance in row " + std::to_string(q));
      }
      if (!std::isfinite(d) || d < 0.0) {
        fail(ErrorKind::InvalidInput, "distances must be finite and nonnegative (row " +
                                          std::to_string(q) + ")");
      }
      if (object >= n) {
        fail(ErrorKind::InvalidInput, "row " + std::to_string(q) + " references object " +
                                          std::to_string(object) + " outside the collection");
      }
    }
  }
  parallel_for(n, [&](std::size_t q) {
    DistanceRow row = distances[q];
    std::stable_sort(row.begin(), row.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    auto self = std::find_if(row.begin(), row.end(), [&](const auto& e) { return e.first == q; });
    if (self != row.end()) std::rotate(row.begin(), self, self + 1);
    auto& list = out.lists[q];
    list.owner = static_cast<Index>(q);
    const std::size_t len = std::min(depth, row.size());
    list.entries.reserve(len);
    for (std::size_t p = 0; p < len; ++p) {
      const double score = (p == 0 && row[p].first == q) ? 1.0 : similarity_from_distance(row[p].second);
      list.entries.push_back({row[p].first, score});
    }
  });
  out.validate();
  return out;
}

/// Reorders every list by descending score (absent = 0), stable with respect
/// to the incoming order. Membership is unchanged; entry scores are replaced.
inline RankedListSet stable_resort(const RankedListSet& lists, const SparseScoreMatrix& scores) {
  if (scores.rows() != lists.n || scores.cols() != lists.n) {
    fail(ErrorKind::DimensionMismatch, "score matrix is " + std::to_string(scores.rows()) + "x" +
                                           std::to_string(scores.cols()) + ", lists have n=" +
                                           std::to_string(lists.n));
  }
  RankedListSet out{lists.n, lists.depth, lists.lists};
  parallel_for(lists.n, [&](std::size_t i) {
    auto& entries = out.lists[i].entries;
    const auto row = scores.row(i);
    for (auto& e : entries) {
      auto it = std::lower_bound(row.begin(), row.end(), e.object,
                                 [](const SparseEntry& s, Index col) { return s.column < col; });
      e.score = (it != row.end() && it->column == e.object) ? it->value : 0.0;
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
  });
  return out;
}

/// First min(k, |list|) entries of list q.
inline NeighborhoodSet neighborhood(const RankedListSet& lists, std::size_t q, std::size_t k) {
  if (k < 1) fail(ErrorKind::Configuration, "neighborhood size k must be >= 1");
  if (k > lists.depth) {
    fail(ErrorKind::Configuration, "neighborhood size k=" + std::to_string(k) +
                                       " exceeds truncation depth L=" + std::to_string(lists.depth));
  }
  if (q >= lists.lists.size()) fail(ErrorKind::InvalidInput, "query index out of range");
  const auto& entries = lists.lists[q].entries;
  NeighborhoodSet out{static_cast<Index>(q), {}};
  const std::size_t len = std::min(k, entries.size());
  out.members.reserve(len);
  for (std::size_t p = 0; p < len; ++p) out.members.push_back(entries[p].object);
  return out;
}

/// Full-length ordering: each head list followed by the objects of the
/// matching `full` list that the head does not contain, in their original order.
inline RankedListSet with_tail(const RankedListSet& head, const RankedListSet& full) {
  if (head.n != full.n) fail(ErrorKind::DimensionMismatch, "head and full lists disagree on n");
  RankedListSet out{head.n, std::max(head.depth, full.depth), head.lists};
  parallel_for(head.n, [&](std::size_t i) {
    std::vector<unsigned char> present(head.n, 0);
    auto& entries = out.lists[i].entries;
    for (const auto& e : entries) present[e.object] = 1;
    for (const auto& e : full.lists[i].entries)
      if (!present[e.object]) entries.push_back({e.object, 0.0});
  });
  return out;
}

}  // namespace rankflow
