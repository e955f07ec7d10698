/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "dense_oracle.hpp"
#include "rankflow/hypergraph.hpp"

namespace rankflow {
namespace {

using namespace rankflow::testing;

SparseScoreMatrix from_dense(const Dense& d) {
  SparseScoreMatrix m(d.size(), d.empty() ? 0 : d[0].size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<SparseEntry> row;
    for (std::size_t j = 0; j < d[i].size(); ++j)
      if (d[i][j] > 0.0) row.push_back({static_cast<Index>(j), d[i][j]});
    m.set_row(i, row);
  }
  return m;
}

TEST(PositionWeight, Values) {
  EXPECT_DOUBLE_EQ(position_weight(1, 7), 1.0);
  EXPECT_NEAR(position_weight(7, 7), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(position_weight(2, 4), 0.5);
}

TEST(PositionWeight, KBelowTwoIsConfigurationError) {
  try {
    position_weight(1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
  }
}

TEST(Incidence, HyperedgeIsUnionOfNeighborhoods) {
  // N(0) = {0, 1, 3}, N(1) = {1, 2, 3}: e_0 spans {0, 1, 2}. The k-th
  // neighbour carries weight 1 - log_k(k) = 0, so object 3 adds nothing.
  RankedListSet lists{4, 3, {{0, {{0, 1}, {1, 1}, {3, 1}}}, {1, {{1, 1}, {2, 1}, {3, 1}}},
                             {2, {{2, 1}, {1, 1}, {0, 1}}}, {3, {{3, 1}, {2, 1}, {1, 1}}}}};
  const auto hm = build_incidence(lists, 3);
  std::vector<Index> members;
  for (const auto& e : hm.row(0)) members.push_back(e.column);
  EXPECT_EQ(members, (std::vector<Index>{0, 1, 2}));
  const double w2 = position_weight(2, 3);
  EXPECT_DOUBLE_EQ(hm.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(hm.at(0, 1), w2 + w2);
  EXPECT_DOUBLE_EQ(hm.at(0, 2), w2 * w2);
  EXPECT_LE(max_abs_diff(to_dense(hm), dense_incidence(lists, 3)), 1e-15);
}

TEST(Filter, IdentityAndTwoByTwo) {
  const auto eye = from_dense({{1, 0}, {0, 1}});
  EXPECT_EQ(filter_incidence(eye), eye);
  const auto h = filter_incidence(from_dense({{1, 1}, {0, 1}}));
  EXPECT_EQ(to_dense(h), (Dense{{1, 2}, {0, 1}}));
}

TEST(Filter, DiagonalPathLowerBound) {
  std::mt19937_64 rng(11);
  const auto lists = random_lists(25, 10, rng);
  const auto hm = build_incidence(lists, 5);
  const auto h = filter_incidence(hm);
  for (std::size_t i = 0; i < 25; ++i)
    for (const auto& e : hm.row(i)) EXPECT_GE(h.at(i, e.column), hm.at(i, i) * e.value);
}

TEST(EdgeWeights, TopKSums) {
  SparseScoreMatrix m(2, 4);
  m.set_row(0, {{0, 3}, {1, 2}, {3, 1}});
  EXPECT_EQ(hyperedge_weights(m, 2), (std::vector<double>{5.0, 0.0}));
  EXPECT_EQ(hyperedge_weights(m, 3), (std::vector<double>{6.0, 0.0}));
}

TEST(Fh, SingleObject) {
  RankedListSet lists{1, 1, {{0, {{0, 1.0}}}}};
  const auto state = f_h(lists, 2);
  EXPECT_EQ(to_dense(state.incidence), (Dense{{1.0}}));
  EXPECT_EQ(to_dense(state.embeddings), (Dense{{1.0}}));
  EXPECT_EQ(state.edge_weights, (std::vector<double>{1.0}));
}

TEST(Fh, DuplicateObjectsShareRows) {
  // Objects 0 and 1 are duplicates: each ranks the other right after itself.
  RankedListSet lists{4, 3, {{0, {{0, 1}, {1, 1}, {2, 1}}}, {1, {{1, 1}, {0, 1}, {2, 1}}},
                             {2, {{2, 1}, {3, 1}, {0, 1}}}, {3, {{3, 1}, {2, 1}, {1, 1}}}}};
  const auto state = f_h(lists, 3);
  EXPECT_DOUBLE_EQ(state.embeddings.at(0, 0), state.embeddings.at(1, 1));
  EXPECT_DOUBLE_EQ(state.embeddings.at(0, 1), state.embeddings.at(1, 0));
  EXPECT_DOUBLE_EQ(state.embeddings.at(0, 2), state.embeddings.at(1, 2));
}

TEST(Fh, MatchesDenseOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng() % 28;
    const std::size_t depth = 2 + rng() % (n - 1);
    const std::size_t k = 2 + rng() % (depth - 1);
    const auto lists = random_lists(n, depth, rng);
    const auto state = f_h(lists, k);
    const auto hm = dense_incidence(lists, k);
    const auto h = dense_product(hm, hm);
    EXPECT_LE(max_abs_diff(to_dense(state.incidence), hm), 1e-9);
    EXPECT_LE(max_abs_diff(to_dense(state.embeddings), h), 1e-9);
    const auto w = dense_edge_weights(h, k);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(state.edge_weights[i], w[i], 1e-9);
    EXPECT_LE(max_abs_diff(to_dense(affinity(state.embeddings)), dense_product(h, dense_transpose(h))), 1e-9);
  }
}

TEST(Affinity, IdentityAndEqualRows) {
  const auto eye = from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  EXPECT_EQ(affinity(eye), eye);
  const auto a = affinity(from_dense({{1, 2, 0}, {1, 2, 0}, {0, 0, 3}}));
  EXPECT_DOUBLE_EQ(a.at(0, 1), a.at(0, 0));
  EXPECT_DOUBLE_EQ(a.at(0, 1), a.at(1, 1));
}

TEST(Affinity, ExactlySymmetric) {
  std::mt19937_64 rng(5);
  const auto lists = random_lists(30, 12, rng);
  const auto a = affinity(f_h(lists, 6).embeddings);
  for (std::size_t i = 0; i < 30; ++i)
    for (const auto& e : a.row(i)) EXPECT_EQ(e.value, a.at(e.column, i));
}

TEST(Affinity, OnListsAgreesWithFull) {
  std::mt19937_64 rng(6);
  const auto lists = random_lists(30, 10, rng);
  const auto h = f_h(lists, 5).embeddings;
  const auto full = affinity(h);
  const auto restricted = affinity_on_lists(h, lists);
  for (std::size_t i = 0; i < 30; ++i)
    for (const auto& e : lists.lists[i].entries) EXPECT_NEAR(restricted.at(i, e.object), full.at(i, e.object), 1e-9);
}

TEST(HypergraphScores, DividesByPosition) {
  // a_01 = 1 and object 1 sits at position 2 of list 0.
  RankedListSet lists{2, 2, {{0, {{0, 1}, {1, 1}}}, {1, {{1, 1}, {0, 1}}}}};
  SparseScoreMatrix h(2);
  h.set_row(0, {{0, 1.0}});
  h.set_row(1, {{0, 1.0}});
  const auto scores = hypergraph_scores(h, lists);
  EXPECT_DOUBLE_EQ(scores.at(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(scores.at(0, 0), 1.0);
}

TEST(HypergraphRerank, OneIterationEqualsManualStep) {
  std::mt19937_64 rng(8);
  const auto lists = random_lists(25, 10, rng);
  const auto [out, state] = hypergraph_rerank(lists, 4, 1);
  const auto manual = stable_resort(lists, hypergraph_scores(f_h(lists, 4).embeddings, lists));
  EXPECT_EQ(out, manual);
  EXPECT_EQ(state, f_h(manual, 4));
}

TEST(HypergraphRerank, PlantedSwapMovesUp) {
  // Two well separated groups {0..4} and {5..9}; list 0 has an intruder (5)
  // ahead of its own group member 4.
  const std::size_t n = 10;
  RankedListSet lists{n, n, std::vector<RankedList>(n)};
  for (Index i = 0; i < n; ++i) {
    auto& l = lists.lists[i];
    l.owner = i;
    const Index base = i < 5 ? 0 : 5, other = i < 5 ? 5 : 0;
    l.entries.push_back({i, 1});
    for (Index j = base; j < base + 5; ++j)
      if (j != i) l.entries.push_back({j, 1});
    for (Index j = other; j < other + 5; ++j) l.entries.push_back({j, 1});
  }
  // Swap 4 (position 5) and 5 (position 6) in list 0.
  std::swap(lists.lists[0].entries[4], lists.lists[0].entries[5]);
  ASSERT_EQ(lists.lists[0].position_of(5), 5u);
  const auto [out, state] = hypergraph_rerank(lists, 5, 1);
  EXPECT_LT(*out.lists[0].position_of(4), *out.lists[0].position_of(5));
}

TEST(HypergraphRerank, ZeroIterationsIsConfigurationError) {
  RankedListSet lists{1, 1, {{0, {{0, 1.0}}}}};
  EXPECT_THROW(hypergraph_rerank(lists, 2, 0), Error);
}

}  // namespace
}  // namespace rankflow
