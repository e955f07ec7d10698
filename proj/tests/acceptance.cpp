/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dense_oracle.hpp"
#include "rankflow/rankflow.hpp"
#include "synthetic.hpp"

using namespace rankflow;
using namespace rankflow::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Report {
  int failures = 0;

  void line(const std::string& status, const std::string& name, const std::string& detail) {
    std::cout << status << "  " << name << ": " << detail << std::endl;
    if (status == "FAIL") ++failures;
  }
  void check(bool ok, const std::string& name, const std::string& detail) { line(ok ? "PASS" : "FAIL", name, detail); }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << std::fixed << v;
  return out.str();
}

// ---------------------------------------------------------------------------

double max_rel_diff(const Dense& a, const Dense& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      worst = std::max(worst, std::abs(a[i][j] - b[i][j]) / std::max(1.0, std::abs(b[i][j])));
  return worst;
}

std::string sci(double v) {
  std::ostringstream out;
  out.precision(2);
  out << std::scientific << v;
  return out.str();
}

Dense dense_of(const DenseMatrix& m) {
  Dense out = zeros(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out[i][j] = m(i, j);
  return out;
}

// Each stage is compared with its dense oracle on the same inputs. A fully
// chained oracle (dense from the lists onward) is reported as relative error:
// values reach 1e13, where one ulp already exceeds 1e-9.
void oracle_equivalence(Report& report) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20260101);
  const int instances = 120;
  double worst_hm = 0, worst_h = 0, worst_a = 0, worst_c = 0, worst_s = 0, worst_cc = 0, worst_e = 0, worst_rho_e = 0;
  double chained = 0;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n = 2 + rng() % 29;
    const std::size_t depth = 2 + rng() % (n - 1);
    const std::size_t k = 2 + rng() % (depth - 1);
    const auto lists = random_lists(n, depth, rng);

    const auto state = f_h(lists, k);
    const auto hm = to_dense(state.incidence);
    worst_hm = std::max(worst_hm, max_abs_diff(hm, dense_incidence(lists, k)));
    const auto h_oracle = dense_product(hm, hm);
    worst_h = std::max(worst_h, max_abs_diff(to_dense(filter_incidence(state.incidence)), h_oracle));
    const auto h = to_dense(state.embeddings);
    worst_a = std::max(worst_a, max_abs_diff(to_dense(affinity(state.embeddings)), dense_product(h, dense_transpose(h))));
    const auto w = dense_edge_weights(h, k);
    const auto rho_c = to_dense(cartesian_scores(state));
    worst_c = std::max(worst_c, max_abs_diff(rho_c, dense_cartesian(hm, h, w)));

    for (const auto& [i, j] : candidate_edges(lists, k))
      worst_s = std::max(worst_s, std::abs(edge_confidence(state, i, j) - dense_confidence(h, w, i, j)));

    const auto comps = build_components(state, lists, k);
    const auto cc = to_dense(comps.cc_embeddings);
    worst_cc = std::max(worst_cc, max_abs_diff(cc, dense_cc_embeddings(h, comps.components)));
    const auto emb = object_embeddings(state.embeddings, comps.cc_embeddings);
    const auto e = dense_of(emb);
    worst_e = std::max(worst_e, max_abs_diff(e, dense_object_embeddings(h, cc)));
    const auto rho_e = to_dense(cc_scores(lists, comps, emb, k));
    worst_rho_e = std::max(worst_rho_e, max_abs_diff(rho_e, dense_rho_e(lists, cc, e, k)));

    const auto hm_full = dense_incidence(lists, k);
    const auto h_full = dense_product(hm_full, hm_full);
    const auto cc_full = dense_cc_embeddings(h_full, comps.components);
    chained = std::max({chained, max_rel_diff(h, h_full),
                        max_rel_diff(rho_c, dense_cartesian(hm_full, h_full, dense_edge_weights(h_full, k))),
                        max_rel_diff(e, dense_object_embeddings(h_full, cc_full))});
  }
  const double worst =
      std::max({worst_hm, worst_h, worst_a, worst_c, worst_s, worst_cc, worst_e, worst_rho_e});
  const double elapsed = seconds_since(start);
  report.check(worst <= 1e-9 && elapsed < 30.0, "oracle-equivalence",
               std::to_string(instances) + " instances n<=30; max |diff| H_m=" + fmt(worst_hm, 12) +
                   " H=" + fmt(worst_h, 12) + " A=" + fmt(worst_a, 12) + " rho_c=" + fmt(worst_c, 12) +
                   " s_c=" + fmt(worst_s, 12) + " c_q=" + fmt(worst_cc, 12) + " e_q=" + fmt(worst_e, 12) +
                   " rho_e=" + fmt(worst_rho_e, 12) + " (tol 1e-9); chained relative " +
                   sci(chained) + "; " + fmt(elapsed, 2) + "s (limit 30s)");
}

// ---------------------------------------------------------------------------

bool nonnegative(const SparseScoreMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (const auto& e : m.row(i))
      if (!(e.value >= 0.0)) return false;
  return true;
}

std::string serialize(const RfeResult& result) {
  std::ostringstream out(std::ios::binary);
  io::write_ranked_lists(out, result.lists, {});
  for (const auto& list : result.lists.lists)
    for (const auto& e : list.entries) io::put_f64(out, e.score);
  io::write_index(out, io::StoredIndex{result.index, {}});
  return out.str();
}

void invariants(Report& report) {
  const auto start = Clock::now();
  const auto blobs = make_blobs(8, 50, 12, 1.0, 1.0, 7);
  const auto lists = build_ranked_lists(compute_distances(blobs.features, DistanceMetric::Euclidean), 120);
  const auto oracle = RelevanceOracle::from_labels(blobs.labels);
  RfeConfig config;
  config.k = 40;
  config.depth = 120;
  config.emit_embeddings = true;

  std::vector<std::string> problems;
  const auto state = f_h(lists, config.k);
  const auto a = affinity(state.embeddings);
  double asym = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (const auto& e : a.row(i)) asym = std::max(asym, std::abs(e.value - a.at(e.column, i)));
  if (asym >= 1e-9) problems.push_back("A asymmetry " + fmt(asym, 12));

  const auto rho_n = normalize(lists, {config.alpha, config.k}).second;
  const auto rho_h = hypergraph_scores(state.embeddings, lists);
  const auto rho_c = cartesian_scores(state);
  const auto comps = build_components(state, lists, config.k);
  const auto emb = object_embeddings(state.embeddings, comps.cc_embeddings);
  const auto rho_e = cc_scores(lists, comps, emb, config.k);
  bool nonneg = nonnegative(rho_n) && nonnegative(state.incidence) && nonnegative(state.embeddings) &&
                nonnegative(a) && nonnegative(rho_h) && nonnegative(rho_c) && nonnegative(comps.cc_embeddings) &&
                nonnegative(rho_e);
  for (double v : emb.values) nonneg = nonneg && v >= 0.0;
  for (double v : state.edge_weights) nonneg = nonneg && v >= 0.0;
  if (!nonneg) problems.push_back("negative score");

  std::vector<int> covered(lists.n, 0);
  for (std::size_t q = 0; q < comps.count(); ++q)
    for (Index v : comps.components[q]) {
      ++covered[v];
      if (comps.assignment[v] != q) problems.push_back("assignment disagrees with membership");
    }
  if (std::any_of(covered.begin(), covered.end(), [](int c) { return c != 1; }))
    problems.push_back("components are not a partition");

  set_thread_count(1);
  const auto first = run_rfe(lists, config);
  const auto second = run_rfe(lists, config);
  const std::size_t many = std::max<std::size_t>(4, std::thread::hardware_concurrency());
  set_thread_count(many);
  const auto threaded = run_rfe(lists, config);
  set_thread_count(0);
  const std::string bytes = serialize(first);
  if (bytes != serialize(second)) problems.push_back("two runs differ");
  if (bytes != serialize(threaded)) problems.push_back("1 vs " + std::to_string(many) + " threads differ");

  auto in_range = [](double v, double hi) { return v >= 0.0 && v <= hi; };
  for (const auto* set : {&lists, &first.lists}) {
    const bool ok = in_range(mean_average_precision(*set, oracle), 1.0) &&
                    in_range(mean_precision_at(*set, oracle, 10), 1.0) &&
                    in_range(mean_recall_at(*set, oracle, 10), 1.0) && in_range(ns_score(*set, oracle), 4.0) &&
                    in_range(cmc_r1(*set, oracle), 1.0);
    if (!ok) problems.push_back("metric out of range");
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 30.0) problems.push_back("runtime " + fmt(elapsed, 2) + "s");
  std::string detail = problems.empty() ? "symmetry, nonnegativity, partition, metric ranges, determinism (2 runs; 1 vs " +
                                              std::to_string(many) + " threads byte-identical)"
                                        : problems.front();
  report.check(problems.empty(), "invariants", detail + "; " + fmt(elapsed, 2) + "s (limit 30s)");
}

// ---------------------------------------------------------------------------

struct SyntheticRun {
  Blobs blobs;
  RankedListSet baseline;
  RfeResult full;
};

SyntheticRun synthetic_improvement(Report& report) {
  const auto start = Clock::now();
  SyntheticRun run;
  run.blobs = make_blobs(10, 100, 16, 1.0, 1.0, 42);
  const auto distances = compute_distances(run.blobs.features, DistanceMetric::Euclidean);
  run.baseline = build_ranked_lists(distances, 200);
  RfeConfig config;
  config.k = 100;
  config.depth = 200;
  run.full = run_rfe(run.baseline, config);
  const double elapsed = seconds_since(start);

  const auto oracle = RelevanceOracle::from_labels(run.blobs.labels);
  const double base = mean_average_precision(run.baseline, oracle);
  std::vector<double> maps{base};
  std::string trail = "baseline=" + fmt(base);
  for (const auto& stage : run.full.stages) {
    maps.push_back(mean_average_precision(stage.lists, oracle));
    trail += " " + stage.name + "=" + fmt(maps.back());
  }
  bool monotone = true;
  for (std::size_t s = 1; s < maps.size(); ++s) monotone = monotone && maps[s] >= maps[s - 1] - 0.01;
  const bool baseline_ok = base >= 0.55 && base <= 0.85;
  const bool improved = maps.back() >= base + 0.03;
  report.check(baseline_ok && improved && monotone && elapsed < 60.0, "synthetic-improvement",
               trail + "; final-baseline=" + fmt(maps.back() - base) + " (need >=0.03), per-stage drops within 0.01: " +
                   (monotone ? "yes" : "no") + "; baseline in [0.55,0.85]: " + (baseline_ok ? "yes" : "no") + "; " +
                   fmt(elapsed, 2) + "s (limit 60s)");
  return run;
}

void ablation(Report& report, const SyntheticRun& run) {
  RfeConfig config = run.full.index.config;
  config.run_cc_stage = false;
  const auto ablated = run_rfe(run.baseline, config);
  const bool same = ablated.stages.size() == 3 && ablated.lists == run.full.stages[2].lists;
  report.check(same, "ablation-skip-cc",
               std::string("skip-cc output ") + (same ? "equals" : "differs from") + " the full run's cartesian-stage lists");
}

// ---------------------------------------------------------------------------

void aggregation(Report& report, const SyntheticRun& run) {
  const auto start = Clock::now();
  const auto oracle = RelevanceOracle::from_labels(run.blobs.labels);
  RfeConfig config;
  config.k = 100;
  config.depth = 200;
  std::vector<RankedListSet> views;
  std::vector<double> single;
  for (std::uint64_t seed : {101u, 202u}) {
    const auto view = make_view(run.blobs, 12, 0.6, seed);
    views.push_back(build_ranked_lists(compute_distances(view, DistanceMetric::Euclidean), 200));
    single.push_back(mean_average_precision(run_rfe(views.back(), config).lists, oracle));
  }
  const double fused = mean_average_precision(run_aggregation(views, config).lists, oracle);
  const double best = std::max(single[0], single[1]);
  report.check(fused >= best - 0.02, "rank-aggregation",
               "view MAPs after RFE " + fmt(single[0]) + ", " + fmt(single[1]) + "; fused=" + fmt(fused) +
                   " (need >= " + fmt(best - 0.02) + "); " + fmt(seconds_since(start), 2) + "s");
}

// ---------------------------------------------------------------------------

void unseen_queries(Report& report, const SyntheticRun& run) {
  const auto& blobs = run.blobs;
  const std::size_t n = blobs.features.rows;
  // Hold out the first object of every class.
  std::vector<bool> held(n, false);
  std::set<std::int64_t> seen_class;
  for (std::size_t i = 0; i < n; ++i)
    if (seen_class.insert(blobs.labels[i]).second) held[i] = true;

  FeatureTable indexed, queries;
  indexed.dims = queries.dims = blobs.features.dims;
  std::vector<std::int64_t> gallery_labels, query_labels;
  for (std::size_t i = 0; i < n; ++i) {
    auto& target = held[i] ? queries : indexed;
    const auto row = blobs.features.row(i);
    target.values.insert(target.values.end(), row.begin(), row.end());
    ++target.rows;
    (held[i] ? query_labels : gallery_labels).push_back(blobs.labels[i]);
  }

  RfeConfig config;
  config.k = 100;
  config.depth = 200;
  const auto lists = build_ranked_lists(compute_distances(indexed, DistanceMetric::Euclidean), 200);
  const auto index = run_rfe(lists, config).index;
  const auto distances = compute_distances(queries, indexed, DistanceMetric::Euclidean);

  RankedListSet raw{queries.rows, indexed.rows, {}}, refined{queries.rows, indexed.rows, {}};
  for (std::size_t q = 0; q < queries.rows; ++q) {
    DistanceRow row = distances[q];
    std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    RankedList plain{static_cast<Index>(q), {}};
    for (const auto& [object, d] : row) plain.entries.push_back({object, similarity_from_distance(d)});
    raw.lists.push_back(plain);
    auto ranked = query_unseen(index, distances[q], config.k);
    ranked.owner = static_cast<Index>(q);
    refined.lists.push_back(std::move(ranked));
  }
  const auto oracle = RelevanceOracle::query_gallery(query_labels, gallery_labels);
  const double p_raw = mean_precision_at(raw, oracle, 10);
  const double p_rfe = mean_precision_at(refined, oracle, 10);
  report.check(p_rfe >= p_raw, "unseen-query-holdout",
               std::to_string(queries.rows) + " held-out queries; P@10 raw=" + fmt(p_raw) + " query_unseen=" +
                   fmt(p_rfe) + " (MAP raw=" + fmt(mean_average_precision(raw, oracle)) +
                   " query_unseen=" + fmt(mean_average_precision(refined, oracle)) + ")");
}

// ---------------------------------------------------------------------------

void metric_oracles(Report& report) {
  std::mt19937_64 rng(99);
  int mismatches = 0;
  const int instances = 100;
  const auto previous = set_warning_handler(nullptr);
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    const std::size_t classes = 1 + rng() % 8;
    std::vector<RelevanceOracle::Label> labels(n);
    for (auto& l : labels) l = static_cast<RelevanceOracle::Label>(rng() % classes);
    const std::size_t depth = 1 + rng() % n;
    const std::size_t k = 1 + rng() % 12;
    RankedListSet lists{n, depth, {}};
    double map = 0, pk = 0, rk = 0, ns = 0, r1 = 0;
    for (Index q = 0; q < n; ++q) {
      std::vector<Index> order(n);
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(depth);
      RankedList list{q, {}};
      for (Index o : order) list.entries.push_back({o, 0.0});
      lists.lists.push_back(list);
      std::vector<bool> flags(n);
      std::size_t total = 0;
      for (std::size_t j = 0; j < n; ++j) total += (flags[j] = labels[j] == labels[q]);
      map += naive_ap(order, flags, total);
      pk += static_cast<double>(naive_hits(order, flags, k)) / static_cast<double>(std::min(k, depth));
      rk += static_cast<double>(naive_hits(order, flags, k)) / static_cast<double>(total);
      ns += static_cast<double>(naive_hits(order, flags, 4));
      r1 += flags[order[0]] ? 1.0 : 0.0;
    }
    const auto oracle = RelevanceOracle::from_labels(labels);
    const double dn = static_cast<double>(n);
    mismatches += mean_average_precision(lists, oracle) != map / dn;
    mismatches += mean_precision_at(lists, oracle, k) != pk / dn;
    mismatches += mean_recall_at(lists, oracle, k) != rk / dn;
    mismatches += ns_score(lists, oracle) != ns / dn;
    mismatches += cmc_r1(lists, oracle) != r1 / dn;
  }
  set_warning_handler(previous);

  // Perfect toy set: 5 classes of 4, every list starts with its class.
  std::vector<RelevanceOracle::Label> labels;
  RankedListSet perfect{20, 20, {}};
  for (Index q = 0; q < 20; ++q) {
    labels.push_back(q / 4);
    RankedList list{q, {}};
    for (Index j = 0; j < 20; ++j)
      if (j / 4 == q / 4) list.entries.push_back({j, 1.0});
    for (Index j = 0; j < 20; ++j)
      if (j / 4 != q / 4) list.entries.push_back({j, 0.0});
    perfect.lists.push_back(list);
  }
  const double ns = ns_score(perfect, RelevanceOracle::from_labels(labels));
  report.check(mismatches == 0 && ns == 4.0, "metric-oracles",
               std::to_string(instances) + " random instances, " + std::to_string(mismatches) +
                   " exact mismatches (MAP, P@K, R@K, NS, R1); perfect toy NS-Score=" + fmt(ns, 2));
}

// ---------------------------------------------------------------------------

void mpeg7(Report& report) {
  const char* path = std::getenv("RFE_MPEG7_DISTANCES");
  if (path == nullptr || *path == '\0') {
    report.line("SKIP", "mpeg7-recall40", "set RFE_MPEG7_DISTANCES to a 1400x1400 distance matrix to run");
    return;
  }
  try {
    const auto distances = io::load_distance_matrix(path);
    if (distances.size() != 1400) fail(ErrorKind::InvalidInput, "expected 1400 rows");
    std::vector<RelevanceOracle::Label> labels(1400);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<RelevanceOracle::Label>(i / 20);
    RfeConfig config;
    config.k = 20;
    const auto lists = build_ranked_lists(distances, RfeConfig::default_depth(1400, 20));
    const auto oracle = RelevanceOracle::from_labels(labels);
    const double before = 100.0 * mean_recall_at(lists, oracle, 40);
    const double after = 100.0 * mean_recall_at(run_rfe(lists, config).lists, oracle, 40);
    report.check(after >= 93.0 - 0.6, "mpeg7-recall40",
                 "Recall@40 " + fmt(before, 2) + " -> " + fmt(after, 2) + " (need >= 92.40)");
  } catch (const std::exception& e) {
    report.line("FAIL", "mpeg7-recall40", e.what());
  }
}

}  // namespace

int main() {
  Report report;
  oracle_equivalence(report);
  invariants(report);
  const auto run = synthetic_improvement(report);
  ablation(report, run);
  aggregation(report, run);
  unseen_queries(report, run);
  metric_oracles(report);
  mpeg7(report);
  std::cout << (report.failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(report.failures) + " FAILED")
            << std::endl;
  return report.failures == 0 ? 0 : 1;
}
