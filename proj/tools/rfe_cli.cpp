/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

// rfe: command-line front end for the rank flow library.
//
// Every tuning flag can also be set through the environment; the variable
// name is RFE_ followed by the flag name in upper case with dashes replaced
// by underscores (RFE_K, RFE_L, RFE_ALPHA, RFE_ITERATIONS, RFE_SKIP_CC,
// RFE_THRESHOLD, RFE_METRIC, RFE_SELF_MODE, RFE_THREADS). Command-line flags
// take precedence.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankflow/rankflow.hpp"

namespace {

using namespace rankflow;

struct Settings {
  // inputs
  std::vector<std::string> features;
  std::vector<std::string> distances;
  std::vector<std::string> lists;
  std::string labels;
  std::string output;
  std::string report;

  // configuration
  std::string preset;
  std::size_t k = 20;
  std::size_t depth = 0;
  double alpha = 0.1;
  std::size_t iterations = 2;
  bool skip_cc = false;
  std::string threshold = "scale-free";
  std::string metric = "euclidean";
  std::string self_mode = "included";
  std::size_t at = 10;
  std::size_t threads = 0;
  bool normalize = false;
  bool with_embeddings = false;

  // query
  std::string index;
  std::string queries;
  std::string collection;

  // synth
  std::size_t classes = 10, per_class = 100, dims = 16;
  double spread = 1.0, noise = 1.0;
  std::uint64_t seed = 42;
  std::string labels_out;

  std::map<std::string, CLI::Option*> given;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool was_given(const Settings& s, const std::string& name) {
  auto it = s.given.find(name);
  return it != s.given.end() && it->second->count() > 0;
}

void add_tuning(CLI::App* sub, Settings& s) {
  auto track = [&](const std::string& name, CLI::Option* opt) {
    // Keyed per subcommand: each one binds the same setting to its own option.
    auto& slot = s.given[name + "@" + sub->get_name()];
    slot = opt;
  };
  track("preset", sub->add_option("--preset", s.preset, "Dataset preset: flowers, corel5k, holidays, ukbench"));
  track("k", sub->add_option("--k", s.k, "Neighborhood size k (default 20)")->envname("RFE_K"));
  track("L", sub->add_option("--L", s.depth, "Ranked-list depth L (default min(n, max(20k, 200)))")->envname("RFE_L"));
  track("alpha", sub->add_option("--alpha", s.alpha, "Sigmoid steepness (default 0.1)")->envname("RFE_ALPHA"));
  track("iterations",
        sub->add_option("--iterations", s.iterations, "Hypergraph iterations T (default 2)")->envname("RFE_ITERATIONS"));
  track("skip-cc", sub->add_flag("--skip-cc", s.skip_cc, "Stop after the Cartesian step")->envname("RFE_SKIP_CC"));
  sub->add_option("--threshold", s.threshold, "Confident-edge cutoff: scale-free (default) or literal")
      ->envname("RFE_THRESHOLD")
      ->check(CLI::IsMember({"scale-free", "literal"}));
}

void add_inputs(CLI::App* sub, Settings& s, bool many) {
  auto* f = sub->add_option("--features", s.features, "Feature table (text with header, or .bin/.f32 float32)");
  auto* d = sub->add_option("--distances", s.distances, "Square distance matrix, one row per line");
  auto* l = sub->add_option("--lists", s.lists, "Ranked lists, '<query_id>: <id> <id> ...'");
  if (!many) {
    f->expected(1);
    d->expected(1);
    l->expected(1);
  }
  sub->add_option("--metric", s.metric, "Distance for --features: euclidean (default) or cosine")
      ->envname("RFE_METRIC")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
}

void add_evaluation(CLI::App* sub, Settings& s) {
  sub->add_option("--labels", s.labels, "Labels file, '<id> <label>' per line");
  sub->add_option("--self-mode", s.self_mode, "included (default) or excluded: whether a query counts itself")
      ->envname("RFE_SELF_MODE")
      ->check(CLI::IsMember({"included", "excluded"}));
  sub->add_option("--at", s.at, "K for Precision@K and Recall@K (default 10)");
}

RfeConfig config_from(const Settings& s, const std::string& sub) {
  RfeConfig c = s.preset.empty() ? RfeConfig{} : RfeConfig::preset(s.preset);
  auto given = [&](const char* name) { return was_given(s, std::string(name) + "@" + sub); };
  if (given("k") || s.preset.empty()) c.k = s.k;
  if (given("L")) c.depth = s.depth;
  if (given("alpha")) c.alpha = s.alpha;
  if (given("iterations")) c.iterations = s.iterations;
  if (given("skip-cc")) c.run_cc_stage = !s.skip_cc;
  c.threshold_mode = s.threshold == "literal" ? ThresholdMode::Literal : ThresholdMode::ScaleFree;
  c.normalize_embeddings = s.normalize;
  c.validate();
  return c;
}

DistanceMetric metric_of(const Settings& s) {
  return s.metric == "cosine" ? DistanceMetric::Cosine : DistanceMetric::Euclidean;
}

struct Loaded {
  RankedListSet lists;
  std::vector<std::string> ids;
};

std::vector<std::string> row_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

/// One ranker per input file, in the order features, distances, lists.
std::vector<Loaded> load_rankers(const Settings& s, const RfeConfig& config) {
  std::vector<Loaded> out;
  auto depth_for = [&](std::size_t n) { return config.resolved(n).depth; };
  for (const auto& path : s.features) {
    auto table = io::load_features(path);
    auto ids = table.ids.empty() ? row_ids(table.rows) : table.ids;
    const auto d = compute_distances(table, metric_of(s));
    out.push_back({build_ranked_lists(d, depth_for(table.rows)), std::move(ids)});
  }
  for (const auto& path : s.distances) {
    const auto d = io::load_distance_matrix(path);
    for (const auto& row : d)
      if (row.size() != d.size()) fail(ErrorKind::DimensionMismatch, path + ": distance matrix is not square");
    out.push_back({build_ranked_lists(d, depth_for(d.size())), row_ids(d.size())});
  }
  for (const auto& path : s.lists) {
    auto file = io::load_ranked_lists(path, out.empty() ? std::vector<std::string>{} : out.front().ids);
    out.push_back({std::move(file.lists), std::move(file.ids)});
  }
  if (out.empty()) throw UsageError("an input is required: --features, --distances or --lists");
  for (const auto& r : out)
    if (r.ids != out.front().ids) fail(ErrorKind::DimensionMismatch, "inputs disagree on the object identifiers");
  return out;
}

Loaded load_single(const Settings& s, const RfeConfig& config) {
  if (s.features.size() + s.distances.size() + s.lists.size() > 1)
    throw UsageError("give exactly one of --features, --distances, --lists");
  return std::move(load_rankers(s, config).front());
}

/// Writes to --output, or stdout when it is empty or "-".
template <typename WriteFn>
void emit(const std::string& path, WriteFn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  auto out = io::open_out(path);
  write(out);
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

QueryMode self_mode_of(const Settings& s) {
  return s.self_mode == "excluded" ? QueryMode::SelfExcluded : QueryMode::SelfIncluded;
}

void metric_lines(std::ostream& out, const std::string& suffix, const RankedListSet& lists,
                  const RelevanceOracle& oracle, std::size_t at) {
  const auto K = std::to_string(at);
  out << "map" << suffix << '=' << io::format_double(mean_average_precision(lists, oracle)) << '\n';
  out << "precision@" << K << suffix << '=' << io::format_double(mean_precision_at(lists, oracle, at)) << '\n';
  out << "recall@" << K << suffix << '=' << io::format_double(mean_recall_at(lists, oracle, at)) << '\n';
  out << "ns_score" << suffix << '=' << io::format_double(ns_score(lists, oracle)) << '\n';
  out << "r1" << suffix << '=' << io::format_double(cmc_r1(lists, oracle)) << '\n';
}

/// Metric report for a whole-collection run; goes to --report, or stdout
/// unless the lists themselves went there (then stderr).
void report_run(const Settings& s, const Loaded& input, const RfeResult& result) {
  if (s.labels.empty()) return;
  const auto labels = io::load_labels(s.labels).classes_for(input.ids);
  const auto oracle = RelevanceOracle::from_labels(labels, self_mode_of(s));
  std::ostringstream text;
  text << "objects=" << input.lists.n << '\n';
  text << "k=" << result.index.config.k << "\nL=" << result.index.config.depth << '\n';
  metric_lines(text, "_before", input.lists, oracle, s.at);
  for (const auto& stage : result.stages)
    text << "map_" << stage.name << '=' << io::format_double(mean_average_precision(stage.lists, oracle)) << '\n';
  metric_lines(text, "_after", result.lists, oracle, s.at);
  if (!s.report.empty()) {
    emit(s.report, [&](std::ostream& out) { out << text.str(); });
  } else if (s.output.empty() || s.output == "-") {
    std::cerr << text.str();
  } else {
    std::cout << text.str();
  }
}

int cmd_rerank(const Settings& s) {
  const auto config = config_from(s, "rerank");
  const auto input = load_single(s, config);
  const auto result = run_rfe(input.lists, config);
  emit(s.output, [&](std::ostream& out) { io::write_ranked_lists(out, result.lists, input.ids); });
  report_run(s, input, result);
  return 0;
}

int cmd_fuse(const Settings& s) {
  const auto config = config_from(s, "fuse");
  const auto rankers = load_rankers(s, config);
  if (rankers.size() < 2) throw UsageError("fuse needs at least two rankers");
  std::vector<RankedListSet> sets;
  for (const auto& r : rankers) sets.push_back(r.lists);
  const auto result = run_aggregation(sets, config);
  emit(s.output, [&](std::ostream& out) { io::write_ranked_lists(out, result.lists, rankers.front().ids); });
  report_run(s, rankers.front(), result);
  return 0;
}

int cmd_embed(const Settings& s) {
  auto config = config_from(s, "embed");
  config.emit_embeddings = true;
  const auto input = load_single(s, config);
  const auto result = run_rfe(input.lists, config);
  emit(s.output, [&](std::ostream& out) { io::write_embeddings(out, *result.index.embeddings, input.ids); });
  return 0;
}

int cmd_index(const Settings& s) {
  if (s.output.empty() || s.output == "-") throw UsageError("index needs --output FILE");
  auto config = config_from(s, "index");
  config.emit_embeddings = s.with_embeddings;
  const auto input = load_single(s, config);
  const auto result = run_rfe(input.lists, config);
  io::save_index(s.output, io::StoredIndex{result.index, input.ids});
  std::cerr << "indexed " << input.lists.n << " objects (k=" << result.index.config.k
            << ", L=" << result.index.config.depth << ")\n";
  return 0;
}

int cmd_query(const Settings& s) {
  const auto stored = io::load_index(s.index);
  const auto& index = stored.index;
  const std::size_t n = index.size();
  auto collection_ids = stored.ids.empty() ? row_ids(n) : stored.ids;

  std::vector<DistanceRow> distances;
  std::vector<std::string> query_ids;
  if (!s.queries.empty()) {
    if (s.collection.empty()) throw UsageError("--queries needs --collection (the indexed feature table)");
    if (!s.distances.empty()) throw UsageError("give either --queries or --distances, not both");
    const auto collection = io::load_features(s.collection);
    if (collection.rows != n) fail(ErrorKind::DimensionMismatch, "collection size differs from the index");
    const auto queries = io::load_features(s.queries);
    distances = compute_distances(queries, collection, metric_of(s));
    for (std::size_t q = 0; q < queries.rows; ++q) query_ids.push_back(queries.ids.empty() ? "q" + std::to_string(q) : queries.ids[q]);
  } else if (s.distances.size() == 1) {
    distances = io::load_distance_matrix(s.distances.front());
    for (const auto& row : distances)
      if (row.size() != n) fail(ErrorKind::DimensionMismatch, "query distance rows must cover every indexed object");
    for (std::size_t q = 0; q < distances.size(); ++q) query_ids.push_back("q" + std::to_string(q));
  } else {
    throw UsageError("query needs --queries with --collection, or one --distances matrix");
  }

  const std::size_t k = was_given(s, "k@query") ? s.k : index.config.k;
  const std::size_t depth = was_given(s, "L@query") ? std::min(s.depth, n) : index.config.depth;
  RankedListSet results{distances.size(), n, {}};
  for (std::size_t q = 0; q < distances.size(); ++q) {
    auto ranked = query_unseen(index, distances[q], k);
    ranked.owner = static_cast<Index>(q);
    if (ranked.entries.size() > depth) ranked.entries.resize(depth);
    results.lists.push_back(std::move(ranked));
  }
  emit(s.output, [&](std::ostream& out) { io::write_ranked_lists(out, results, collection_ids, query_ids); });

  if (!s.labels.empty()) {
    const auto labels = io::load_labels(s.labels);
    const auto oracle = RelevanceOracle::query_gallery(labels.classes_for(query_ids), labels.classes_for(collection_ids));
    std::ostream& out = (s.output.empty() || s.output == "-") ? std::cerr : std::cout;
    metric_lines(out, "", results, oracle, s.at);
  }
  return 0;
}

int cmd_eval(const Settings& s) {
  if (s.lists.size() != 1) throw UsageError("eval needs exactly one --lists file");
  if (s.labels.empty()) throw UsageError("eval needs --labels");
  const auto file = io::load_ranked_lists(s.lists.front());
  const auto labels = io::load_labels(s.labels).classes_for(file.ids);
  const auto oracle = RelevanceOracle::from_labels(labels, self_mode_of(s));
  emit(s.output, [&](std::ostream& out) { metric_lines(out, "", file.lists, oracle, s.at); });
  return 0;
}

int cmd_synth(const Settings& s) {
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> centers(s.classes * s.dims);
  for (double& c : centers) c = s.spread * gauss(rng);
  FeatureTable table;
  table.dims = s.dims;
  std::ostringstream labels;
  for (std::size_t c = 0; c < s.classes; ++c)
    for (std::size_t p = 0; p < s.per_class; ++p) {
      for (std::size_t d = 0; d < s.dims; ++d) table.values.push_back(centers[c * s.dims + d] + s.noise * gauss(rng));
      table.ids.push_back("o" + std::to_string(table.rows));
      labels << table.ids.back() << ' ' << 'c' << c << '\n';
      ++table.rows;
    }
  emit(s.output, [&](std::ostream& out) { io::write_features_text(out, table); });
  if (!s.labels_out.empty()) emit(s.labels_out, [&](std::ostream& out) { out << labels.str(); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"rfe: rank flow embedding for unsupervised re-ranking"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", s.threads, "Worker threads (default: hardware concurrency)")->envname("RFE_THREADS");

  auto* rerank = app.add_subcommand("rerank", "Re-rank a collection and write the refined lists");
  add_inputs(rerank, s, false);
  add_tuning(rerank, s);
  add_evaluation(rerank, s);
  rerank->add_option("--output", s.output, "Ranked-list file (default stdout)");
  rerank->add_option("--report", s.report, "Write the metric report here instead of the console");

  auto* fuse = app.add_subcommand("fuse", "Aggregate several rankers, then re-rank");
  add_inputs(fuse, s, true);
  add_tuning(fuse, s);
  add_evaluation(fuse, s);
  fuse->add_option("--output", s.output, "Ranked-list file (default stdout)");
  fuse->add_option("--report", s.report, "Write the metric report here instead of the console");

  auto* embed = app.add_subcommand("embed", "Write classification embeddings, one row per object");
  add_inputs(embed, s, false);
  add_tuning(embed, s);
  embed->add_flag("--normalize", s.normalize, "L2-normalize each embedding row");
  embed->add_option("--output", s.output, "Embedding file (default stdout)");

  auto* index = app.add_subcommand("index", "Run the offline flow and save an index for unseen queries");
  add_inputs(index, s, false);
  add_tuning(index, s);
  index->add_flag("--with-embeddings", s.with_embeddings, "Store classification embeddings in the index");
  index->add_option("--output", s.output, "Index file")->required();

  auto* query = app.add_subcommand("query", "Rank indexed objects for queries outside the collection");
  query->add_option("--index", s.index, "Index written by 'rfe index'")->required();
  query->add_option("--queries", s.queries, "Query feature table");
  query->add_option("--collection", s.collection, "The feature table the index was built from");
  query->add_option("--distances", s.distances, "Query-by-collection distance matrix")->expected(1);
  query->add_option("--metric", s.metric, "euclidean (default) or cosine")
      ->envname("RFE_METRIC")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  s.given["k@query"] = query->add_option("--k", s.k, "Neighbors used to build the query hyperedge (default: index k)");
  s.given["L@query"] = query->add_option("--L", s.depth, "Entries written per query (default: index L)");
  query->add_option("--labels", s.labels, "Labels for queries and collection; prints P@K and friends");
  query->add_option("--at", s.at, "K for Precision@K and Recall@K (default 10)");
  query->add_option("--output", s.output, "Ranked-list file (default stdout)");

  auto* eval = app.add_subcommand("eval", "Score a ranked-list file against labels");
  eval->add_option("--lists", s.lists, "Ranked lists")->required()->expected(1);
  add_evaluation(eval, s);
  eval->add_option("--output", s.output, "Report file (default stdout)");

  auto* synth = app.add_subcommand("synth", "Write labeled Gaussian blobs for experiments");
  synth->add_option("--classes", s.classes, "Number of classes (default 10)");
  synth->add_option("--per-class", s.per_class, "Objects per class (default 100)");
  synth->add_option("--dims", s.dims, "Feature dimension (default 16)");
  synth->add_option("--spread", s.spread, "Std-dev of class centers (default 1.0)");
  synth->add_option("--noise", s.noise, "Std-dev around each center (default 1.0)");
  synth->add_option("--seed", s.seed, "Random seed (default 42)");
  synth->add_option("--labels-out", s.labels_out, "Also write a labels file");
  synth->add_option("--output", s.output, "Feature file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_thread_count(s.threads);
    if (rerank->parsed()) return cmd_rerank(s);
    if (fuse->parsed()) return cmd_fuse(s);
    if (embed->parsed()) return cmd_embed(s);
    if (index->parsed()) return cmd_index(s);
    if (query->parsed()) return cmd_query(s);
    if (eval->parsed()) return cmd_eval(s);
    if (synth->parsed()) return cmd_synth(s);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::Configuration ? 2 : 1;
  }
  return 0;
}
