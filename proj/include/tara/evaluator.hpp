// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Retrieval splits over chiral action classes, rank-based metrics, and the
// companion evaluations (binary reversal, negation, multiple choice,
// nearest-centroid probe, composed queries, modality gap, ablation sweeps).
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tara/corpus.hpp"
#include "tara/embedding.hpp"
#include "tara/io.hpp"

namespace tara {

enum class ItemKind { video, text };
enum class Direction { t2v, v2t };
enum class Split { chiral, non_chiral, all };

std::string_view to_string(ItemKind k);
std::string_view to_string(Direction d);
std::string_view to_string(Split s);
ItemKind parse_item_kind(std::string_view s);
Direction parse_direction(std::string_view s);
Split parse_split(std::string_view s);

struct LabeledItem {
  std::string id;
  ItemKind kind = ItemKind::video;
  std::string class_label;
  std::optional<int> pair_id;
  std::optional<Side> side;  // present iff pair_id is
};

/// {"id","kind","class_label","pair_id","side"} per line.
std::vector<LabeledItem> load_items(const std::filesystem::path& path);

/// One query against the shared gallery. Candidates and relevant entries are
/// gallery indices; relevant is a non-empty subset of candidates. Queries
/// rank only their own candidates.
struct RetrievalQuery {
  std::string id;
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> relevant;
};

struct RetrievalTask {
  Direction direction = Direction::t2v;
  Split split = Split::all;
  std::vector<std::string> gallery;
  std::vector<RetrievalQuery> queries;

  std::vector<std::string> query_ids() const;
  /// Throws tara::Error when an invariant does not hold.
  void validate() const;
};

io::json to_json(const RetrievalTask& task);
RetrievalTask task_from_json(const io::json& j);

struct SplitSet {
  std::map<Split, RetrievalTask> tasks;
  std::vector<std::string> diagnostics;  // one line per dropped query
};

/// Queries are items of the source modality (texts for t2v, videos for v2t),
/// the gallery is every item of the other modality in input order.
///   chiral:     same class plus the opposite side of the query's pair
///   non_chiral: everything except the opposite side
///   all:        everything
SplitSet build_splits(const std::vector<LabeledItem>& items, Direction direction);

/// Candidates of query q sorted by descending similarity, ties by ascending
/// gallery index.
std::vector<std::size_t> rank_candidates(const SimilarityMatrix& sims, const RetrievalTask& task, std::size_t q);

std::vector<double> recall_per_query(const SimilarityMatrix& sims, const RetrievalTask& task, std::size_t k);
double recall_at_k(const SimilarityMatrix& sims, const RetrievalTask& task, std::size_t k);

std::vector<double> average_precision_per_query(const SimilarityMatrix& sims, const RetrievalTask& task);
double mean_average_precision(const SimilarityMatrix& sims, const RetrievalTask& task);

/// Two candidates and one relevant per query; a tie earns half credit.
std::vector<double> binary_per_query(const SimilarityMatrix& sims, const RetrievalTask& task);
double binary_accuracy(const SimilarityMatrix& sims, const RetrievalTask& task);

struct McqItem {
  std::vector<float> query;
  std::vector<std::vector<float>> choices;
  std::size_t answer = 0;
};

/// Fraction of items whose highest-cosine choice is the answer; ties go to
/// the lowest index.
double mcq_accuracy(std::span<const McqItem> items);

struct NegationResult {
  double r_at_k = 0.0;
  double r_neg_at_k = 0.0;
};

/// Row i of `negated` is the negated form of row i of `original`; both share
/// relevance[i] (gallery row indices).
NegationResult negation_eval(const EmbeddingMatrix& original, const EmbeddingMatrix& negated,
                             const EmbeddingMatrix& gallery, const std::vector<std::vector<std::size_t>>& relevance,
                             std::size_t k = 5);

/// Recall@k for precomputed composed (video + edit text) query vectors.
std::map<std::string, double> composed_retrieval(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                                                 const std::vector<std::vector<std::size_t>>& relevance,
                                                 const std::vector<std::size_t>& ks);

/// Task with every gallery row as candidate and the given relevant rows.
RetrievalTask full_gallery_task(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                                const std::vector<std::vector<std::size_t>>& relevance);

/// Class centroids are normalized means of the training rows; each test row
/// is assigned the class of its most similar centroid.
double nearest_centroid_probe(const EmbeddingMatrix& train, const std::vector<std::string>& train_labels,
                              const EmbeddingMatrix& test, const std::vector<std::string>& test_labels);

/// Euclidean distance between the two (unnormalized) mean embeddings.
double modality_gap(const EmbeddingMatrix& video, const EmbeddingMatrix& text);

struct EvalReport {
  std::string task;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, std::vector<double>> per_query;
  std::vector<std::string> query_ids;
};

/// Throws tara::Error when a metric lies outside its valid range.
void validate(const EvalReport& report);
io::json to_json(const EvalReport& report);
EvalReport report_from_json(const io::json& j);
/// "task,metric,value" rows.
std::string report_csv(const EvalReport& report);

/// Standard retrieval report: r_at_k for each k, map, and binary_acc when
/// every query has exactly two candidates.
EvalReport evaluate_retrieval(const SimilarityMatrix& sims, const RetrievalTask& task, const std::vector<std::size_t>& ks,
                              std::uint64_t seed = 0);

struct SweepGrid {
  std::vector<std::size_t> n;
  std::vector<double> alpha;
  std::vector<std::uint64_t> seeds;
};

struct SweepRow {
  std::size_t n = 0;
  double alpha = 0.0;
  std::optional<std::uint64_t> seed;  // absent on aggregate rows
  std::map<std::string, double> values;  // run rows: metric; aggregate rows: mean
  std::map<std::string, double> stddev;  // aggregate rows only
};

struct SweepTable {
  std::vector<SweepRow> runs;
  std::vector<SweepRow> aggregates;
};

using SweepPipeline = std::function<std::map<std::string, double>(std::size_t n, double alpha, std::uint64_t seed)>;

/// Runs the pipeline once per (n, alpha, seed) cell and aggregates mean and
/// sample standard deviation over seeds.
SweepTable ablation_sweep(const SweepGrid& grid, const SweepPipeline& pipeline);

/// "84.5 ±0.6"
std::string format_mean_std(double mean, double stddev, int precision);

/// Runs first, then aggregates: n,alpha,seed,row,<metrics...>.
std::string sweep_csv(const SweepTable& table);
/// Long form for plotting: n,alpha,metric,mean,std.
std::string sweep_plot_csv(const SweepTable& table);
/// Declarative line chart over the plot CSV.
std::string sweep_chart_spec(const std::string& plot_csv_name, const std::string& metric);

}  // namespace tara
