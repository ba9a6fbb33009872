#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grspec/chart.hpp"
#include "grspec/derivation.hpp"
#include "grspec/grammar.hpp"
#include "grspec/prune_model.hpp"

namespace grspec {

/// Properties of one chart edge, as seen by each criterion.
struct EdgeProperties {
  std::vector<EdgeProperty> left;   ///< one per distinct left neighbour tag, or BOUNDARY
  std::vector<EdgeProperty> right;  ///< one per distinct right neighbour tag, or BOUNDARY
  EdgeProperty unigram;
};

/// Tag is the category; the anchor is the word class of a lexical edge and
/// the topmost rule id of anything else.
EdgeProperties edge_properties(const Chart& chart, const ChartEdge& e, PruneStage stage);

/// Gold constituents that count as correct at a pruning point. Before the
/// phrasal pass these are the gold word analyses; before the full pass they
/// are the edges the full parse consumes: roots of maximal all-phrasal
/// subtrees and the word analyses not inside one.
struct GoldConstituent {
  Vertex start = 0;
  Vertex end = 0;
  CategoryTag category;
  std::string derivation;  ///< bracketed form
  auto operator<=>(const GoldConstituent&) const = default;
};

/// Throws std::invalid_argument if gold is not valid under the grammar or
/// its yield cannot be read along a source-to-sink lattice path.
std::vector<GoldConstituent> gold_constituents(const Derivation& gold, const Lattice& lattice,
                                               const Grammar& grammar, PruneStage stage);

/// Training update. Every property of every edge gets created += 1; correct
/// is also incremented when the edge is a gold constituent and, for bigrams,
/// the neighbour with that tag is one too (BOUNDARY: no neighbour at all).
void observe(PruneModel& model, const Chart& chart, const Derivation& gold, const Grammar& grammar,
             PruneStage stage);

/// A model's estimates precomputed into hash tables, for scoring many charts.
class PruneScorer {
 public:
  explicit PruneScorer(const PruneModel& model);
  double estimate(Criterion c, std::string_view key) const;
  /// Id of a neighbour tag seen in a bigram key, or -1.
  int neighbour_id(std::string_view tag) const;
  /// Highest bigram estimate over the neighbour tag ids; `prefix` is a
  /// property key up to and including the last '|'. No neighbours means BOUNDARY.
  double best_bigram(Criterion c, std::string_view prefix, std::span<const int> neighbours) const;
  const PruneModel& model() const { return model_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  using Table = std::unordered_map<std::string, double, Hash, std::equal_to<>>;
  // neighbour id -> estimate, sorted by id
  using Neighbours = std::vector<std::pair<int, double>>;
  using BigramTable = std::unordered_map<std::string, Neighbours, Hash, std::equal_to<>>;
  PruneModel model_;
  Table tables_[3];
  BigramTable bigrams_[2];
  std::unordered_map<std::string, int, Hash, std::equal_to<>> neighbour_ids_;
  double unseen_ = 0.5;
};

/// min over criteria of estimate x acoustic. For bigrams the neighbour
/// tag giving the highest estimate is used.
double score_edge(const PruneModel& model, const Chart& chart, const ChartEdge& e, PruneStage stage);

/// Sets every edge's score with score_edge.
void score_chart(const PruneModel& model, Chart& chart, PruneStage stage);
void score_chart(const PruneScorer& scorer, Chart& chart, PruneStage stage);

/// For each vertex, the best min-edge-score over complete source-to-sink
/// paths through it; 0 for vertices on no complete path.
std::vector<double> vertex_best_path_scores(const Chart& chart);

struct PruneReport {
  bool applied = false;  ///< false when the chart had no complete path
  double best_path = 0.0;
  double threshold = 0.0;
  std::size_t removed = 0;
};

/// Lowers each edge score to its end vertices' path scores, then removes
/// edges scoring strictly below best_path x fraction. Without a complete
/// source-to-sink path the chart is left alone and a warning is recorded.
PruneReport prune(Chart& chart, double fraction);

/// score_chart followed by prune with the stage's fraction from the model.
PruneReport score_and_prune(const PruneModel& model, Chart& chart, PruneStage stage);
PruneReport score_and_prune(const PruneScorer& scorer, Chart& chart, PruneStage stage);

}  // namespace grspec
