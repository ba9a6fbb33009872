#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grspec/corpus.hpp"
#include "grspec/ebl.hpp"
#include "grspec/grammar.hpp"
#include "grspec/lattice.hpp"
#include "grspec/parser.hpp"
#include "grspec/prune_model.hpp"
#include "grspec/pruner.hpp"
#include "grspec/specialized.hpp"

namespace grspec {

struct PipelineConfig {
  bool prune = false;
  bool specialized = false;
  ChunkScheme scheme = ChunkScheme::new_scheme;
  double fraction1 = 1.0 / 20.0;
  double fraction2 = 1.0 / 150.0;
  double timeout_s = 90.0;
  std::uint64_t seed = 0;
  std::size_t depth_cap = 32;

  /// Throws std::invalid_argument unless 0 < fraction2 < fraction1 < 1 and timeout_s > 0.
  void validate() const;
  /// "E-P-", "E+P-", "E-P+" or "E+P+" (E: specialized grammar, P: pruning).
  std::string name() const;
  static PipelineConfig from_name(const std::string& name);
};

/// Seconds of wall-clock time per phase.
struct PhaseTimes {
  double lexical = 0.0;
  double phrasal = 0.0;
  double prune1 = 0.0;
  double prune2 = 0.0;
  double full = 0.0;
  double total() const { return lexical + phrasal + prune1 + prune2 + full; }
  PhaseTimes& operator+=(const PhaseTimes& o);
};

struct PipelineResult {
  std::vector<Analysis> analyses;
  PhaseTimes times;
  bool timed_out = false;
  PruneReport prune1;
  PruneReport prune2;
  std::size_t edges_after_phrasal = 0;
  std::vector<std::string> warnings;
};

/// Lexical pass, optional pruning, phrasal pass, optional pruning, full
/// pass with either the nonphrasal rules or the macro rules. Rule sets are
/// compiled once and reused across utterances.
class Pipeline {
 public:
  /// Throws std::invalid_argument when the config needs a model or a
  /// specialized grammar that is not given.
  Pipeline(const Grammar& grammar, const PruneModel* model, const SpecializedGrammar* sg,
           PipelineConfig config);

  PipelineResult run(const Lattice& lattice) const;
  const PipelineConfig& config() const { return config_; }

 private:
  const Grammar& grammar_;
  const PruneModel* model_;
  const SpecializedGrammar* sg_;
  PipelineConfig config_;
  std::shared_ptr<const RuleSet> phrasal_;
  std::shared_ptr<const RuleSet> full_;
  std::shared_ptr<const PruneScorer> scorer_;
};

struct TrainResult {
  PruneModel model;
  std::optional<SpecializedGrammar> specialized;
  SpecializedReport report;
  std::size_t utterances = 0;
  /// Utterances whose gold tree the unpruned pipeline could not rebuild.
  std::size_t irreproducible = 0;
  std::vector<std::string> notes;
};

/// Counts edge properties over the unpruned lexical and phrasal charts of
/// every training utterance. Model parameters are taken from `params`.
PruneModel train_prune_model(const Corpus& corpus, const Grammar& grammar, const PruneModel& params,
                             std::size_t* irreproducible = nullptr, std::vector<std::string>* notes = nullptr);

/// Chunks every gold tree and synthesizes the specialized grammar.
SpecializedGrammar specialize(const Corpus& corpus, const Grammar& grammar, ChunkScheme scheme,
                              std::vector<std::string>* notes = nullptr);

TrainResult train(const Corpus& corpus, const Grammar& grammar, ChunkScheme scheme,
                  const PruneModel& params = {});

struct UtteranceOutcome {
  std::string id;
  std::size_t analyses = 0;
  bool gold_found = false;
  bool timed_out = false;
  PhaseTimes times;
};

struct VariantReport {
  PipelineConfig config;
  std::vector<UtteranceOutcome> rows;

  std::size_t covered() const;
  std::size_t timeouts() const;
  double coverage() const;
  double mean_analyses() const;
  PhaseTimes mean_times() const;
};

struct EvalReport {
  /// The first variant is always the baseline (original grammar, no pruning).
  std::vector<VariantReport> variants;

  const VariantReport* find(const std::string& name) const;
  /// coverage(baseline) - coverage(variant) over all test utterances; signed.
  double coverage_loss(const VariantReport& v) const;
  /// Share of the utterances the baseline covers that the variant misses.
  double coverage_loss_parsable(const VariantReport& v) const;

  /// Per-phase mean seconds per utterance, one column per variant.
  std::string timing_table() const;
  /// One tab-separated record per line; contains no timings, so identical
  /// runs give identical bytes.
  std::string machine_report() const;
};

struct EvalOptions {
  /// Parse the first utterance once per variant before timing.
  bool warmup = true;
};

/// Runs every config over the test set. A baseline variant is prepended when
/// the configs do not start with one.
EvalReport evaluate(const Corpus& test, const Grammar& grammar, const PruneModel* model,
                    const SpecializedGrammar* sg, const std::vector<PipelineConfig>& configs,
                    const EvalOptions& opts = {});

/// The four combinations of pruning and specialization.
std::vector<PipelineConfig> all_variants(const PipelineConfig& base = {});

}  // namespace grspec
