#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "grspec/chart.hpp"
#include "grspec/grammar.hpp"
#include "grspec/lattice.hpp"
#include "grspec/specialized.hpp"

namespace grspec {

using Clock = std::chrono::steady_clock;

/// A rule set compiled for the bottom-up engine: right-hand sides are merged
/// into a prefix tree so rules sharing a prefix share partial matches.
class RuleSet {
 public:
  static RuleSet phrasal(const Grammar& g);
  static RuleSet nonphrasal(const Grammar& g);
  /// Macro rules of a specialized grammar.
  static RuleSet macro(const SpecializedGrammar& sg);

  EdgeKind produces() const { return kind_; }
  std::size_t size() const { return rules_.size(); }
  /// True when the lhs -> rhs category graph has a cycle; the engine then
  /// enforces the derivation depth cap.
  bool cyclic() const { return cyclic_; }
  const std::vector<CategoryTag>& start_categories() const { return start_; }

 private:
  friend class Engine;
  struct CompiledRule {
    std::string id;
    CategoryTag lhs;
    int lhs_id = -1;
  };
  struct TrieNode {
    std::unordered_map<int, int> next;
    std::vector<int> complete;
  };

  RuleSet(EdgeKind kind, std::vector<CategoryTag> start) : kind_(kind), start_(std::move(start)) {}
  void add(const std::string& id, const CategoryTag& lhs, const std::vector<CategoryTag>& rhs);
  void finish();
  int intern(const CategoryTag& c);
  int lookup(const CategoryTag& c) const;

  EdgeKind kind_;
  std::vector<CategoryTag> start_;
  std::vector<CompiledRule> rules_;
  std::vector<TrieNode> trie_{1};
  std::unordered_map<CategoryTag, int, CategoryTagHash> ids_;
  std::vector<std::vector<int>> graph_;
  bool cyclic_ = false;
};

struct PassOptions {
  std::optional<Clock::time_point> deadline;
  std::size_t depth_cap = 32;
};

struct PassStats {
  std::size_t edges_added = 0;
  /// Edges dropped by the depth cap.
  std::size_t capped = 0;
  bool cap_enforced = false;
  bool timed_out = false;
};

/// A complete parse: spans source to sink and roots at a start category.
struct Analysis {
  Derivation derivation;
  CategoryTag category;
  double score = 1.0;
};

struct FullPassResult {
  std::vector<Analysis> analyses;
  PassStats stats;
  bool timed_out() const { return stats.timed_out; }
};

/// Hypothesizes word analyses: one lexical edge per matched lexicon entry,
/// multiword entries matched over consecutive lattice words. Words with no
/// analysis are reported in chart.warnings. Throws LatticeError on an empty
/// or malformed lattice.
Chart lexical_pass(const Lattice& lattice, const Grammar& grammar);

/// Adds every edge derivable with the phrasal rules, to fixpoint.
PassStats phrasal_pass(Chart& chart, const Grammar& grammar, const PassOptions& opts = {});
PassStats phrasal_pass(Chart& chart, const RuleSet& rules, const PassOptions& opts = {});

/// Exhaustive search for complete analyses on top of the existing edges.
/// The chart itself is not modified. Analyses are ordered by score
/// (descending) and then by bracketed derivation.
FullPassResult full_pass(const Chart& chart, const Grammar& grammar, const PassOptions& opts = {});
/// Specialized variant; derivations are returned already expanded into the
/// original grammar's rules.
FullPassResult full_pass(const Chart& chart, const SpecializedGrammar& sg, const PassOptions& opts = {});
FullPassResult full_pass(const Chart& chart, const RuleSet& rules, const SpecializedGrammar* sg,
                         const PassOptions& opts = {});
/// Consumes the chart instead of copying it.
FullPassResult full_pass(Chart&& chart, const RuleSet& rules, const SpecializedGrammar* sg,
                         const PassOptions& opts = {});

}  // namespace grspec
