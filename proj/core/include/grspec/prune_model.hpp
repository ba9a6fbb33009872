#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace grspec {

enum class Criterion { left, right, unigram };

/// The two points at which the chart is pruned. Statistics are kept apart
/// per point because "correct" means different things: before phrasal
/// parsing every gold word analysis is needed, before full parsing only the
/// edges the full parse is built on.
enum class PruneStage { lexical, phrasal };

std::string_view to_string(Criterion c);
std::string_view to_string(PruneStage s);

/// Neighbour tag used when an edge has no neighbour on that side.
inline constexpr std::string_view kBoundary = "BOUNDARY";

/// A property of a chart edge that one criterion conditions on.
struct EdgeProperty {
  Criterion criterion = Criterion::unigram;
  PruneStage stage = PruneStage::lexical;
  std::string tag;        ///< bigrams: the edge's tag
  std::string anchor;     ///< bigrams: word class (lexical) or topmost rule id
  std::string neighbour;  ///< bigrams: neighbouring tag or BOUNDARY
  std::string tree_key;   ///< unigram: rule tree with word classes at leaves

  static EdgeProperty left(PruneStage s, std::string tag, std::string anchor, std::string left_tag);
  static EdgeProperty right(PruneStage s, std::string tag, std::string anchor, std::string right_tag);
  static EdgeProperty unigram(PruneStage s, std::string tree_key);

  /// Canonical key used in count tables and the model file.
  std::string key() const;
};

struct Counts {
  std::uint64_t created = 0;
  std::uint64_t correct = 0;

  friend bool operator==(const Counts&, const Counts&) = default;
};

/// Property key -> (created, correct). Ordered so serialization is stable.
using CountTable = std::map<std::string, Counts>;

struct PruneModel {
  CountTable left;
  CountTable right;
  CountTable unigram;
  double smoothing_a = 0.5;
  double smoothing_b = 1.0;
  double score_floor = 1e-6;
  double fraction_phase1 = 1.0 / 20.0;
  double fraction_phase2 = 1.0 / 150.0;

  CountTable& table(Criterion c);
  const CountTable& table(Criterion c) const;

  /// Throws std::invalid_argument unless 0 < phase2 < phase1 < 1,
  /// score_floor > 0, b > 0 and 0 <= a <= b.
  void validate() const;

  /// Adds another model's counts (counts form a commutative monoid).
  void merge(const PruneModel& other);

  std::size_t entries() const { return left.size() + right.size() + unigram.size(); }

  friend bool operator==(const PruneModel&, const PruneModel&) = default;
};

/// max(score_floor, (correct + a) / (created + b)); unseen properties count (0, 0).
double estimate(const PruneModel& model, const EdgeProperty& p);
double estimate(const PruneModel& model, Criterion c, const std::string& key);

/// Versioned text format: header with smoothing and fraction parameters,
/// then LEFT / RIGHT / UNIGRAM sections of `<key> <created> <correct>` lines.
std::string serialize(const PruneModel& model);
PruneModel parse_prune_model(std::string_view text);
PruneModel load_prune_model(const std::string& path);

}  // namespace grspec
