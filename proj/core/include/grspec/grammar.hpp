#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grspec/category.hpp"

namespace grspec {

enum class RuleClass { phrasal, nonphrasal };

/// Structural roles a nonphrasal rule can play for chunk extraction.
enum class Marker { s_to_vp, adverbial_modification, np_np_vp };

/// Coarse constituent kind attached to a category's major symbol.
enum class CategoryKind { utterance, utterance_unit, vp, np, rel, pp, other };

std::string_view to_string(RuleClass c);
std::string_view to_string(Marker m);
std::string_view to_string(CategoryKind k);
std::optional<Marker> marker_from_string(std::string_view s);
std::optional<CategoryKind> category_kind_from_string(std::string_view s);

struct Rule {
  std::string id;
  CategoryTag lhs;
  std::vector<CategoryTag> rhs;
  RuleClass rule_class = RuleClass::nonphrasal;
  std::set<Marker> markers;
  /// Relative sampling weight; only the corpus generator reads it.
  double weight = 1.0;

  bool has(Marker m) const { return markers.count(m) != 0; }
  bool phrasal() const { return rule_class == RuleClass::phrasal; }

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct LexEntry {
  CategoryTag category;
  std::string word_class;
  /// Relative sampling weight among the entries of a category; only the
  /// corpus generator reads it.
  double weight = 1.0;

  friend bool operator==(const LexEntry&, const LexEntry&) = default;
};

/// Full-form lexicon. Keys are surface strings; multiword keys are
/// space-separated tokens and match consecutive lattice words.
class Lexicon {
 public:
  /// Throws GrammarError if (surface, category) is already present.
  void add(const std::string& surface, LexEntry entry);

  const std::vector<LexEntry>* lookup(std::string_view surface) const;
  const std::map<std::string, std::vector<LexEntry>, std::less<>>& entries() const { return entries_; }
  /// Longest key length in tokens.
  std::size_t max_tokens() const { return max_tokens_; }
  /// True if some multiword key starts with the tokens of `prefix`.
  bool continues(std::string_view prefix) const { return prefixes_.find(prefix) != prefixes_.end(); }
  std::size_t size() const;

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  std::map<std::string, std::vector<LexEntry>, std::less<>> entries_;
  std::set<std::string, std::less<>> prefixes_;
  std::size_t max_tokens_ = 0;
};

/// Raised for malformed or inconsistent grammar input. line/column are 1-based,
/// 0 when the error is not tied to a source position.
class GrammarError : public std::runtime_error {
 public:
  GrammarError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// An immutable, validated context-free grammar with its lexicon.
class Grammar {
 public:
  Grammar(std::vector<Rule> rules, Lexicon lexicon,
          std::map<std::string, CategoryKind> kind_map,
          std::vector<CategoryTag> start_categories);

  const std::vector<Rule>& rules() const { return rules_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const std::map<std::string, CategoryKind>& kind_map() const { return kind_map_; }
  const std::vector<CategoryTag>& start_categories() const { return start_; }
  bool is_start(const CategoryTag& c) const;

  const Rule* find_rule(std::string_view id) const;
  /// Kind of a category by major symbol; `other` when unmapped.
  CategoryKind kind_of(const CategoryTag& c) const;

  /// Every category used by rules, lexicon or start set.
  const std::set<CategoryTag>& categories() const { return categories_; }

  std::vector<const Rule*> phrasal_rules() const;
  std::vector<const Rule*> nonphrasal_rules() const;
  std::size_t count(RuleClass c) const;

  /// True when the category graph of the phrasal rules has a cycle.
  bool phrasal_rules_cyclic() const { return phrasal_cyclic_; }

  /// FNV-1a checksum of the canonical serialization.
  std::uint64_t checksum() const { return checksum_; }
  std::string checksum_hex() const;

  friend bool operator==(const Grammar& a, const Grammar& b) {
    return a.rules_ == b.rules_ && a.lexicon_ == b.lexicon_ && a.kind_map_ == b.kind_map_ &&
           a.start_ == b.start_;
  }

 private:
  std::vector<Rule> rules_;
  Lexicon lexicon_;
  std::map<std::string, CategoryKind> kind_map_;
  std::vector<CategoryTag> start_;
  std::set<CategoryTag> categories_;
  std::unordered_map<std::string, std::size_t> rule_index_;
  bool phrasal_cyclic_ = false;
  std::uint64_t checksum_ = 0;
};

/// Parse the line-oriented grammar format:
///
///     rule <id> : <Cat> -> <Cat> ... {class: phrasal|nonphrasal[, marker: m][, refine: r][, weight: w]}
///     lex "<surface>" : <Cat>[/<refine>] class <word_class> [weight <w>]
///     chunktype <CatMajor> => utterance|utterance_unit|vp|np|rel|pp|other
///     start <Cat>
///
/// `#` starts a comment. Throws GrammarError with line/column.
Grammar parse_grammar_file(std::string_view text);
Grammar load_grammar(const std::string& path);

/// Canonical text form; parse_grammar_file(serialize(g)) == g.
std::string serialize(const Grammar& g);
std::string serialize_rule(const Rule& r, std::string_view extra_annotations = {});

/// Helpers shared by the grammar and specialized-grammar readers.
namespace detail {
struct LineCursor {
  std::string_view line;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  void skip_ws();
  bool at_end();
  bool consume(std::string_view lit);
  void expect(std::string_view lit);
  std::string symbol(std::string_view what);
  std::string quoted();
  std::string rest();
  [[noreturn]] void fail(const std::string& msg) const;
};

struct RuleAnnotations {
  std::optional<RuleClass> rule_class;
  std::set<Marker> markers;
  std::optional<std::string> refine;
  std::optional<double> weight;
  std::map<std::string, std::string> extra;
};

/// Parses `rule <id> : <lhs> -> <rhs...> {annotations}` after the `rule` keyword.
Rule parse_rule_line(LineCursor& cur, RuleAnnotations& ann,
                     const std::set<std::string>& extra_keys = {});
std::string_view strip_comment(std::string_view line);
}  // namespace detail

}  // namespace grspec
