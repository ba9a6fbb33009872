#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grspec/category.hpp"
#include "grspec/derivation.hpp"
#include "grspec/grammar.hpp"

namespace grspec {

/// Constituent types of a specialized grammar, highest first.
enum class ChunkType { utterance, utterance_unit, imperative_vp, non_phrasal_np, rel, vp_modifier, pp };

enum class ChunkScheme { new_scheme, old_scheme, whole_sentence, identity };

std::string_view to_string(ChunkType t);
std::string_view to_string(ChunkScheme s);
std::optional<ChunkType> chunk_type_from_string(std::string_view s);
/// Accepts `new|old|whole|identity` as well as the enum spellings.
std::optional<ChunkScheme> chunk_scheme_from_string(std::string_view s);

/// Strict dominance: utterance > utterance_unit > imperative_vp > non_phrasal_np
/// > {rel, vp_modifier} > pp, with rel and vp_modifier incomparable.
bool dominates(ChunkType upper, ChunkType lower);

/// Category standing for a chunk of `type` whose original root is `root`,
/// written `@<type>/<root>` (refinements of the root are joined with '.').
CategoryTag chunk_category(ChunkType type, const CategoryTag& root);
/// Recovers the chunk type of a chunk category, nullopt for ordinary categories.
std::optional<ChunkType> chunk_type_of(const CategoryTag& c);
/// The original category a chunk category stands for; identity otherwise.
CategoryTag original_category(const CategoryTag& c);

/// Skeleton of original rule applications with numbered frontier slots.
struct TemplateNode {
  int slot = -1;               ///< >= 0 for a frontier slot
  std::string rule_id;         ///< for rule applications
  CategoryTag category;        ///< lhs of rule_id, or the slot's original category
  std::vector<TemplateNode> children;

  bool is_slot() const { return slot >= 0; }
  friend bool operator==(const TemplateNode&, const TemplateNode&) = default;
};

/// `(rule child ...)` with slots written `$<n>`.
std::string to_string(const TemplateNode& t);
/// Reads a template; rule lhs categories come from `lookup`, slot categories
/// are filled by the caller (pass the macro rule's rhs).
TemplateNode parse_template(std::string_view text, const LhsLookup& lookup);
std::size_t count_slots(const TemplateNode& t);

struct MacroRule {
  std::string id;
  CategoryTag lhs;
  std::vector<CategoryTag> rhs;
  TemplateNode tmpl;
  std::optional<ChunkType> chunk_type;  ///< empty for identity-scheme rules

  friend bool operator==(const MacroRule&, const MacroRule&) = default;
};

/// Macro rules plus the untouched phrasal rules of the source grammar.
class SpecializedGrammar {
 public:
  SpecializedGrammar(ChunkScheme scheme, std::vector<MacroRule> macro_rules,
                     std::vector<Rule> phrasal_rules, std::string source_grammar_id,
                     std::vector<CategoryTag> start_categories);

  ChunkScheme scheme() const { return scheme_; }
  const std::vector<MacroRule>& macro_rules() const { return macro_rules_; }
  const std::vector<Rule>& phrasal_rules() const { return phrasal_rules_; }
  const std::string& source_grammar_id() const { return source_id_; }
  const std::vector<CategoryTag>& start_categories() const { return start_; }
  bool is_start(const CategoryTag& c) const;

  const MacroRule* find_macro(std::string_view id) const;

  friend bool operator==(const SpecializedGrammar& a, const SpecializedGrammar& b) {
    return a.scheme_ == b.scheme_ && a.macro_rules_ == b.macro_rules_ &&
           a.phrasal_rules_ == b.phrasal_rules_ && a.source_id_ == b.source_id_ && a.start_ == b.start_;
  }

 private:
  ChunkScheme scheme_;
  std::vector<MacroRule> macro_rules_;
  std::vector<Rule> phrasal_rules_;
  std::string source_id_;
  std::vector<CategoryTag> start_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Replaces every macro-rule application by its template with the children
/// substituted. Non-macro nodes (phrasal subtrees, leaves) are kept as is.
/// Throws std::runtime_error on a template/arity mismatch.
Derivation expand_specialized_derivation(const Derivation& tree, const SpecializedGrammar& sg);

/// Expansions of already visited nodes; lets analyses sharing subtrees
/// expand each shared node once.
using ExpansionCache = std::unordered_map<const DerivationNode*, Derivation>;
Derivation expand_specialized_derivation(const Derivation& tree, const SpecializedGrammar& sg,
                                         ExpansionCache& cache);

/// Lhs lookup covering macro rules and the original grammar's rules.
LhsLookup lhs_lookup(const SpecializedGrammar& sg, const Grammar& original);

std::string serialize(const SpecializedGrammar& sg);
/// Reads the serialized form; rejects files produced from a different grammar.
SpecializedGrammar parse_specialized_file(std::string_view text, const Grammar& original);
SpecializedGrammar load_specialized(const std::string& path, const Grammar& original);

}  // namespace grspec
