#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grspec/derivation.hpp"
#include "grspec/grammar.hpp"
#include "grspec/specialized.hpp"

namespace grspec {

struct NodeAnnotation {
  /// Every rule application in the subtree is phrasal (true for leaves).
  bool all_phrasal = false;
  /// all_phrasal and the parent (if any) is not.
  bool phrasal_subtree_root = false;
  /// Chunk type this node would root if the enclosing chunk cuts there.
  std::optional<ChunkType> chunk_type;
  /// The node roots a chunk under the new scheme.
  bool chunk_root = false;
};

struct AnnotatedNode {
  const DerivationNode* node = nullptr;
  NodeAnnotation ann;
  std::vector<AnnotatedNode> children;
};

struct AnnotatedTree {
  Derivation tree;
  AnnotatedNode root;
  /// Remarks worth surfacing in a training report (e.g. ambiguous adverbial nesting).
  std::vector<std::string> notes;
};

/// Annotates a gold tree with phrasal-subtree flags and chunk types. Throws
/// GrammarError naming the rule when an s_to_vp rule does not rewrite to a
/// single vp-kind category, std::invalid_argument on an invalid tree.
AnnotatedTree classify_nodes(const Derivation& tree, const Grammar& grammar);

/// A rule chunk: lhs -> rhs with the template of original rule
/// applications it abbreviates.
struct Chunk {
  std::optional<ChunkType> type;
  CategoryTag lhs;
  std::vector<CategoryTag> rhs;
  TemplateNode tmpl;

  /// Canonical form used for deduplication.
  std::string key() const;
};

/// Cuts an annotated tree into chunks, parents before children.
std::vector<Chunk> extract_chunks(const AnnotatedTree& tree, const Grammar& grammar, ChunkScheme scheme);

/// One macro rule per distinct chunk, ids ebl1, ebl2, ... in order of first
/// appearance. Throws GrammarError if a chunk breaks the dominance order
/// (new scheme) or a generated id collides with an original rule id.
SpecializedGrammar synthesize(const std::vector<Chunk>& chunks, const Grammar& grammar, ChunkScheme scheme);

struct SpecializedReport {
  ChunkScheme scheme = ChunkScheme::new_scheme;
  std::size_t macro_rules = 0;
  std::map<std::string, std::size_t> by_type;
  /// Chunk-type graph, used when every macro rule carries a type.
  std::optional<bool> type_graph_acyclic;
  /// Graph over macro lhs categories.
  bool category_graph_acyclic = true;
  /// Longest chain of nested macro rules (in rules); empty when cyclic.
  std::optional<std::size_t> depth;
  /// Phrasal rule applications found inside templates.
  std::size_t phrasal_in_templates = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string text() const;
};

/// Audits a specialized grammar. Violations: recursion or depth above six
/// for the new scheme; recursion is only reported for the other schemes.
SpecializedReport check_specialized(const SpecializedGrammar& sg, const Grammar& original);

}  // namespace grspec
