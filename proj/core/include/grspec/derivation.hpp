#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grspec/category.hpp"

namespace grspec {

class Grammar;

struct DerivationNode;
/// Derivations are immutable and share subtrees between chart edges.
using Derivation = std::shared_ptr<const DerivationNode>;

/// A rule application (rule_id non-empty) or a lexical leaf.
/// `category` is the root category: the rule's lhs, or the leaf's tag.
struct DerivationNode {
  CategoryTag category;
  std::string rule_id;
  std::vector<Derivation> children;
  std::string word;
  std::string word_class;

  bool is_leaf() const { return rule_id.empty(); }
};

Derivation make_leaf(std::string word, CategoryTag category, std::string word_class);
Derivation make_internal(std::string rule_id, CategoryTag lhs, std::vector<Derivation> children);

/// Bracketed form: `(rule child ...)` with leaves as `{word|Cat|class}`.
std::string to_string(const DerivationNode& d);
inline std::string to_string(const Derivation& d) { return to_string(*d); }

/// Same tree shape with word classes in place of words; used as a
/// statistics key so trees differing only in same-class words collide.
std::string class_key(const DerivationNode& d);
void append_class_key(const DerivationNode& d, std::string& out);

/// Looks up a rule's lhs category by id while reading bracketed trees.
using LhsLookup = std::function<std::optional<CategoryTag>(std::string_view rule_id)>;
LhsLookup lhs_lookup(const Grammar& g);

/// Inverse of to_string(). Throws std::invalid_argument on malformed text or unknown rules.
Derivation parse_derivation(std::string_view text, const LhsLookup& lookup);

/// Surface words of the leaves, left to right (multiword leaves stay whole).
std::vector<std::string> yield(const DerivationNode& d);
/// Yield split into single lattice tokens.
std::vector<std::string> yield_tokens(const DerivationNode& d);

std::size_t depth(const DerivationNode& d);
std::size_t count_leaves(const DerivationNode& d);

bool structurally_equal(const DerivationNode& a, const DerivationNode& b);

struct Violation {
  std::string path;  ///< e.g. "root/0/2"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks every node against the grammar: rule exists, lhs/arity/child
/// categories agree with the rule, and leaves are lexicon entries.
ValidationReport validate_derivation(const DerivationNode& tree, const Grammar& grammar);
inline ValidationReport validate_derivation(const Derivation& tree, const Grammar& grammar) {
  return validate_derivation(*tree, grammar);
}

}  // namespace grspec
