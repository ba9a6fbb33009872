#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "grspec/derivation.hpp"
#include "grspec/grammar.hpp"

namespace grspec {

struct CorpusEntry {
  std::string id;
  std::string sentence;  ///< space-separated tokens
  Derivation tree;       ///< gold derivation
};

using Corpus = std::vector<CorpusEntry>;

struct GenOptions {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// Bound on derivation height (leaves are height 0).
  std::size_t max_depth = 12;
  /// Prefix of generated utterance ids.
  std::string id_prefix = "u";
};

/// Draws derivations top-down from the first start category, choosing rules
/// by weight among those that can still finish within the depth bound.
/// Below a phrasal rule only phrasal rules are used, so every tree is one
/// the phrasal-then-full pipeline can build. Deterministic for a seed.
/// Throws GrammarError when nothing fits within max_depth.
Corpus gen_corpus(const Grammar& grammar, const GenOptions& opts);

/// Sentence length (tokens) -> count.
std::map<std::size_t, std::size_t> length_histogram(const Corpus& corpus);

/// JSON lines: {"id", "sentence", "tree"} with the tree in bracketed form.
std::string to_json_line(const CorpusEntry& e);
void write_corpus(std::ostream& out, const Corpus& corpus);
/// Throws std::invalid_argument naming the line on malformed input.
Corpus read_corpus(std::istream& in, const Grammar& grammar);
Corpus load_corpus(const std::string& path, const Grammar& grammar);

}  // namespace grspec
