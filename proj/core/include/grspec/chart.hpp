#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grspec/category.hpp"
#include "grspec/derivation.hpp"
#include "grspec/lattice.hpp"

namespace grspec {

enum class EdgeKind { lexical, phrasal, full };
std::string_view to_string(EdgeKind k);

struct ChartEdge {
  std::size_t id = 0;
  Vertex start = 0;
  Vertex end = 0;
  CategoryTag category;
  EdgeKind kind = EdgeKind::lexical;
  Derivation derivation;
  /// Estimated probability of belonging to the correct analysis.
  double score = 1.0;
  /// Minimum confidence of the lattice words the edge covers.
  double acoustic = 1.0;
  /// Height of the derivation (leaves are 0).
  std::size_t depth = 0;
};

/// Edge set over lattice vertices, indexed by start and end vertex.
class Chart {
 public:
  explicit Chart(Lattice lattice);
  /// Chart over bare vertices 0..n-1 with no lattice words (tests, oracles).
  explicit Chart(std::size_t n_vertices);

  const Lattice& lattice() const { return lattice_; }
  std::size_t n_vertices() const { return n_vertices_; }
  Vertex source() const { return 0; }
  Vertex sink() const { return n_vertices_ - 1; }

  const std::vector<ChartEdge>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }

  /// Appends an edge and assigns it a fresh id. Throws std::invalid_argument
  /// on a malformed span.
  const ChartEdge& add(Vertex start, Vertex end, CategoryTag category, EdgeKind kind,
                       Derivation derivation, double score = 1.0, double acoustic = 1.0,
                       std::optional<std::size_t> known_depth = std::nullopt);

  /// Indices into edges() of edges starting / ending at a vertex.
  const std::vector<std::size_t>& starting_at(Vertex v) const { return by_start_[v]; }
  const std::vector<std::size_t>& ending_at(Vertex v) const { return by_end_[v]; }

  void set_score(std::size_t index, double score) { edges_[index].score = score; }
  void reserve(std::size_t n) { edges_.reserve(n); }

  /// Removes matching edges and rebuilds the indexes. Returns the number removed.
  std::size_t remove_if(const std::function<bool(const ChartEdge&)>& pred);

  std::size_t count(EdgeKind k) const;

  std::vector<std::string> warnings;

 private:
  Lattice lattice_;
  std::size_t n_vertices_ = 0;
  std::vector<ChartEdge> edges_;
  std::vector<std::vector<std::size_t>> by_start_;
  std::vector<std::vector<std::size_t>> by_end_;
  std::size_t next_id_ = 0;
};

}  // namespace grspec
