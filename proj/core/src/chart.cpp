#include "grspec/chart.hpp"

#include <stdexcept>

namespace grspec {

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::lexical: return "lexical";
    case EdgeKind::phrasal: return "phrasal";
    case EdgeKind::full: return "full";
  }
  return "?";
}

Chart::Chart(Lattice lattice)
    : lattice_(std::move(lattice)),
      n_vertices_(lattice_.n_vertices),
      by_start_(n_vertices_),
      by_end_(n_vertices_) {}

Chart::Chart(std::size_t n_vertices) : n_vertices_(n_vertices), by_start_(n_vertices), by_end_(n_vertices) {
  lattice_.n_vertices = n_vertices;
}

const ChartEdge& Chart::add(Vertex start, Vertex end, CategoryTag category, EdgeKind kind,
                            Derivation derivation, double score, double acoustic,
                            std::optional<std::size_t> known_depth) {
  if (start >= end || end >= n_vertices_) throw std::invalid_argument("chart edge with a malformed span");
  ChartEdge e;
  e.id = next_id_++;
  e.start = start;
  e.end = end;
  e.category = std::move(category);
  e.kind = kind;
  e.depth = known_depth ? *known_depth : (derivation ? depth(*derivation) : 0);
  e.derivation = std::move(derivation);
  e.score = score;
  e.acoustic = acoustic;
  by_start_[start].push_back(edges_.size());
  by_end_[end].push_back(edges_.size());
  edges_.push_back(std::move(e));
  return edges_.back();
}

std::size_t Chart::remove_if(const std::function<bool(const ChartEdge&)>& pred) {
  const std::size_t before = edges_.size();
  std::vector<ChartEdge> kept;
  kept.reserve(edges_.size());
  for (auto& e : edges_) {
    if (!pred(e)) kept.push_back(std::move(e));
  }
  edges_ = std::move(kept);
  for (auto& v : by_start_) v.clear();
  for (auto& v : by_end_) v.clear();
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    by_start_[edges_[i].start].push_back(i);
    by_end_[edges_[i].end].push_back(i);
  }
  return before - edges_.size();
}

std::size_t Chart::count(EdgeKind k) const {
  std::size_t n = 0;
  for (const auto& e : edges_) n += e.kind == k;
  return n;
}

}  // namespace grspec
