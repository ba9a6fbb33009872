#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace grspec {

using Vertex = std::size_t;

struct WordEdge {
  Vertex from = 0;
  Vertex to = 0;
  std::string word;
  double confidence = 1.0;
};

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Word hypothesis DAG with vertices 0..n_vertices-1, source 0 and sink n-1.
struct Lattice {
  std::string id;
  std::size_t n_vertices = 0;
  std::vector<WordEdge> edges;

  Vertex source() const { return 0; }
  Vertex sink() const { return n_vertices == 0 ? 0 : n_vertices - 1; }

  /// Throws LatticeError unless: at least one edge, from < to, confidences in
  /// (0,1], every vertex on some source-to-sink path.
  void validate() const;
};

/// Linear lattice over whitespace-separated tokens, all confidences 1.
Lattice linear_lattice(std::string_view sentence, std::string id = {});

/// One JSON object per line: {"id", "n_vertices", "edges": [{"from","to","word","conf"}]}.
Lattice parse_lattice_json(std::string_view line);
std::string to_json_line(const Lattice& lattice);
std::vector<Lattice> read_lattices(std::istream& in);

}  // namespace grspec
