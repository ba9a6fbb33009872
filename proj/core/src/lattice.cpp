#include "grspec/lattice.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "json.hpp"

namespace grspec {

void Lattice::validate() const {
  if (edges.empty() || n_vertices < 2) throw LatticeError("lattice '" + id + "' is empty");
  std::vector<bool> fwd(n_vertices, false), bwd(n_vertices, false);
  for (const auto& e : edges) {
    if (e.to >= n_vertices) throw LatticeError("lattice '" + id + "': vertex out of range");
    if (e.from >= e.to) throw LatticeError("lattice '" + id + "': edge from >= to");
    if (!(e.confidence > 0.0 && e.confidence <= 1.0)) {
      throw LatticeError("lattice '" + id + "': confidence outside (0,1]");
    }
    if (e.word.empty()) throw LatticeError("lattice '" + id + "': empty word");
  }
  // Edges sorted by from give a topological sweep.
  std::vector<const WordEdge*> by_from;
  for (const auto& e : edges) by_from.push_back(&e);
  std::sort(by_from.begin(), by_from.end(), [](auto* a, auto* b) { return a->from < b->from; });
  fwd[0] = true;
  for (const auto* e : by_from) if (fwd[e->from]) fwd[e->to] = true;
  bwd[n_vertices - 1] = true;
  for (auto it = by_from.rbegin(); it != by_from.rend(); ++it) {
    if (bwd[(*it)->to]) bwd[(*it)->from] = true;
  }
  for (std::size_t v = 0; v < n_vertices; ++v) {
    if (!fwd[v] || !bwd[v]) {
      throw LatticeError("lattice '" + id + "': vertex " + std::to_string(v) +
                         " is not on a source-to-sink path");
    }
  }
}

Lattice linear_lattice(std::string_view sentence, std::string id) {
  Lattice lat;
  lat.id = std::move(id);
  std::istringstream ss{std::string(sentence)};
  std::string tok;
  Vertex v = 0;
  while (ss >> tok) {
    lat.edges.push_back({v, v + 1, tok, 1.0});
    ++v;
  }
  lat.n_vertices = v == 0 ? 0 : v + 1;
  return lat;
}

Lattice parse_lattice_json(std::string_view line) {
  Lattice lat;
  try {
    auto j = nlohmann::json::parse(line);
    lat.id = j.value("id", std::string{});
    lat.n_vertices = j.at("n_vertices").get<std::size_t>();
    for (const auto& e : j.at("edges")) {
      lat.edges.push_back({e.at("from").get<Vertex>(), e.at("to").get<Vertex>(),
                           e.at("word").get<std::string>(), e.value("conf", 1.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw LatticeError(std::string("malformed lattice line: ") + e.what());
  }
  lat.validate();
  return lat;
}

std::string to_json_line(const Lattice& lattice) {
  nlohmann::json j;
  j["id"] = lattice.id;
  j["n_vertices"] = lattice.n_vertices;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : lattice.edges) {
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"word", e.word}, {"conf", e.confidence}});
  }
  return j.dump();
}

std::vector<Lattice> read_lattices(std::istream& in) {
  std::vector<Lattice> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_lattice_json(line));
  }
  return out;
}

}  // namespace grspec
