#include "grspec/pruner.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <span>
#include <stdexcept>

namespace grspec {

namespace {

std::string anchor_of(const ChartEdge& e) {
  return e.derivation->is_leaf() ? e.derivation->word_class : e.derivation->rule_id;
}

// Distinct tags of the edges at one side of a vertex, sorted.
std::vector<std::string> tags_at(const Chart& chart, const std::vector<std::size_t>& idx) {
  std::vector<std::string> tags;
  tags.reserve(idx.size());
  for (std::size_t i : idx) tags.push_back(chart.edges()[i].category.str());
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

struct NeighbourTags {
  std::vector<std::vector<std::string>> ending;    // per vertex
  std::vector<std::vector<std::string>> starting;  // per vertex
};

NeighbourTags neighbour_tags(const Chart& chart) {
  NeighbourTags nt;
  nt.ending.resize(chart.n_vertices());
  nt.starting.resize(chart.n_vertices());
  for (Vertex v = 0; v < chart.n_vertices(); ++v) {
    nt.ending[v] = tags_at(chart, chart.ending_at(v));
    nt.starting[v] = tags_at(chart, chart.starting_at(v));
  }
  return nt;
}

EdgeProperties properties_with(const ChartEdge& e, PruneStage stage, const NeighbourTags& nt) {
  EdgeProperties p;
  const std::string tag = e.category.str();
  const std::string anchor = anchor_of(e);
  const auto& lt = nt.ending[e.start];
  const auto& rt = nt.starting[e.end];
  if (lt.empty()) p.left.push_back(EdgeProperty::left(stage, tag, anchor, std::string(kBoundary)));
  for (const auto& t : lt) p.left.push_back(EdgeProperty::left(stage, tag, anchor, t));
  if (rt.empty()) p.right.push_back(EdgeProperty::right(stage, tag, anchor, std::string(kBoundary)));
  for (const auto& t : rt) p.right.push_back(EdgeProperty::right(stage, tag, anchor, t));
  p.unigram = EdgeProperty::unigram(stage, class_key(*e.derivation));
  return p;
}

std::size_t token_count(const std::string& surface) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : surface) {
    const bool space = c == ' ' || c == '\t';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

// Vertices along the first source-to-sink path spelling `tokens`, or empty.
std::vector<Vertex> match_path(const Lattice& lat, const std::vector<std::string>& tokens) {
  std::vector<std::vector<std::size_t>> out(lat.n_vertices);
  for (std::size_t i = 0; i < lat.edges.size(); ++i) out[lat.edges[i].from].push_back(i);
  std::vector<Vertex> path{lat.source()};
  std::set<std::pair<Vertex, std::size_t>> dead;
  std::function<bool(Vertex, std::size_t)> go = [&](Vertex v, std::size_t k) {
    if (k == tokens.size()) return v == lat.sink();
    if (dead.count({v, k})) return false;
    for (std::size_t i : out[v]) {
      const auto& w = lat.edges[i];
      if (w.word != tokens[k]) continue;
      path.push_back(w.to);
      if (go(w.to, k + 1)) return true;
      path.pop_back();
    }
    dead.insert({v, k});
    return false;
  };
  if (!go(lat.source(), 0)) return {};
  return path;
}

}  // namespace

EdgeProperties edge_properties(const Chart& chart, const ChartEdge& e, PruneStage stage) {
  NeighbourTags nt;
  nt.ending.resize(chart.n_vertices());
  nt.starting.resize(chart.n_vertices());
  nt.ending[e.start] = tags_at(chart, chart.ending_at(e.start));
  nt.starting[e.end] = tags_at(chart, chart.starting_at(e.end));
  return properties_with(e, stage, nt);
}

std::vector<GoldConstituent> gold_constituents(const Derivation& gold, const Lattice& lattice,
                                               const Grammar& grammar, PruneStage stage) {
  if (!gold) throw std::invalid_argument("gold derivation is empty");
  const auto report = validate_derivation(gold, grammar);
  if (!report.ok()) throw std::invalid_argument("gold derivation is invalid: " + report.summary());
  const auto tokens = yield_tokens(*gold);
  const auto verts = match_path(lattice, tokens);
  if (verts.empty()) throw std::invalid_argument("gold yield does not match any lattice path");

  std::vector<GoldConstituent> out;
  auto emit = [&](const DerivationNode& n, std::size_t from, std::size_t to) {
    out.push_back({verts[from], verts[to], n.category, to_string(n)});
  };
  // Returns (tokens covered, subtree is all phrasal).
  std::function<std::pair<std::size_t, bool>(const DerivationNode&, std::size_t)> walk =
      [&](const DerivationNode& n, std::size_t pos) -> std::pair<std::size_t, bool> {
    if (n.is_leaf()) {
      const std::size_t k = token_count(n.word);
      if (stage == PruneStage::lexical) emit(n, pos, pos + k);
      return {k, true};
    }
    const Rule* r = grammar.find_rule(n.rule_id);
    bool phrasal = r && r->phrasal();
    std::size_t k = 0;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::vector<bool> kid_phrasal;
    for (const auto& c : n.children) {
      auto [ck, cp] = walk(*c, pos + k);
      spans.emplace_back(pos + k, pos + k + ck);
      kid_phrasal.push_back(cp);
      phrasal = phrasal && cp;
      k += ck;
    }
    if (stage == PruneStage::phrasal && !phrasal) {
      // Children that are maximal phrasal subtrees (or bare leaves) are basis edges.
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (kid_phrasal[i]) emit(*n.children[i], spans[i].first, spans[i].second);
      }
    }
    return {k, phrasal};
  };
  auto [total, root_phrasal] = walk(*gold, 0);
  (void)total;
  if (stage == PruneStage::phrasal && root_phrasal) emit(*gold, 0, tokens.size());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void observe(PruneModel& model, const Chart& chart, const Derivation& gold, const Grammar& grammar,
             PruneStage stage) {
  const auto basis = gold_constituents(gold, chart.lattice(), grammar, stage);
  std::vector<bool> correct(chart.size(), false);
  for (std::size_t i = 0; i < chart.size(); ++i) {
    const auto& e = chart.edges()[i];
    for (const auto& g : basis) {
      if (g.start == e.start && g.end == e.end && g.category == e.category &&
          g.derivation == to_string(e.derivation)) {
        correct[i] = true;
        break;
      }
    }
  }
  // Tags of correct edges on each side of each vertex.
  std::vector<std::set<std::string>> correct_ending(chart.n_vertices()), correct_starting(chart.n_vertices());
  for (std::size_t i = 0; i < chart.size(); ++i) {
    if (!correct[i]) continue;
    const auto& e = chart.edges()[i];
    correct_ending[e.end].insert(e.category.str());
    correct_starting[e.start].insert(e.category.str());
  }

  const auto nt = neighbour_tags(chart);
  auto bump = [&](Criterion c, const EdgeProperty& p, bool ok) {
    auto& cell = model.table(c)[p.key()];
    ++cell.created;
    if (ok) ++cell.correct;
  };
  for (std::size_t i = 0; i < chart.size(); ++i) {
    const auto& e = chart.edges()[i];
    const auto props = properties_with(e, stage, nt);
    const bool ok = correct[i];
    for (const auto& p : props.left) {
      bump(Criterion::left, p, ok && (p.neighbour == kBoundary ? nt.ending[e.start].empty()
                                                                : correct_ending[e.start].count(p.neighbour) > 0));
    }
    for (const auto& p : props.right) {
      bump(Criterion::right, p, ok && (p.neighbour == kBoundary ? nt.starting[e.end].empty()
                                                                 : correct_starting[e.end].count(p.neighbour) > 0));
    }
    bump(Criterion::unigram, props.unigram, ok);
  }
}

namespace {

using TagList = std::span<const std::string* const>;

// Distinct tags per vertex side, stored flat with per-vertex offsets.
struct SideTags {
  std::vector<const std::string*> flat;
  std::vector<int> ids;              // parallel to flat, scorer path only
  std::vector<std::size_t> offset;  // n_vertices + 1
  TagList at(Vertex v) const { return {flat.data() + offset[v], offset[v + 1] - offset[v]}; }
  std::span<const int> ids_at(Vertex v) const { return {ids.data() + offset[v], offset[v + 1] - offset[v]}; }
};

struct ChartTags {
  std::vector<std::string> tag;  // per edge
  SideTags ending, starting;
};

SideTags side_tags(std::size_t n, std::vector<std::pair<Vertex, const std::string*>>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : *a.second < *b.second;
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first && *a.second == *b.second; }),
              pairs.end());
  SideTags s;
  s.flat.reserve(pairs.size());
  s.offset.assign(n + 1, 0);
  for (const auto& [v, t] : pairs) {
    s.flat.push_back(t);
    ++s.offset[v + 1];
  }
  for (std::size_t v = 0; v < n; ++v) s.offset[v + 1] += s.offset[v];
  return s;
}

ChartTags chart_tags(const Chart& chart) {
  ChartTags ct;
  ct.tag.reserve(chart.size());
  for (const auto& e : chart.edges()) ct.tag.push_back(e.category.str());
  std::vector<std::pair<Vertex, const std::string*>> ending, starting;
  ending.reserve(chart.size());
  starting.reserve(chart.size());
  for (std::size_t i = 0; i < chart.size(); ++i) {
    const auto& e = chart.edges()[i];
    ending.emplace_back(e.end, &ct.tag[i]);
    starting.emplace_back(e.start, &ct.tag[i]);
  }
  ct.ending = side_tags(chart.n_vertices(), ending);
  ct.starting = side_tags(chart.n_vertices(), starting);
  return ct;
}

// Bigram maximum through full property keys.
template <typename Estimate>
auto best_by_keys(const Estimate& est) {
  return [&est](Criterion c, std::string_view prefix, const SideTags& side, Vertex v) {
    const TagList tags = side.at(v);
    std::string key(prefix);
    if (tags.empty()) return est(c, key += kBoundary);
    double b = 0.0;
    for (const std::string* t : tags) {
      key.resize(prefix.size());
      b = std::max(b, est(c, key += *t));
    }
    return b;
  };
}

// Builds property keys in one reusable buffer; must agree with EdgeProperty::key().
template <typename Best, typename Estimate>
double score_with(const Best& best, const Estimate& est, const ChartEdge& e, const std::string& tag,
                  PruneStage stage, const ChartTags& ct, std::string& buf) {
  buf.assign(to_string(stage));
  buf += '|';
  buf += tag;
  buf += '|';
  buf += e.derivation->is_leaf() ? e.derivation->word_class : e.derivation->rule_id;
  buf += '|';
  const double l = best(Criterion::left, buf, ct.ending, e.start);
  const double r = best(Criterion::right, buf, ct.starting, e.end);
  buf.assign(to_string(stage));
  buf += '|';
  append_class_key(*e.derivation, buf);
  const double u = est(Criterion::unigram, buf);
  return std::min({l, r, u}) * e.acoustic;
}

template <typename Best, typename Estimate>
void score_all(const Best& best, const Estimate& est, Chart& chart, PruneStage stage,
               const PruneScorer* scorer = nullptr) {
  ChartTags ct = chart_tags(chart);
  if (scorer) {
    for (SideTags* side : {&ct.ending, &ct.starting}) {
      side->ids.reserve(side->flat.size());
      for (const std::string* t : side->flat) side->ids.push_back(scorer->neighbour_id(*t));
    }
  }
  std::vector<double> scores(chart.size());
  std::string buf;
  for (std::size_t i = 0; i < chart.size(); ++i) {
    scores[i] = score_with(best, est, chart.edges()[i], ct.tag[i], stage, ct, buf);
  }
  for (std::size_t i = 0; i < chart.size(); ++i) chart.set_score(i, scores[i]);
}

}  // namespace

PruneScorer::PruneScorer(const PruneModel& model) : model_(model) {
  model_.validate();
  unseen_ = std::max(model_.score_floor, model_.smoothing_a / model_.smoothing_b);
  for (auto c : {Criterion::left, Criterion::right, Criterion::unigram}) {
    auto& t = tables_[static_cast<int>(c)];
    t.reserve(model_.table(c).size());
    for (const auto& [k, _] : model_.table(c)) t.emplace(k, grspec::estimate(model_, c, k));
  }
  neighbour_ids_.emplace(std::string(kBoundary), 0);
  for (auto c : {Criterion::left, Criterion::right}) {
    auto& b = bigrams_[static_cast<int>(c)];
    for (const auto& [k, _] : model_.table(c)) {
      const auto bar = k.rfind('|');
      if (bar == std::string::npos) continue;  // not a property key; estimate() still serves it
      const int id =
          neighbour_ids_.emplace(k.substr(bar + 1), static_cast<int>(neighbour_ids_.size())).first->second;
      b[k.substr(0, bar + 1)].emplace_back(id, grspec::estimate(model_, c, k));
    }
    for (auto& [_, list] : b) std::sort(list.begin(), list.end());
  }
}

int PruneScorer::neighbour_id(std::string_view tag) const {
  auto it = neighbour_ids_.find(tag);
  return it == neighbour_ids_.end() ? -1 : it->second;
}

double PruneScorer::best_bigram(Criterion c, std::string_view prefix, std::span<const int> neighbours) const {
  const auto& t = bigrams_[static_cast<int>(c)];
  auto it = t.find(prefix);
  if (it == t.end()) return unseen_;
  const auto& list = it->second;
  auto lookup = [&](int id) {
    if (id < 0) return unseen_;
    auto pos = std::lower_bound(list.begin(), list.end(), id,
                                [](const auto& entry, int key) { return entry.first < key; });
    return pos != list.end() && pos->first == id ? pos->second : unseen_;
  };
  if (neighbours.empty()) return lookup(0);
  double b = 0.0;
  for (int n : neighbours) b = std::max(b, lookup(n));
  return b;
}

double PruneScorer::estimate(Criterion c, std::string_view key) const {
  const auto& t = tables_[static_cast<int>(c)];
  auto it = t.find(key);
  return it == t.end() ? unseen_ : it->second;
}

double score_edge(const PruneModel& model, const Chart& chart, const ChartEdge& e, PruneStage stage) {
  const ChartTags ct = chart_tags(chart);
  std::string buf;
  auto est = [&](Criterion c, const std::string& key) { return estimate(model, c, key); };
  return score_with(best_by_keys(est), est, e, e.category.str(), stage, ct, buf);
}

void score_chart(const PruneModel& model, Chart& chart, PruneStage stage) {
  auto est = [&](Criterion c, const std::string& key) { return estimate(model, c, key); };
  score_all(best_by_keys(est), est, chart, stage);
}

void score_chart(const PruneScorer& scorer, Chart& chart, PruneStage stage) {
  score_all(
      [&](Criterion c, std::string_view prefix, const SideTags& side, Vertex v) {
        return scorer.best_bigram(c, prefix, side.ids_at(v));
      },
      [&](Criterion c, const std::string& key) { return scorer.estimate(c, key); }, chart, stage, &scorer);
}

namespace {

struct Sweep {
  std::vector<double> fwd, bwd;
  std::vector<bool> reach_fwd, reach_bwd;
};

// Vertex numbering is topological (edges go from lower to higher vertices).
Sweep sweep(const Chart& chart) {
  const std::size_t n = chart.n_vertices();
  Sweep s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<bool>(n, false),
          std::vector<bool>(n, false)};
  if (n == 0) return s;
  s.fwd[chart.source()] = 1.0;
  s.reach_fwd[chart.source()] = true;
  for (Vertex v = 0; v < n; ++v) {
    for (std::size_t i : chart.ending_at(v)) {
      const auto& e = chart.edges()[i];
      if (!s.reach_fwd[e.start]) continue;
      s.reach_fwd[v] = true;
      s.fwd[v] = std::max(s.fwd[v], std::min(s.fwd[e.start], e.score));
    }
  }
  s.bwd[chart.sink()] = 1.0;
  s.reach_bwd[chart.sink()] = true;
  for (Vertex v = n; v-- > 0;) {
    for (std::size_t i : chart.starting_at(v)) {
      const auto& e = chart.edges()[i];
      if (!s.reach_bwd[e.end]) continue;
      s.reach_bwd[v] = true;
      s.bwd[v] = std::max(s.bwd[v], std::min(s.bwd[e.end], e.score));
    }
  }
  return s;
}

}  // namespace

std::vector<double> vertex_best_path_scores(const Chart& chart) {
  const Sweep s = sweep(chart);
  std::vector<double> out(chart.n_vertices(), 0.0);
  for (Vertex v = 0; v < out.size(); ++v) {
    if (s.reach_fwd[v] && s.reach_bwd[v]) out[v] = std::min(s.fwd[v], s.bwd[v]);
  }
  return out;
}

PruneReport prune(Chart& chart, double fraction) {
  PruneReport rep;
  const Sweep s = sweep(chart);
  if (chart.n_vertices() == 0 || !s.reach_fwd[chart.sink()]) {
    chart.warnings.push_back("prune skipped: chart has no complete path");
    return rep;
  }
  std::vector<double> vs(chart.n_vertices(), 0.0);
  for (Vertex v = 0; v < vs.size(); ++v) {
    if (s.reach_fwd[v] && s.reach_bwd[v]) vs[v] = std::min(s.fwd[v], s.bwd[v]);
  }
  rep.applied = true;
  rep.best_path = s.fwd[chart.sink()];
  rep.threshold = rep.best_path * fraction;
  for (std::size_t i = 0; i < chart.size(); ++i) {
    const auto& e = chart.edges()[i];
    chart.set_score(i, std::min({e.score, vs[e.start], vs[e.end]}));
  }
  const double t = rep.threshold;
  rep.removed = chart.remove_if([t](const ChartEdge& e) { return e.score < t; });
  return rep;
}

PruneReport score_and_prune(const PruneModel& model, Chart& chart, PruneStage stage) {
  score_chart(model, chart, stage);
  return prune(chart, stage == PruneStage::lexical ? model.fraction_phase1 : model.fraction_phase2);
}

PruneReport score_and_prune(const PruneScorer& scorer, Chart& chart, PruneStage stage) {
  score_chart(scorer, chart, stage);
  const auto& m = scorer.model();
  return prune(chart, stage == PruneStage::lexical ? m.fraction_phase1 : m.fraction_phase2);
}

}  // namespace grspec
