#include "grspec/parser.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace grspec {

// ---------------------------------------------------------------------------
// RuleSet

int RuleSet::intern(const CategoryTag& c) {
  auto [it, inserted] = ids_.emplace(c, static_cast<int>(ids_.size()));
  if (inserted) graph_.emplace_back();
  return it->second;
}

int RuleSet::lookup(const CategoryTag& c) const {
  auto it = ids_.find(c);
  return it == ids_.end() ? -1 : it->second;
}

void RuleSet::add(const std::string& id, const CategoryTag& lhs, const std::vector<CategoryTag>& rhs) {
  const int lhs_id = intern(lhs);
  int node = 0;
  for (const auto& c : rhs) {
    const int cid = intern(c);
    graph_[static_cast<std::size_t>(lhs_id)].push_back(cid);
    auto it = trie_[static_cast<std::size_t>(node)].next.find(cid);
    if (it == trie_[static_cast<std::size_t>(node)].next.end()) {
      trie_.emplace_back();
      const int fresh = static_cast<int>(trie_.size()) - 1;
      trie_[static_cast<std::size_t>(node)].next.emplace(cid, fresh);
      node = fresh;
    } else {
      node = it->second;
    }
  }
  trie_[static_cast<std::size_t>(node)].complete.push_back(static_cast<int>(rules_.size()));
  rules_.push_back({id, lhs, lhs_id});
}

void RuleSet::finish() {
  enum { white, grey, black };
  std::vector<int> color(graph_.size(), white);
  std::function<bool(int)> visit = [&](int n) {
    color[static_cast<std::size_t>(n)] = grey;
    for (int m : graph_[static_cast<std::size_t>(n)]) {
      if (color[static_cast<std::size_t>(m)] == grey) return true;
      if (color[static_cast<std::size_t>(m)] == white && visit(m)) return true;
    }
    color[static_cast<std::size_t>(n)] = black;
    return false;
  };
  cyclic_ = false;
  for (std::size_t n = 0; n < graph_.size() && !cyclic_; ++n) {
    if (color[n] == white) cyclic_ = visit(static_cast<int>(n));
  }
}

RuleSet RuleSet::phrasal(const Grammar& g) {
  RuleSet rs(EdgeKind::phrasal, g.start_categories());
  for (const Rule* r : g.phrasal_rules()) rs.add(r->id, r->lhs, r->rhs);
  rs.finish();
  return rs;
}

RuleSet RuleSet::nonphrasal(const Grammar& g) {
  RuleSet rs(EdgeKind::full, g.start_categories());
  for (const Rule* r : g.nonphrasal_rules()) rs.add(r->id, r->lhs, r->rhs);
  rs.finish();
  return rs;
}

RuleSet RuleSet::macro(const SpecializedGrammar& sg) {
  RuleSet rs(EdgeKind::full, sg.start_categories());
  for (const auto& m : sg.macro_rules()) rs.add(m.id, m.lhs, m.rhs);
  rs.finish();
  return rs;
}

// ---------------------------------------------------------------------------
// Bottom-up engine
//
// Passive edges are processed by end vertex; within a vertex the agenda is
// FIFO seeded with existing edges in decreasing start order. A partial match
// (item) is a trie node plus the edges consumed so far, stored as a back
// pointer chain so items share prefixes.

class Engine {
 public:
  static PassStats run(Chart& chart, const RuleSet& rs, const PassOptions& opts) {
    Engine e(chart, rs, opts);
    if (opts.deadline && Clock::now() > *opts.deadline) {
      e.stats_.timed_out = true;
      return e.stats_;
    }
    e.execute();
    return e.stats_;
  }

 private:
  struct Item {
    int node;
    Vertex start;
    int prev;
    std::size_t edge;
  };

  Engine(Chart& chart, const RuleSet& rs, const PassOptions& opts)
      : chart_(chart), rs_(rs), opts_(opts), active_(chart.n_vertices()) {
    stats_.cap_enforced = rs.cyclic_;
  }

  void execute() {
    const std::size_t n = chart_.n_vertices();
    cat_.reserve(chart_.size() * 4);
    chart_.reserve(chart_.size() * 4);
    std::vector<std::vector<std::size_t>> seeds(n);
    for (std::size_t i = 0; i < chart_.size(); ++i) {
      const auto& e = chart_.edges()[i];
      cat_.push_back(rs_.lookup(e.category));
      seeds[e.end].push_back(i);
    }
    for (std::size_t v = 0; v < n && !stats_.timed_out; ++v) {
      auto& queue = seeds[v];
      std::stable_sort(queue.begin(), queue.end(), [this](std::size_t a, std::size_t b) {
        return chart_.edges()[a].start > chart_.edges()[b].start;
      });
      queue_ = &queue;
      vertex_ = v;
      for (std::size_t qi = 0; qi < queue.size() && !stats_.timed_out; ++qi) {
        const std::size_t idx = queue[qi];
        const int c = cat_[idx];
        if (c < 0) continue;
        const Vertex x = chart_.edges()[idx].start;
        const auto& root = rs_.trie_[0].next;
        if (auto it = root.find(c); it != root.end()) make(it->second, x, -1, idx);
        const auto& waiting = active_[x];
        for (std::size_t k = 0; k < waiting.size() && !stats_.timed_out; ++k) {
          const Item a = items_[static_cast<std::size_t>(waiting[k])];
          const auto& next = rs_.trie_[static_cast<std::size_t>(a.node)].next;
          if (auto it = next.find(c); it != next.end()) make(it->second, a.start, waiting[k], idx);
        }
      }
    }
  }

  void make(int node, Vertex start, int prev, std::size_t edge) {
    items_.push_back({node, start, prev, edge});
    const int id = static_cast<int>(items_.size()) - 1;
    const auto& tn = rs_.trie_[static_cast<std::size_t>(node)];
    if (!tn.next.empty()) active_[vertex_].push_back(id);
    if ((++work_ & 1023u) == 0 && opts_.deadline && Clock::now() > *opts_.deadline) {
      stats_.timed_out = true;
      return;
    }
    if (tn.complete.empty()) return;

    auto& kids_idx = kids_idx_;
    kids_idx.clear();
    for (int i = id; i >= 0; i = items_[static_cast<std::size_t>(i)].prev) {
      kids_idx.push_back(items_[static_cast<std::size_t>(i)].edge);
    }
    std::reverse(kids_idx.begin(), kids_idx.end());
    std::vector<Derivation> kids;
    kids.reserve(kids_idx.size());
    double score = 1.0, acoustic = 1.0;
    std::size_t d = 0;
    for (std::size_t k : kids_idx) {
      const auto& ce = chart_.edges()[k];
      kids.push_back(ce.derivation);
      score = std::min(score, ce.score);
      acoustic = std::min(acoustic, ce.acoustic);
      d = std::max(d, ce.depth);
    }
    ++d;
    for (int r : tn.complete) {
      const auto& rule = rs_.rules_[static_cast<std::size_t>(r)];
      if (stats_.cap_enforced && d > opts_.depth_cap) {
        ++stats_.capped;
        continue;
      }
      chart_.add(start, vertex_, rule.lhs, rs_.kind_, make_internal(rule.id, rule.lhs, kids), score,
                 acoustic, d);
      cat_.push_back(rule.lhs_id);
      queue_->push_back(chart_.size() - 1);
      ++stats_.edges_added;
    }
  }

  Chart& chart_;
  const RuleSet& rs_;
  const PassOptions& opts_;
  PassStats stats_;
  std::vector<Item> items_;
  std::vector<std::vector<int>> active_;
  std::vector<int> cat_;
  std::vector<std::size_t>* queue_ = nullptr;
  std::vector<std::size_t> kids_idx_;
  Vertex vertex_ = 0;
  std::size_t work_ = 0;
};

// ---------------------------------------------------------------------------
// Passes

Chart lexical_pass(const Lattice& lattice, const Grammar& grammar) {
  lattice.validate();
  Chart chart(lattice);
  const Lexicon& lex = grammar.lexicon();
  const std::size_t max_tokens = std::max<std::size_t>(lex.max_tokens(), 1);

  std::vector<std::vector<std::size_t>> out(lattice.n_vertices);
  for (std::size_t i = 0; i < lattice.edges.size(); ++i) out[lattice.edges[i].from].push_back(i);

  struct Found {
    Vertex start, end;
    const std::string* surface;
    const LexEntry* entry;
    double acoustic;
  };
  std::vector<Found> found;
  std::vector<bool> covered(lattice.edges.size(), false);
  std::vector<std::size_t> path;

  std::string surface;
  auto walk = [&](auto& self, Vertex start, Vertex at, double conf) -> void {
    const std::size_t len = surface.size();
    for (std::size_t wi : out[at]) {
      const WordEdge& w = lattice.edges[wi];
      if (len > 0) surface += ' ';
      surface += w.word;
      const double c = std::min(conf, w.confidence);
      path.push_back(wi);
      if (auto it = lex.entries().find(surface); it != lex.entries().end()) {
        for (const auto& e : it->second) found.push_back({start, w.to, &it->first, &e, c});
        for (std::size_t p : path) covered[p] = true;
      }
      if (path.size() < max_tokens && lex.continues(surface)) self(self, start, w.to, c);
      path.pop_back();
      surface.resize(len);
    }
  };
  for (Vertex s = 0; s < lattice.n_vertices; ++s) walk(walk, s, s, 1.0);

  // one edge per (start, end, category, surface, class), best acoustic
  auto key = [](const Found& f) {
    return std::tie(f.start, f.end, f.entry->category, *f.surface, f.entry->word_class);
  };
  std::sort(found.begin(), found.end(), [&](const Found& a, const Found& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < found.size();) {
    std::size_t j = i;
    double acoustic = 0.0;
    for (; j < found.size() && key(found[j]) == key(found[i]); ++j) acoustic = std::max(acoustic, found[j].acoustic);
    const LexEntry& e = *found[i].entry;
    chart.add(found[i].start, found[i].end, e.category, EdgeKind::lexical, make_leaf(*found[i].surface, e.category, e.word_class),
              1.0, acoustic, 0);
    i = j;
  }
  for (std::size_t i = 0; i < lattice.edges.size(); ++i) {
    if (!covered[i]) {
      const auto& w = lattice.edges[i];
      chart.warnings.push_back("no lexical analysis for \"" + w.word + "\" (" + std::to_string(w.from) +
                               "-" + std::to_string(w.to) + ")");
    }
  }
  return chart;
}

PassStats phrasal_pass(Chart& chart, const RuleSet& rules, const PassOptions& opts) {
  PassStats st = Engine::run(chart, rules, opts);
  if (st.capped > 0) {
    chart.warnings.push_back("phrasal pass: " + std::to_string(st.capped) +
                             " edges dropped at derivation depth cap " + std::to_string(opts.depth_cap));
  }
  return st;
}

PassStats phrasal_pass(Chart& chart, const Grammar& grammar, const PassOptions& opts) {
  return phrasal_pass(chart, RuleSet::phrasal(grammar), opts);
}

FullPassResult full_pass(const Chart& chart, const RuleSet& rules, const SpecializedGrammar* sg,
                         const PassOptions& opts) {
  return full_pass(Chart(chart), rules, sg, opts);
}

FullPassResult full_pass(Chart&& work, const RuleSet& rules, const SpecializedGrammar* sg,
                         const PassOptions& opts) {
  FullPassResult result;
  result.stats = Engine::run(work, rules, opts);
  if (result.stats.timed_out) return result;

  const auto& start = rules.start_categories();
  std::map<std::string, std::size_t> seen;
  ExpansionCache expanded;
  std::vector<std::pair<std::string, Analysis>> found;
  for (std::size_t idx : work.starting_at(work.source())) {
    const auto& e = work.edges()[idx];
    if (e.end != work.sink()) continue;
    if (std::find(start.begin(), start.end(), e.category) == start.end()) continue;
    Analysis a;
    a.derivation = sg ? expand_specialized_derivation(e.derivation, *sg, expanded) : e.derivation;
    a.category = a.derivation->category;
    a.score = e.score;
    std::string key = to_string(a.derivation);
    if (auto it = seen.find(key); it != seen.end()) {
      auto& prior = found[it->second].second;
      prior.score = std::max(prior.score, a.score);
      continue;
    }
    seen.emplace(key, found.size());
    found.emplace_back(std::move(key), std::move(a));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.second.score != b.second.score) return a.second.score > b.second.score;
    return a.first < b.first;
  });
  result.analyses.reserve(found.size());
  for (auto& [_, a] : found) result.analyses.push_back(std::move(a));
  return result;
}

FullPassResult full_pass(const Chart& chart, const Grammar& grammar, const PassOptions& opts) {
  return full_pass(chart, RuleSet::nonphrasal(grammar), nullptr, opts);
}

FullPassResult full_pass(const Chart& chart, const SpecializedGrammar& sg, const PassOptions& opts) {
  return full_pass(chart, RuleSet::macro(sg), &sg, opts);
}

}  // namespace grspec
