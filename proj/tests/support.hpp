#pragma once

// Fixtures, random instance generators and brute-force oracles shared by the
// test binaries. Nothing here calls into the library's search code.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "grspec/chart.hpp"
#include "grspec/derivation.hpp"
#include "grspec/grammar.hpp"
#include "grspec/lattice.hpp"

namespace grspec::testing {

#ifndef GRSPEC_TEST_DATA_DIR
#define GRSPEC_TEST_DATA_DIR "data"
#endif

inline std::string data_path(const std::string& name) { return std::string(GRSPEC_TEST_DATA_DIR) + "/" + name; }

// UTT -> S -> VP -> V NP, NP -> Det N phrasal.
inline constexpr const char* kShowGrammar = R"(
start UTT
chunktype UTT => utterance
chunktype S => utterance_unit
chunktype VP => vp
chunktype NP => np
rule utt_s  : UTT -> S     {class: nonphrasal}
rule s_imp  : S -> VP      {class: nonphrasal, marker: s_to_vp}
rule vp_vnp : VP -> V NP   {class: nonphrasal}
rule np_det : NP -> Det N  {class: phrasal}
lex "show" : V class verb
lex "the" : Det class det
lex "flight" : N class noun
)";

inline constexpr const char* kShowGold = "(utt_s (s_imp (vp_vnp {show|V|verb} (np_det {the|Det|det} {flight|N|noun}))))";

inline double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// ---- maximin oracle --------------------------------------------------------

struct PathOracle {
  std::vector<double> vertex;                 // best path min through each vertex, 0 if none
  double best = 0.0;                          // best complete path score
  bool any_path = false;
  std::set<std::size_t> best_edges;           // edge ids on some best complete path
};

// Enumerates every source-to-sink edge sequence.
inline PathOracle enumerate_paths(const Chart& chart) {
  PathOracle o;
  o.vertex.assign(chart.n_vertices(), 0.0);
  std::vector<const ChartEdge*> stack;
  struct Found {
    double score;
    std::vector<const ChartEdge*> edges;
  };
  std::vector<Found> paths;
  std::function<void(Vertex, double)> walk = [&](Vertex v, double cur) {
    if (v == chart.sink()) {
      paths.push_back({cur, stack});
      return;
    }
    for (const auto& e : chart.edges()) {
      if (e.start != v) continue;
      stack.push_back(&e);
      walk(e.end, std::min(cur, e.score));
      stack.pop_back();
    }
  };
  if (chart.n_vertices() > 1) walk(chart.source(), 1.0);
  for (const auto& p : paths) {
    o.any_path = true;
    o.best = std::max(o.best, p.score);
    o.vertex[chart.source()] = std::max(o.vertex[chart.source()], p.score);
    for (const auto* e : p.edges) o.vertex[e->end] = std::max(o.vertex[e->end], p.score);
  }
  for (const auto& p : paths) {
    if (p.score != o.best) continue;
    for (const auto* e : p.edges) o.best_edges.insert(e->id);
  }
  return o;
}

// Random DAG over n vertices, edges from < to, uniform scores in (0,1].
inline Chart random_chart(std::mt19937_64& rng, std::size_t max_vertices = 8, std::size_t max_edges = 20) {
  const std::size_t n = 2 + rng() % (max_vertices - 1);
  const std::size_t m = 1 + rng() % max_edges;
  Chart c(n);
  for (std::size_t i = 0; i < m; ++i) {
    Vertex a = rng() % (n - 1);
    Vertex b = a + 1 + rng() % (n - 1 - a);
    double s = 1.0 - uniform01(rng);
    if (rng() % 8 == 0) s = 0.5;  // ties
    c.add(a, b, CategoryTag("X"), EdgeKind::lexical, make_leaf("w", CategoryTag("X"), "w"), s);
  }
  return c;
}

// ---- small grammars and derivation oracle ---------------------------------

struct SmallInstance {
  std::string grammar_text;
  std::vector<std::string> sentence;
};

// At most 10 rules over C0..C3 and preterminals T0..T2. Unary rules only go
// from Ci to Cj with j > i so there are no unary cycles. Rules whose rhs is
// never produced are dropped; C0 is the start and is always produced.
inline SmallInstance random_small_instance(std::mt19937_64& rng) {
  const int n_cats = 4, n_pre = 3, n_words = 4;
  auto cat = [](int i) { return "C" + std::to_string(i); };
  auto pre = [](int i) { return "T" + std::to_string(i); };
  struct R {
    int lhs;
    std::vector<std::string> rhs;
    bool phrasal;
  };
  std::vector<R> rules;
  const int n_rules = 3 + static_cast<int>(rng() % 8);
  for (int i = 0; i < n_rules; ++i) {
    R r;
    r.lhs = static_cast<int>(rng() % n_cats);
    const int len = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < len; ++k) {
      if (len == 1) {
        // unary: a preterminal, or a strictly later category
        if (r.lhs + 1 < n_cats && rng() % 2) {
          r.rhs.push_back(cat(r.lhs + 1 + static_cast<int>(rng() % (n_cats - r.lhs - 1))));
        } else {
          r.rhs.push_back(pre(static_cast<int>(rng() % n_pre)));
        }
      } else if (rng() % 2) {
        r.rhs.push_back(cat(static_cast<int>(rng() % n_cats)));
      } else {
        r.rhs.push_back(pre(static_cast<int>(rng() % n_pre)));
      }
    }
    r.phrasal = r.lhs == n_cats - 1 && rng() % 2;  // C3 rules may be phrasal
    rules.push_back(r);
  }
  // always give C0 a way in
  rules.push_back({0, {pre(0), cat(1 + static_cast<int>(rng() % (n_cats - 1)))}, false});
  rules.push_back({n_cats - 1, {pre(static_cast<int>(rng() % n_pre))}, true});
  rules.push_back({1, {pre(1)}, false});
  rules.push_back({2, {pre(2), pre(static_cast<int>(rng() % n_pre))}, false});
  if (rules.size() > 10) rules.erase(rules.begin(), rules.begin() + static_cast<long>(rules.size() - 10));

  // phrasal rules may only use phrasal-producible categories
  std::set<std::string> produced;
  for (int i = 0; i < n_pre; ++i) produced.insert(pre(i));
  bool changed = true;
  std::vector<bool> keep(rules.size(), false);
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (keep[i]) continue;
      bool ok = std::all_of(rules[i].rhs.begin(), rules[i].rhs.end(),
                            [&](const std::string& c) { return produced.count(c) != 0; });
      if (ok) {
        keep[i] = true;
        changed = true;
        produced.insert(cat(rules[i].lhs));
      }
    }
  }
  std::string text = "start C0\n";
  bool start_ok = false;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!keep[i]) continue;
    if (rules[i].lhs == 0) start_ok = true;
    text += "rule r" + std::to_string(i) + " : " + cat(rules[i].lhs) + " ->";
    for (const auto& c : rules[i].rhs) text += " " + c;
    text += rules[i].phrasal ? " {class: phrasal}\n" : " {class: nonphrasal}\n";
  }
  if (!start_ok) text += "rule rs : C0 -> T0 {class: nonphrasal}\n";
  for (int w = 0; w < n_words; ++w) {
    std::set<int> tags;
    tags.insert(w % n_pre);
    if (rng() % 2) tags.insert(static_cast<int>(rng() % n_pre));
    for (int t : tags) {
      text += "lex \"w" + std::to_string(w) + "\" : " + pre(t) + " class k" + std::to_string(t) + "\n";
    }
  }
  SmallInstance inst;
  inst.grammar_text = text;
  const std::size_t len = 1 + rng() % 5;
  for (std::size_t i = 0; i < len; ++i) inst.sentence.push_back("w" + std::to_string(rng() % n_words));
  return inst;
}

// Every derivation of a start category over the whole sentence in which no
// phrasal rule application dominates a nonphrasal one. Memoized on
// (category, from, to, phrasal-only).
class DerivationEnumerator {
 public:
  DerivationEnumerator(const Grammar& g, std::vector<std::string> words) : g_(g), words_(std::move(words)) {}

  std::set<std::string> analyses() {
    std::set<std::string> out;
    for (const auto& s : g_.start_categories()) {
      for (const auto& d : derive(s, 0, words_.size(), false)) out.insert(to_string(d));
    }
    return out;
  }

 private:
  using Key = std::tuple<CategoryTag, std::size_t, std::size_t, bool>;

  const std::vector<Derivation>& derive(const CategoryTag& c, std::size_t i, std::size_t j, bool phrasal_only) {
    Key key{c, i, j, phrasal_only};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Derivation> out;
    if (j == i + 1) {
      if (const auto* list = g_.lexicon().lookup(words_[i])) {
        for (const auto& e : *list) {
          if (e.category == c) out.push_back(make_leaf(words_[i], e.category, e.word_class));
        }
      }
    }
    for (const auto& r : g_.rules()) {
      if (r.lhs != c) continue;
      if (phrasal_only && !r.phrasal()) continue;
      const bool below = phrasal_only || r.phrasal();
      std::vector<Derivation> kids;
      split(r, 0, i, j, below, kids, out);
    }
    return memo_[key] = std::move(out);
  }

  void split(const Rule& r, std::size_t k, std::size_t from, std::size_t to, bool below, std::vector<Derivation>& kids,
             std::vector<Derivation>& out) {
    if (k == r.rhs.size()) {
      if (from == to) out.push_back(make_internal(r.id, r.lhs, kids));
      return;
    }
    const std::size_t rest = r.rhs.size() - k - 1;
    for (std::size_t mid = from + 1; mid + rest <= to; ++mid) {
      if (rest == 0 && mid != to) continue;
      const auto subs = derive(r.rhs[k], from, mid, below);  // copy: memo may rehash
      for (const auto& s : subs) {
        kids.push_back(s);
        split(r, k + 1, mid, to, below, kids, out);
        kids.pop_back();
      }
    }
  }

  const Grammar& g_;
  std::vector<std::string> words_;
  std::map<Key, std::vector<Derivation>> memo_;
};

}  // namespace grspec::testing
