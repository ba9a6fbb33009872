#include "grspec/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace grspec {

namespace {

constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

struct Option {
  const Rule* rule = nullptr;  // nullptr: a lexical entry
  std::string surface;
  const LexEntry* entry = nullptr;
  double weight = 1.0;
};

class Sampler {
 public:
  Sampler(const Grammar& g, std::uint64_t seed) : g_(g), rng_(seed) {
    for (const auto& [surface, entries] : g.lexicon().entries()) {
      for (const auto& e : entries) lex_[e.category].push_back({surface, &e});
    }
    for (const auto& r : g.rules()) by_lhs_[r.lhs].push_back(&r);
    min_depth_[1] = min_depths(true);
    min_depth_[0] = min_depths(false);
  }

  std::size_t min_depth(const CategoryTag& c, bool phrasal_only) const {
    const auto& m = min_depth_[phrasal_only ? 1 : 0];
    auto it = m.find(c);
    return it == m.end() ? kUnreachable : it->second;
  }

  Derivation sample(const CategoryTag& c, std::size_t budget, bool phrasal_only) {
    std::vector<Option> opts;
    double lex_weight = 0.0;
    if (auto it = lex_.find(c); it != lex_.end()) lex_weight = 1.0;
    if (auto it = by_lhs_.find(c); it != by_lhs_.end() && budget >= 1) {
      for (const Rule* r : it->second) {
        if (phrasal_only && !r->phrasal()) continue;
        const bool below_phrasal = phrasal_only || r->phrasal();
        bool fits = true;
        for (const auto& k : r->rhs) fits = fits && min_depth(k, below_phrasal) <= budget - 1;
        if (fits) opts.push_back({r, {}, nullptr, r->weight});
      }
    }
    double total = lex_weight;
    for (const auto& o : opts) total += o.weight;
    if (total <= 0.0) throw GrammarError("no expansion of " + c.str() + " fits the depth bound");
    double x = uniform() * total;
    if (x < lex_weight) {
      const auto& words = lex_.at(c);
      double lw = 0.0;
      for (const auto& w : words) lw += w.second->weight;
      double y = uniform() * lw;
      for (const auto& [surface, entry] : words) {
        if (y < entry->weight) return make_leaf(surface, entry->category, entry->word_class);
        y -= entry->weight;
      }
      const auto& [surface, entry] = words.back();
      return make_leaf(surface, entry->category, entry->word_class);
    }
    x -= lex_weight;
    const Rule* pick = opts.back().rule;
    for (const auto& o : opts) {
      if (x < o.weight) {
        pick = o.rule;
        break;
      }
      x -= o.weight;
    }
    const bool below_phrasal = phrasal_only || pick->phrasal();
    std::vector<Derivation> kids;
    kids.reserve(pick->rhs.size());
    for (const auto& k : pick->rhs) kids.push_back(sample(k, budget - 1, below_phrasal));
    return make_internal(pick->id, pick->lhs, std::move(kids));
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::map<CategoryTag, std::size_t> min_depths(bool phrasal_only) const {
    std::map<CategoryTag, std::size_t> m;
    for (const auto& [c, _] : lex_) m[c] = 0;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& r : g_.rules()) {
        if (phrasal_only && !r.phrasal()) continue;
        // Children of a phrasal rule are themselves phrasal-only.
        const auto& table = r.phrasal() && !phrasal_only ? min_depth_[1] : m;
        std::size_t d = 0;
        for (const auto& k : r.rhs) {
          auto it = table.find(k);
          if (it == table.end()) {
            d = kUnreachable;
            break;
          }
          d = std::max(d, it->second);
        }
        if (d == kUnreachable) continue;
        auto [it, inserted] = m.emplace(r.lhs, d + 1);
        if (!inserted && d + 1 < it->second) {
          it->second = d + 1;
          changed = true;
        } else if (inserted) {
          changed = true;
        }
      }
    }
    return m;
  }

  const Grammar& g_;
  std::mt19937_64 rng_;
  std::map<CategoryTag, std::vector<std::pair<std::string, const LexEntry*>>> lex_;
  std::map<CategoryTag, std::vector<const Rule*>> by_lhs_;
  std::map<CategoryTag, std::size_t> min_depth_[2];
};

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

}  // namespace

Corpus gen_corpus(const Grammar& grammar, const GenOptions& opts) {
  if (opts.max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
  Corpus out;
  if (opts.n == 0) return out;
  Sampler s(grammar, opts.seed);
  const CategoryTag& start = grammar.start_categories().front();
  if (s.min_depth(start, false) > opts.max_depth) {
    throw GrammarError("grammar cannot generate " + start.str() + " within depth " +
                       std::to_string(opts.max_depth));
  }
  out.reserve(opts.n);
  for (std::size_t i = 0; i < opts.n; ++i) {
    CorpusEntry e;
    e.id = opts.id_prefix + std::to_string(i + 1);
    e.tree = s.sample(start, opts.max_depth, false);
    e.sentence = join_tokens(yield_tokens(*e.tree));
    out.push_back(std::move(e));
  }
  return out;
}

std::map<std::size_t, std::size_t> length_histogram(const Corpus& corpus) {
  std::map<std::size_t, std::size_t> h;
  for (const auto& e : corpus) ++h[yield_tokens(*e.tree).size()];
  return h;
}

std::string to_json_line(const CorpusEntry& e) {
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["sentence"] = e.sentence;
  j["tree"] = to_string(e.tree);
  return j.dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& e : corpus) out << to_json_line(e) << '\n';
}

Corpus read_corpus(std::istream& in, const Grammar& grammar) {
  Corpus out;
  const auto lookup = lhs_lookup(grammar);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CorpusEntry e;
      e.id = j.at("id").get<std::string>();
      e.tree = parse_derivation(j.at("tree").get<std::string>(), lookup);
      e.sentence = j.contains("sentence") ? j["sentence"].get<std::string>() : join_tokens(yield_tokens(*e.tree));
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const std::invalid_argument& ex) {
      throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

Corpus load_corpus(const std::string& path, const Grammar& grammar) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open corpus '" + path + "'");
  return read_corpus(in, grammar);
}

}  // namespace grspec
