#include "grspec/ebl.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace grspec {

namespace {

bool nonphrasal_app(const DerivationNode& n, const Grammar& g) {
  if (n.is_leaf()) return false;
  const Rule* r = g.find_rule(n.rule_id);
  return r && !r->phrasal();
}

bool has_marker(const DerivationNode& n, const Grammar& g, Marker m) {
  if (n.is_leaf()) return false;
  const Rule* r = g.find_rule(n.rule_id);
  return r && r->has(m);
}

void check_markers(const Grammar& g) {
  for (const auto& r : g.rules()) {
    if (r.has(Marker::s_to_vp) && (r.rhs.size() != 1 || g.kind_of(r.rhs[0]) != CategoryKind::vp)) {
      throw GrammarError("rule " + r.id + " is marked s_to_vp but does not rewrite to a single vp category");
    }
  }
}

AnnotatedNode annotate(const DerivationNode& n, const Grammar& g) {
  AnnotatedNode a;
  a.node = &n;
  bool all = n.is_leaf() || !nonphrasal_app(n, g);
  for (const auto& c : n.children) {
    a.children.push_back(annotate(*c, g));
    all = all && a.children.back().ann.all_phrasal;
  }
  a.ann.all_phrasal = all;
  for (auto& c : a.children) c.ann.phrasal_subtree_root = c.ann.all_phrasal && !all;
  return a;
}

// Candidate types that depend only on the node itself.
void assign_local_types(AnnotatedNode& a, const Grammar& g) {
  const DerivationNode& n = *a.node;
  if (nonphrasal_app(n, g)) {
    switch (g.kind_of(n.category)) {
      case CategoryKind::utterance_unit: a.ann.chunk_type = ChunkType::utterance_unit; break;
      case CategoryKind::np: a.ann.chunk_type = ChunkType::non_phrasal_np; break;
      case CategoryKind::rel: a.ann.chunk_type = ChunkType::rel; break;
      case CategoryKind::pp: a.ann.chunk_type = ChunkType::pp; break;
      default: break;
    }
  }
  for (auto& c : a.children) assign_local_types(c, g);
}

// Types fixed by the parent application: imperative VPs and VP modifiers.
void assign_context_types(AnnotatedNode& a, const Grammar& g, std::vector<std::string>& notes) {
  const DerivationNode& n = *a.node;
  if (has_marker(n, g, Marker::np_np_vp)) {
    for (auto& c : a.children) {
      if (g.kind_of(c.node->category) == CategoryKind::vp && nonphrasal_app(*c.node, g)) {
        c.ann.chunk_type = ChunkType::vp_modifier;
      }
    }
  }
  if (has_marker(n, g, Marker::s_to_vp) && !a.children.empty()) {
    AnnotatedNode* v = &a.children[0];
    while (has_marker(*v->node, g, Marker::adverbial_modification)) {
      std::vector<AnnotatedNode*> vps;
      for (auto& c : v->children) {
        if (g.kind_of(c.node->category) == CategoryKind::vp) vps.push_back(&c);
      }
      if (vps.empty()) {
        v = nullptr;
        break;
      }
      if (vps.size() > 1) {
        notes.push_back("ambiguous imperative VP under " + v->node->rule_id + " in " + to_string(*a.node) +
                        "; first vp child taken");
      }
      v = vps.front();
    }
    if (v && nonphrasal_app(*v->node, g)) v->ann.chunk_type = ChunkType::imperative_vp;
  }
  for (auto& c : a.children) assign_context_types(c, g, notes);
}

bool new_scheme_cuts(ChunkType chunk, ChunkType at) {
  switch (chunk) {
    case ChunkType::utterance:
      return at == ChunkType::utterance_unit || at == ChunkType::non_phrasal_np || at == ChunkType::pp;
    case ChunkType::utterance_unit:
      return at == ChunkType::imperative_vp || at == ChunkType::non_phrasal_np || at == ChunkType::pp;
    case ChunkType::imperative_vp: return at == ChunkType::non_phrasal_np || at == ChunkType::pp;
    case ChunkType::non_phrasal_np:
      return at == ChunkType::rel || at == ChunkType::vp_modifier || at == ChunkType::pp;
    case ChunkType::rel:
    case ChunkType::vp_modifier: return at == ChunkType::pp;
    case ChunkType::pp: return false;
  }
  return false;
}

void mark_chunk_roots(AnnotatedNode& a, ChunkType current) {
  for (auto& c : a.children) {
    if (c.ann.all_phrasal) continue;
    if (c.ann.chunk_type && new_scheme_cuts(current, *c.ann.chunk_type)) {
      c.ann.chunk_root = true;
      mark_chunk_roots(c, *c.ann.chunk_type);
    } else {
      mark_chunk_roots(c, current);
    }
  }
}

// Decides, for a node below a chunk root, whether it is cut and with which
// rhs category and (optional) chunk type for the chunk it starts.
struct Cut {
  bool cut = false;
  CategoryTag category;
  std::optional<ChunkType> starts;
};

using CutFn = std::function<Cut(const AnnotatedNode&)>;

struct Builder {
  const CutFn& cut;
  std::vector<CategoryTag> rhs;
  std::vector<std::pair<const AnnotatedNode*, ChunkType>> below;

  TemplateNode build(const AnnotatedNode& a) {
    TemplateNode t;
    t.rule_id = a.node->rule_id;
    t.category = a.node->category;
    for (const auto& c : a.children) {
      const Cut k = cut(c);
      if (k.cut) {
        TemplateNode s;
        s.slot = static_cast<int>(rhs.size());
        s.category = c.node->category;
        rhs.push_back(k.category);
        if (k.starts) below.emplace_back(&c, *k.starts);
        t.children.push_back(std::move(s));
      } else if (c.node->is_leaf()) {
        throw std::logic_error("chunk extraction reached an uncut leaf");
      } else {
        t.children.push_back(build(c));
      }
    }
    return t;
  }
};

void extract_from(const AnnotatedNode& root, ChunkType type, const CutFn& cut, std::vector<Chunk>& out) {
  Builder b{cut, {}, {}};
  Chunk ch;
  ch.type = type;
  ch.lhs = chunk_category(type, root.node->category);
  if (type == ChunkType::utterance && root.ann.all_phrasal) {
    ch.tmpl.slot = 0;
    ch.tmpl.category = root.node->category;
    ch.rhs = {root.node->category};
    out.push_back(std::move(ch));
    return;
  }
  ch.tmpl = b.build(root);
  ch.rhs = std::move(b.rhs);
  out.push_back(std::move(ch));
  for (const auto& [node, t] : b.below) extract_from(*node, t, cut, out);
}

void identity_chunks(const AnnotatedNode& a, const Grammar& g, std::vector<Chunk>& out) {
  if (nonphrasal_app(*a.node, g)) {
    Chunk ch;
    ch.lhs = a.node->category;
    ch.tmpl.rule_id = a.node->rule_id;
    ch.tmpl.category = a.node->category;
    for (const auto& c : a.children) {
      TemplateNode s;
      s.slot = static_cast<int>(ch.rhs.size());
      s.category = c.node->category;
      ch.rhs.push_back(c.node->category);
      ch.tmpl.children.push_back(std::move(s));
    }
    out.push_back(std::move(ch));
  }
  for (const auto& c : a.children) identity_chunks(c, g, out);
}

}  // namespace

AnnotatedTree classify_nodes(const Derivation& tree, const Grammar& grammar) {
  if (!tree) throw std::invalid_argument("empty derivation");
  const auto report = validate_derivation(tree, grammar);
  if (!report.ok()) throw std::invalid_argument("derivation is invalid: " + report.summary());
  check_markers(grammar);
  AnnotatedTree at;
  at.tree = tree;
  at.root = annotate(*tree, grammar);
  at.root.ann.phrasal_subtree_root = at.root.ann.all_phrasal;
  assign_local_types(at.root, grammar);
  assign_context_types(at.root, grammar, at.notes);
  at.root.ann.chunk_type = ChunkType::utterance;
  at.root.ann.chunk_root = true;
  if (!at.root.ann.all_phrasal) mark_chunk_roots(at.root, ChunkType::utterance);
  return at;
}

std::string Chunk::key() const {
  std::string k = lhs.str() + " ->";
  for (const auto& c : rhs) k += " " + c.str();
  return k + " : " + to_string(tmpl);
}

std::vector<Chunk> extract_chunks(const AnnotatedTree& tree, const Grammar& grammar, ChunkScheme scheme) {
  std::vector<Chunk> out;
  const AnnotatedNode& root = tree.root;
  switch (scheme) {
    case ChunkScheme::identity:
      identity_chunks(root, grammar, out);
      break;
    case ChunkScheme::whole_sentence: {
      CutFn cut = [](const AnnotatedNode& c) {
        return c.ann.all_phrasal ? Cut{true, c.node->category, std::nullopt} : Cut{};
      };
      extract_from(root, ChunkType::utterance, cut, out);
      break;
    }
    case ChunkScheme::new_scheme: {
      CutFn cut = [](const AnnotatedNode& c) {
        if (c.ann.all_phrasal) return Cut{true, c.node->category, std::nullopt};
        if (c.ann.chunk_root) {
          return Cut{true, chunk_category(*c.ann.chunk_type, c.node->category), c.ann.chunk_type};
        }
        return Cut{};
      };
      extract_from(root, ChunkType::utterance, cut, out);
      break;
    }
    case ChunkScheme::old_scheme: {
      // Roots at maximal np and pp subtrees; phrasal rules stay inside chunks.
      std::unordered_map<const DerivationNode*, CategoryKind> parent_kind;
      std::function<void(const AnnotatedNode&)> index = [&](const AnnotatedNode& a) {
        for (const auto& c : a.children) {
          parent_kind[c.node] = grammar.kind_of(a.node->category);
          index(c);
        }
      };
      index(root);
      CutFn cut = [&](const AnnotatedNode& c) {
        if (c.node->is_leaf()) return Cut{true, c.node->category, std::nullopt};
        const CategoryKind k = grammar.kind_of(c.node->category);
        if ((k == CategoryKind::np || k == CategoryKind::pp) && parent_kind[c.node] != k) {
          const ChunkType t = k == CategoryKind::np ? ChunkType::non_phrasal_np : ChunkType::pp;
          return Cut{true, chunk_category(t, c.node->category), t};
        }
        return Cut{};
      };
      if (root.node->is_leaf()) {
        Chunk ch;
        ch.type = ChunkType::utterance;
        ch.lhs = chunk_category(ChunkType::utterance, root.node->category);
        ch.tmpl.slot = 0;
        ch.tmpl.category = root.node->category;
        ch.rhs = {root.node->category};
        out.push_back(std::move(ch));
      } else {
        Builder b{cut, {}, {}};
        Chunk ch;
        ch.type = ChunkType::utterance;
        ch.lhs = chunk_category(ChunkType::utterance, root.node->category);
        ch.tmpl = b.build(root);
        ch.rhs = std::move(b.rhs);
        out.push_back(std::move(ch));
        for (const auto& [node, t] : b.below) extract_from(*node, t, cut, out);
      }
      break;
    }
  }
  return out;
}

SpecializedGrammar synthesize(const std::vector<Chunk>& chunks, const Grammar& grammar, ChunkScheme scheme) {
  std::vector<MacroRule> macros;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& ch : chunks) {
    if (scheme == ChunkScheme::new_scheme && ch.type) {
      for (const auto& c : ch.rhs) {
        if (auto t = chunk_type_of(c); t && !dominates(*ch.type, *t)) {
          throw GrammarError("chunk " + ch.key() + " violates the chunk type dominance order (" +
                             std::string(to_string(*ch.type)) + " over " + std::string(to_string(*t)) + ")");
        }
      }
    }
    auto [it, inserted] = seen.emplace(ch.key(), macros.size());
    if (!inserted) continue;
    MacroRule m;
    m.id = "ebl" + std::to_string(macros.size() + 1);
    if (grammar.find_rule(m.id)) {
      throw GrammarError("generated macro rule id " + m.id + " collides with a grammar rule");
    }
    m.lhs = ch.lhs;
    m.rhs = ch.rhs;
    m.tmpl = ch.tmpl;
    m.chunk_type = ch.type;
    macros.push_back(std::move(m));
  }
  std::vector<Rule> phrasal;
  for (const Rule* r : grammar.phrasal_rules()) phrasal.push_back(*r);
  std::vector<CategoryTag> start;
  for (const auto& s : grammar.start_categories()) {
    start.push_back(scheme == ChunkScheme::identity ? s : chunk_category(ChunkType::utterance, s));
  }
  return SpecializedGrammar(scheme, std::move(macros), std::move(phrasal), grammar.checksum_hex(),
                            std::move(start));
}

namespace {

// Longest path (in nodes) in a DAG given as adjacency sets; nullopt when cyclic.
template <typename Node>
std::optional<std::size_t> longest_chain(const std::map<Node, std::set<Node>>& graph) {
  std::map<Node, int> state;  // 1 = on stack, 2 = done
  std::map<Node, std::size_t> memo;
  bool cyclic = false;
  std::function<std::size_t(const Node&)> visit = [&](const Node& n) -> std::size_t {
    auto& s = state[n];
    if (s == 2) return memo[n];
    if (s == 1) {
      cyclic = true;
      return 0;
    }
    s = 1;
    std::size_t best = 0;
    if (auto it = graph.find(n); it != graph.end()) {
      for (const auto& m : it->second) best = std::max(best, visit(m));
    }
    state[n] = 2;
    return memo[n] = best + 1;
  };
  std::size_t depth = 0;
  for (const auto& [n, _] : graph) depth = std::max(depth, visit(n));
  if (cyclic) return std::nullopt;
  return depth;
}

std::size_t count_phrasal(const TemplateNode& t, const Grammar& g) {
  if (t.is_slot()) return 0;
  std::size_t n = 0;
  if (const Rule* r = g.find_rule(t.rule_id); r && r->phrasal()) ++n;
  for (const auto& c : t.children) n += count_phrasal(c, g);
  return n;
}

}  // namespace

SpecializedReport check_specialized(const SpecializedGrammar& sg, const Grammar& original) {
  SpecializedReport rep;
  rep.scheme = sg.scheme();
  rep.macro_rules = sg.macro_rules().size();

  std::set<CategoryTag> macro_lhs;
  bool all_typed = !sg.macro_rules().empty();
  for (const auto& m : sg.macro_rules()) {
    macro_lhs.insert(m.lhs);
    all_typed = all_typed && m.chunk_type.has_value();
    ++rep.by_type[m.chunk_type ? std::string(to_string(*m.chunk_type)) : std::string("untyped")];
    rep.phrasal_in_templates += count_phrasal(m.tmpl, original);
  }

  std::map<CategoryTag, std::set<CategoryTag>> cat_graph;
  std::map<ChunkType, std::set<ChunkType>> type_graph;
  for (const auto& m : sg.macro_rules()) {
    auto& out = cat_graph[m.lhs];
    if (m.chunk_type) type_graph[*m.chunk_type];
    for (const auto& c : m.rhs) {
      if (!macro_lhs.count(c)) continue;
      out.insert(c);
      if (m.chunk_type) {
        if (auto t = chunk_type_of(c)) type_graph[*m.chunk_type].insert(*t);
      }
    }
  }
  rep.depth = longest_chain(cat_graph);
  rep.category_graph_acyclic = rep.depth.has_value();
  if (all_typed) rep.type_graph_acyclic = longest_chain(type_graph).has_value();

  if (sg.scheme() == ChunkScheme::new_scheme) {
    if (!rep.category_graph_acyclic || (rep.type_graph_acyclic && !*rep.type_graph_acyclic)) {
      rep.violations.push_back("macro rules are recursive");
    }
    if (rep.depth && *rep.depth > 6) {
      rep.violations.push_back("macro rule chains reach depth " + std::to_string(*rep.depth) + " (limit 6)");
    }
  }
  return rep;
}

std::string SpecializedReport::text() const {
  std::ostringstream os;
  os << "scheme: " << to_string(scheme) << "\n";
  os << "macro rules: " << macro_rules << "\n";
  for (const auto& [t, n] : by_type) os << "  " << t << ": " << n << "\n";
  if (type_graph_acyclic) os << "chunk type graph: " << (*type_graph_acyclic ? "acyclic" : "cyclic") << "\n";
  os << "category graph: " << (category_graph_acyclic ? "acyclic" : "cyclic") << "\n";
  os << "depth: " << (depth ? std::to_string(*depth) : std::string("unbounded")) << "\n";
  os << "phrasal applications in templates: " << phrasal_in_templates << "\n";
  if (violations.empty()) {
    os << "status: ok\n";
  } else {
    for (const auto& v : violations) os << "violation: " << v << "\n";
  }
  return os.str();
}

}  // namespace grspec
