#include "grspec/specialized.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace grspec {

std::string_view to_string(ChunkType t) {
  switch (t) {
    case ChunkType::utterance: return "utterance";
    case ChunkType::utterance_unit: return "utterance_unit";
    case ChunkType::imperative_vp: return "imperative_vp";
    case ChunkType::non_phrasal_np: return "non_phrasal_np";
    case ChunkType::rel: return "rel";
    case ChunkType::vp_modifier: return "vp_modifier";
    case ChunkType::pp: return "pp";
  }
  return "?";
}

std::string_view to_string(ChunkScheme s) {
  switch (s) {
    case ChunkScheme::new_scheme: return "new";
    case ChunkScheme::old_scheme: return "old";
    case ChunkScheme::whole_sentence: return "whole";
    case ChunkScheme::identity: return "identity";
  }
  return "?";
}

std::optional<ChunkType> chunk_type_from_string(std::string_view s) {
  for (auto t : {ChunkType::utterance, ChunkType::utterance_unit, ChunkType::imperative_vp,
                 ChunkType::non_phrasal_np, ChunkType::rel, ChunkType::vp_modifier, ChunkType::pp}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<ChunkScheme> chunk_scheme_from_string(std::string_view s) {
  if (s == "new" || s == "new_scheme") return ChunkScheme::new_scheme;
  if (s == "old" || s == "old_scheme") return ChunkScheme::old_scheme;
  if (s == "whole" || s == "whole_sentence") return ChunkScheme::whole_sentence;
  if (s == "identity") return ChunkScheme::identity;
  return std::nullopt;
}

namespace {
int level(ChunkType t) {
  switch (t) {
    case ChunkType::utterance: return 0;
    case ChunkType::utterance_unit: return 1;
    case ChunkType::imperative_vp: return 2;
    case ChunkType::non_phrasal_np: return 3;
    case ChunkType::rel:
    case ChunkType::vp_modifier: return 4;
    case ChunkType::pp: return 5;
  }
  return 6;
}
}  // namespace

bool dominates(ChunkType upper, ChunkType lower) { return level(upper) < level(lower); }

CategoryTag chunk_category(ChunkType type, const CategoryTag& root) {
  std::string r = root.major;
  if (root.refinement) r += "." + *root.refinement;
  return CategoryTag("@" + std::string(to_string(type)), r);
}

std::optional<ChunkType> chunk_type_of(const CategoryTag& c) {
  if (c.major.empty() || c.major.front() != '@') return std::nullopt;
  return chunk_type_from_string(std::string_view(c.major).substr(1));
}

CategoryTag original_category(const CategoryTag& c) {
  if (!chunk_type_of(c) || !c.refinement) return c;
  const std::string& r = *c.refinement;
  const auto dot = r.find('.');
  if (dot == std::string::npos) return CategoryTag(r);
  return CategoryTag(r.substr(0, dot), r.substr(dot + 1));
}

// ---------------------------------------------------------------------------
// Templates

namespace {
void write_template(const TemplateNode& t, std::string& out) {
  if (t.is_slot()) {
    out += '$';
    out += std::to_string(t.slot);
    return;
  }
  out += '(';
  out += t.rule_id;
  for (const auto& c : t.children) {
    out += ' ';
    write_template(c, out);
  }
  out += ')';
}

struct TemplateReader {
  std::string_view text;
  std::size_t pos = 0;
  const LhsLookup& lookup;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("template: " + msg + " at offset " + std::to_string(pos));
  }
  void ws() {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  }
  std::string token() {
    ws();
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != '(' && text[pos] != ')') ++pos;
    return std::string(text.substr(start, pos - start));
  }
  TemplateNode node() {
    ws();
    if (pos >= text.size()) fail("unexpected end");
    TemplateNode t;
    if (text[pos] == '$') {
      ++pos;
      std::string num = token();
      if (num.empty()) fail("slot without index");
      try {
        t.slot = std::stoi(num);
      } catch (const std::exception&) {
        fail("bad slot index '" + num + "'");
      }
      if (t.slot < 0) fail("negative slot index");
      return t;
    }
    if (text[pos] != '(') fail("expected '(' or '$'");
    ++pos;
    t.rule_id = token();
    auto lhs = lookup(t.rule_id);
    if (!lhs) fail("unknown rule '" + t.rule_id + "'");
    t.category = *lhs;
    for (;;) {
      ws();
      if (pos >= text.size()) fail("unterminated node");
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      t.children.push_back(node());
    }
    if (t.children.empty()) fail("rule application without children");
    return t;
  }
};

void fill_slot_categories(TemplateNode& t, const std::vector<CategoryTag>& rhs) {
  if (t.is_slot()) {
    if (static_cast<std::size_t>(t.slot) >= rhs.size()) {
      throw std::invalid_argument("template slot $" + std::to_string(t.slot) + " exceeds rhs length");
    }
    t.category = original_category(rhs[static_cast<std::size_t>(t.slot)]);
    return;
  }
  for (auto& c : t.children) fill_slot_categories(c, rhs);
}

}  // namespace

std::string to_string(const TemplateNode& t) {
  std::string out;
  write_template(t, out);
  return out;
}

TemplateNode parse_template(std::string_view text, const LhsLookup& lookup) {
  TemplateReader rd{text, 0, lookup};
  TemplateNode t = rd.node();
  rd.ws();
  if (rd.pos != text.size()) rd.fail("trailing text");
  return t;
}

std::size_t count_slots(const TemplateNode& t) {
  if (t.is_slot()) return 1;
  std::size_t n = 0;
  for (const auto& c : t.children) n += count_slots(c);
  return n;
}

// ---------------------------------------------------------------------------
// SpecializedGrammar

SpecializedGrammar::SpecializedGrammar(ChunkScheme scheme, std::vector<MacroRule> macro_rules,
                                       std::vector<Rule> phrasal_rules, std::string source_grammar_id,
                                       std::vector<CategoryTag> start_categories)
    : scheme_(scheme),
      macro_rules_(std::move(macro_rules)),
      phrasal_rules_(std::move(phrasal_rules)),
      source_id_(std::move(source_grammar_id)),
      start_(std::move(start_categories)) {
  for (std::size_t i = 0; i < macro_rules_.size(); ++i) {
    const auto& m = macro_rules_[i];
    if (!index_.emplace(m.id, i).second) {
      throw std::invalid_argument("duplicate macro rule id '" + m.id + "'");
    }
    if (count_slots(m.tmpl) != m.rhs.size()) {
      throw std::invalid_argument("macro rule '" + m.id + "' template frontier does not match its rhs");
    }
  }
  for (const auto& r : phrasal_rules_) {
    if (index_.count(r.id)) throw std::invalid_argument("macro rule id '" + r.id + "' clashes with a phrasal rule");
  }
}

bool SpecializedGrammar::is_start(const CategoryTag& c) const {
  return std::find(start_.begin(), start_.end(), c) != start_.end();
}

const MacroRule* SpecializedGrammar::find_macro(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &macro_rules_[it->second];
}

namespace {

Derivation instantiate(const TemplateNode& t, const std::vector<Derivation>& filled, const MacroRule& m) {
  if (t.is_slot()) {
    const auto idx = static_cast<std::size_t>(t.slot);
    if (idx >= filled.size()) {
      throw std::runtime_error("macro rule '" + m.id + "': template slot $" + std::to_string(t.slot) +
                               " has no matching child");
    }
    if (filled[idx]->category != t.category) {
      throw std::runtime_error("macro rule '" + m.id + "': slot $" + std::to_string(t.slot) +
                               " expects " + t.category.str() + " but the expansion is rooted at " +
                               filled[idx]->category.str());
    }
    return filled[idx];
  }
  std::vector<Derivation> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(instantiate(c, filled, m));
  return make_internal(t.rule_id, t.category, std::move(kids));
}

}  // namespace

Derivation expand_specialized_derivation(const Derivation& tree, const SpecializedGrammar& sg) {
  ExpansionCache cache;
  return expand_specialized_derivation(tree, sg, cache);
}

Derivation expand_specialized_derivation(const Derivation& tree, const SpecializedGrammar& sg,
                                         ExpansionCache& cache) {
  if (tree->is_leaf()) return tree;
  if (auto it = cache.find(tree.get()); it != cache.end()) return it->second;
  std::vector<Derivation> kids;
  kids.reserve(tree->children.size());
  bool changed = false;
  for (const auto& c : tree->children) {
    kids.push_back(expand_specialized_derivation(c, sg, cache));
    changed = changed || kids.back() != c;
  }
  Derivation out;
  if (const MacroRule* m = sg.find_macro(tree->rule_id)) {
    // slot count matches rhs size by construction
    if (kids.size() != m->rhs.size()) {
      throw std::runtime_error("macro rule '" + m->id + "': template frontier arity mismatch (" +
                               std::to_string(m->rhs.size()) + " slots, " + std::to_string(kids.size()) +
                               " children)");
    }
    out = instantiate(m->tmpl, kids, *m);
  } else {
    out = changed ? make_internal(tree->rule_id, tree->category, std::move(kids)) : tree;
  }
  cache.emplace(tree.get(), out);
  return out;
}

LhsLookup lhs_lookup(const SpecializedGrammar& sg, const Grammar& original) {
  return [&sg, &original](std::string_view id) -> std::optional<CategoryTag> {
    if (const MacroRule* m = sg.find_macro(id)) return m->lhs;
    if (const Rule* r = original.find_rule(id)) return r->lhs;
    return std::nullopt;
  };
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize(const SpecializedGrammar& sg) {
  std::string out = "# specialized grammar\n";
  out += "scheme ";
  out += to_string(sg.scheme());
  out += "\nsource " + sg.source_grammar_id() + "\n";
  for (const auto& s : sg.start_categories()) out += "start " + s.str() + "\n";
  for (const auto& m : sg.macro_rules()) {
    out += "rule " + m.id + " : " + m.lhs.str() + " ->";
    for (const auto& c : m.rhs) out += " " + c.str();
    out += " {class: nonphrasal";
    if (m.chunk_type) {
      out += ", chunk: ";
      out += to_string(*m.chunk_type);
    }
    out += "}\n";
    out += "template " + m.id + " : " + to_string(m.tmpl) + "\n";
  }
  for (const auto& r : sg.phrasal_rules()) out += serialize_rule(r) + "\n";
  return out;
}

SpecializedGrammar parse_specialized_file(std::string_view text, const Grammar& original) {
  std::optional<ChunkScheme> scheme;
  std::string source;
  std::vector<CategoryTag> start;
  std::vector<MacroRule> macros;
  std::vector<Rule> phrasal;
  std::map<std::string, std::size_t> pending;  // macro id -> index awaiting template
  const LhsLookup original_lhs = lhs_lookup(original);

  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    detail::LineCursor cur{detail::strip_comment(raw), 0, line_no};
    if (cur.at_end()) continue;
    const std::size_t kw_col = cur.pos;
    const std::string kw = cur.symbol("keyword");
    if (kw == "scheme") {
      std::string s = cur.symbol("scheme");
      scheme = chunk_scheme_from_string(s);
      if (!scheme) throw GrammarError("unknown scheme '" + s + "'", line_no, kw_col + 1);
    } else if (kw == "source") {
      source = cur.symbol("checksum");
    } else if (kw == "start") {
      start.push_back(CategoryTag::parse(cur.symbol("category")));
    } else if (kw == "rule") {
      detail::RuleAnnotations ann;
      Rule r = detail::parse_rule_line(cur, ann, {"chunk"});
      if (r.phrasal()) {
        const Rule* orig = original.find_rule(r.id);
        if (!orig || !(*orig == r)) {
          throw GrammarError("phrasal rule '" + r.id + "' differs from the source grammar", line_no, kw_col + 1);
        }
        phrasal.push_back(std::move(r));
        continue;
      }
      MacroRule m;
      m.id = r.id;
      m.lhs = r.lhs;
      m.rhs = r.rhs;
      if (auto it = ann.extra.find("chunk"); it != ann.extra.end()) {
        m.chunk_type = chunk_type_from_string(it->second);
        if (!m.chunk_type) throw GrammarError("unknown chunk type '" + it->second + "'", line_no, kw_col + 1);
      }
      if (original.find_rule(m.id)) {
        throw GrammarError("macro rule id '" + m.id + "' clashes with the source grammar", line_no, kw_col + 1);
      }
      if (!pending.emplace(m.id, macros.size()).second) {
        throw GrammarError("duplicate rule id '" + m.id + "'", line_no, kw_col + 1);
      }
      macros.push_back(std::move(m));
    } else if (kw == "template") {
      std::string id = cur.symbol("rule id");
      cur.expect(":");
      auto it = pending.find(id);
      if (it == pending.end()) throw GrammarError("template for undeclared rule '" + id + "'", line_no, kw_col + 1);
      MacroRule& m = macros[it->second];
      try {
        m.tmpl = parse_template(cur.rest(), original_lhs);
        fill_slot_categories(m.tmpl, m.rhs);
      } catch (const std::invalid_argument& e) {
        throw GrammarError(e.what(), line_no, kw_col + 1);
      }
      if (count_slots(m.tmpl) != m.rhs.size()) {
        throw GrammarError("template arity mismatch for '" + id + "'", line_no, kw_col + 1);
      }
    } else {
      throw GrammarError("unknown directive '" + kw + "'", line_no, kw_col + 1);
    }
  }
  if (!scheme) throw GrammarError("specialized grammar lacks a scheme line");
  if (source != original.checksum_hex()) {
    throw GrammarError("specialized grammar was built from a different grammar (source " + source +
                       ", expected " + original.checksum_hex() + ")");
  }
  for (const auto& m : macros) {
    if (m.tmpl.rule_id.empty() && !m.tmpl.is_slot()) {
      throw GrammarError("macro rule '" + m.id + "' has no template");
    }
  }
  try {
    return SpecializedGrammar(*scheme, std::move(macros), std::move(phrasal), source, std::move(start));
  } catch (const std::invalid_argument& e) {
    throw GrammarError(e.what());
  }
}

SpecializedGrammar load_specialized(const std::string& path, const Grammar& original) {
  std::ifstream in(path);
  if (!in) throw GrammarError("cannot open specialized grammar '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_specialized_file(ss.str(), original);
}

}  // namespace grspec
