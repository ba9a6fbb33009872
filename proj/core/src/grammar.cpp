#include "grspec/grammar.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grspec {

std::string_view to_string(RuleClass c) {
  return c == RuleClass::phrasal ? "phrasal" : "nonphrasal";
}

std::string_view to_string(Marker m) {
  switch (m) {
    case Marker::s_to_vp: return "s_to_vp";
    case Marker::adverbial_modification: return "adverbial_modification";
    case Marker::np_np_vp: return "np_np_vp";
  }
  return "?";
}

std::string_view to_string(CategoryKind k) {
  switch (k) {
    case CategoryKind::utterance: return "utterance";
    case CategoryKind::utterance_unit: return "utterance_unit";
    case CategoryKind::vp: return "vp";
    case CategoryKind::np: return "np";
    case CategoryKind::rel: return "rel";
    case CategoryKind::pp: return "pp";
    case CategoryKind::other: return "other";
  }
  return "?";
}

std::optional<Marker> marker_from_string(std::string_view s) {
  if (s == "s_to_vp") return Marker::s_to_vp;
  if (s == "adverbial_modification") return Marker::adverbial_modification;
  if (s == "np_np_vp") return Marker::np_np_vp;
  return std::nullopt;
}

std::optional<CategoryKind> category_kind_from_string(std::string_view s) {
  for (auto k : {CategoryKind::utterance, CategoryKind::utterance_unit, CategoryKind::vp,
                 CategoryKind::np, CategoryKind::rel, CategoryKind::pp, CategoryKind::other}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

GrammarError::GrammarError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Lexicon

void Lexicon::add(const std::string& surface, LexEntry entry) {
  auto& list = entries_[surface];
  for (const auto& e : list) {
    if (e.category == entry.category) {
      throw GrammarError("duplicate lexicon entry \"" + surface + "\" : " + entry.category.str());
    }
  }
  list.push_back(std::move(entry));
  for (std::size_t sp = surface.find(' '); sp != std::string::npos; sp = surface.find(' ', sp + 1)) {
    prefixes_.insert(surface.substr(0, sp));
  }
  const auto tokens = static_cast<std::size_t>(std::count(surface.begin(), surface.end(), ' ')) + 1;
  max_tokens_ = std::max(max_tokens_, tokens);
}

const std::vector<LexEntry>* Lexicon::lookup(std::string_view surface) const {
  auto it = entries_.find(surface);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t Lexicon::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : entries_) n += list.size();
  return n;
}

// ---------------------------------------------------------------------------
// Grammar

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool has_cycle(const std::map<CategoryTag, std::set<CategoryTag>>& graph) {
  enum Color { white, grey, black };
  std::map<CategoryTag, Color> color;
  std::function<bool(const CategoryTag&)> visit = [&](const CategoryTag& n) {
    color[n] = grey;
    auto it = graph.find(n);
    if (it != graph.end()) {
      for (const auto& m : it->second) {
        auto c = color[m];
        if (c == grey) return true;
        if (c == white && visit(m)) return true;
      }
    }
    color[n] = black;
    return false;
  };
  for (const auto& [n, _] : graph) {
    if (color[n] == white && visit(n)) return true;
  }
  return false;
}

}  // namespace

Grammar::Grammar(std::vector<Rule> rules, Lexicon lexicon,
                 std::map<std::string, CategoryKind> kind_map,
                 std::vector<CategoryTag> start_categories)
    : rules_(std::move(rules)),
      lexicon_(std::move(lexicon)),
      kind_map_(std::move(kind_map)),
      start_(std::move(start_categories)) {
  if (start_.empty()) throw GrammarError("grammar declares no start category");

  std::set<CategoryTag> produced;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    if (!rule_index_.emplace(r.id, i).second) throw GrammarError("duplicate rule id '" + r.id + "'");
    if (r.rhs.empty()) throw GrammarError("rule '" + r.id + "' has an empty right-hand side");
    if (r.phrasal() && !r.markers.empty()) {
      throw GrammarError("rule '" + r.id + "' is phrasal but carries a marker");
    }
    if (!(r.weight > 0.0)) throw GrammarError("rule '" + r.id + "' has a non-positive weight");
    produced.insert(r.lhs);
  }
  for (const auto& [surface, list] : lexicon_.entries()) {
    for (const auto& e : list) produced.insert(e.category);
  }
  for (const Rule& r : rules_) {
    for (const auto& c : r.rhs) {
      if (!produced.count(c)) {
        throw GrammarError("rule '" + r.id + "' uses unknown category '" + c.str() + "'");
      }
    }
  }
  for (const auto& s : start_) {
    if (!produced.count(s)) throw GrammarError("start category '" + s.str() + "' is never produced");
  }
  categories_ = produced;
  categories_.insert(start_.begin(), start_.end());

  std::map<CategoryTag, std::set<CategoryTag>> phrasal_graph;
  for (const Rule& r : rules_) {
    if (!r.phrasal()) continue;
    auto& out = phrasal_graph[r.lhs];
    out.insert(r.rhs.begin(), r.rhs.end());
  }
  phrasal_cyclic_ = has_cycle(phrasal_graph);
  checksum_ = fnv1a(serialize(*this));
}

bool Grammar::is_start(const CategoryTag& c) const {
  return std::find(start_.begin(), start_.end(), c) != start_.end();
}

const Rule* Grammar::find_rule(std::string_view id) const {
  auto it = rule_index_.find(std::string(id));
  return it == rule_index_.end() ? nullptr : &rules_[it->second];
}

CategoryKind Grammar::kind_of(const CategoryTag& c) const {
  auto it = kind_map_.find(c.major);
  return it == kind_map_.end() ? CategoryKind::other : it->second;
}

std::vector<const Rule*> Grammar::phrasal_rules() const {
  std::vector<const Rule*> out;
  for (const auto& r : rules_) if (r.phrasal()) out.push_back(&r);
  return out;
}

std::vector<const Rule*> Grammar::nonphrasal_rules() const {
  std::vector<const Rule*> out;
  for (const auto& r : rules_) if (!r.phrasal()) out.push_back(&r);
  return out;
}

std::size_t Grammar::count(RuleClass c) const {
  return static_cast<std::size_t>(
      std::count_if(rules_.begin(), rules_.end(), [c](const Rule& r) { return r.rule_class == c; }));
}

std::string Grammar::checksum_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum_));
  return buf;
}

// ---------------------------------------------------------------------------
// Reader

namespace detail {

void LineCursor::skip_ws() {
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
}

bool LineCursor::at_end() {
  skip_ws();
  return pos >= line.size();
}

bool LineCursor::consume(std::string_view lit) {
  skip_ws();
  if (line.substr(pos, lit.size()) == lit) {
    pos += lit.size();
    return true;
  }
  return false;
}

void LineCursor::expect(std::string_view lit) {
  if (!consume(lit)) fail("expected '" + std::string(lit) + "'");
}

std::string LineCursor::symbol(std::string_view what) {
  skip_ws();
  const std::size_t start = pos;
  while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != ',' &&
         line[pos] != '}' && line[pos] != '{' && line[pos] != '\r' && line[pos] != '"') {
    ++pos;
  }
  if (start == pos) fail("expected " + std::string(what));
  return std::string(line.substr(start, pos - start));
}

std::string LineCursor::quoted() {
  skip_ws();
  if (pos >= line.size() || line[pos] != '"') fail("expected quoted string");
  const std::size_t start = ++pos;
  while (pos < line.size() && line[pos] != '"') ++pos;
  if (pos >= line.size()) fail("unterminated string");
  std::string out(line.substr(start, pos - start));
  ++pos;
  return out;
}

std::string LineCursor::rest() {
  skip_ws();
  std::string out(line.substr(pos));
  while (!out.empty() && (out.back() == ' ' || out.back() == '\t' || out.back() == '\r')) out.pop_back();
  pos = line.size();
  return out;
}

void LineCursor::fail(const std::string& msg) const { throw GrammarError(msg, line_no, pos + 1); }

std::string_view strip_comment(std::string_view line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

namespace {
CategoryTag category_at(LineCursor& cur) {
  const std::size_t col = cur.pos;
  std::string text = cur.symbol("category");
  const auto slash = text.find('/');
  if (!is_symbol(text.substr(0, slash)) ||
      (slash != std::string::npos && !is_symbol(text.substr(slash + 1)))) {
    throw GrammarError("malformed category '" + text + "'", cur.line_no, col + 1);
  }
  return CategoryTag::parse(text);
}
}  // namespace

Rule parse_rule_line(LineCursor& cur, RuleAnnotations& ann, const std::set<std::string>& extra_keys) {
  Rule r;
  const std::size_t id_col = cur.pos;
  r.id = cur.symbol("rule id");
  if (!is_symbol(r.id)) throw GrammarError("malformed rule id '" + r.id + "'", cur.line_no, id_col + 1);
  cur.expect(":");
  r.lhs = category_at(cur);
  cur.expect("->");
  while (!cur.at_end() && cur.line[cur.pos] != '{') r.rhs.push_back(category_at(cur));
  if (r.rhs.empty()) cur.fail("rule '" + r.id + "' has no right-hand side");
  cur.expect("{");
  bool first = true;
  while (!cur.consume("}")) {
    if (!first) cur.expect(",");
    first = false;
    const std::size_t key_col = cur.pos;
    std::string key = cur.symbol("annotation key");
    if (!key.empty() && key.back() == ':') key.pop_back();
    else cur.expect(":");
    const std::size_t val_col = cur.pos;
    std::string value = cur.symbol("annotation value");
    if (key == "class") {
      if (value == "phrasal") ann.rule_class = RuleClass::phrasal;
      else if (value == "nonphrasal") ann.rule_class = RuleClass::nonphrasal;
      else throw GrammarError("unknown rule class '" + value + "'", cur.line_no, val_col + 1);
    } else if (key == "marker") {
      auto m = marker_from_string(value);
      if (!m) throw GrammarError("unknown marker '" + value + "'", cur.line_no, val_col + 1);
      ann.markers.insert(*m);
    } else if (key == "refine") {
      if (!is_symbol(value)) throw GrammarError("malformed refinement '" + value + "'", cur.line_no, val_col + 1);
      ann.refine = value;
    } else if (key == "weight") {
      try {
        ann.weight = std::stod(value);
      } catch (const std::exception&) {
        throw GrammarError("malformed weight '" + value + "'", cur.line_no, val_col + 1);
      }
    } else if (extra_keys.count(key)) {
      ann.extra[key] = value;
    } else {
      throw GrammarError("unknown annotation '" + key + "'", cur.line_no, key_col + 1);
    }
    if (cur.at_end()) cur.fail("unterminated annotation block");
  }
  if (!cur.at_end()) cur.fail("trailing text after rule");
  if (!ann.rule_class) throw GrammarError("rule '" + r.id + "' lacks a class annotation", cur.line_no, id_col + 1);
  r.rule_class = *ann.rule_class;
  r.markers = ann.markers;
  if (ann.refine) {
    if (r.lhs.refinement && *r.lhs.refinement != *ann.refine) {
      throw GrammarError("rule '" + r.id + "' refines its lhs twice", cur.line_no, id_col + 1);
    }
    r.lhs.refinement = ann.refine;
  }
  if (ann.weight) r.weight = *ann.weight;
  return r;
}

}  // namespace detail

Grammar parse_grammar_file(std::string_view text) {
  std::vector<Rule> rules;
  Lexicon lexicon;
  std::map<std::string, CategoryKind> kinds;
  std::vector<CategoryTag> start;
  std::set<std::string> seen_ids;

  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    detail::LineCursor cur{detail::strip_comment(text.substr(begin, end - begin)), 0, line_no};
    begin = end + 1;
    if (cur.at_end()) {
      if (end == text.size()) break;
      continue;
    }

    const std::size_t kw_col = cur.pos;
    const std::string keyword = cur.symbol("keyword");
    if (keyword == "rule") {
      detail::RuleAnnotations ann;
      Rule r = detail::parse_rule_line(cur, ann);
      if (!seen_ids.insert(r.id).second) {
        throw GrammarError("duplicate rule id '" + r.id + "'", line_no, kw_col + 1);
      }
      if (r.phrasal() && !r.markers.empty()) {
        throw GrammarError("marker on phrasal rule '" + r.id + "'", line_no, kw_col + 1);
      }
      rules.push_back(std::move(r));
    } else if (keyword == "lex") {
      std::string surface = cur.quoted();
      if (surface.empty() || surface.front() == ' ' || surface.back() == ' ' ||
          surface.find("  ") != std::string::npos) {
        cur.fail("malformed lexical surface \"" + surface + "\"");
      }
      cur.expect(":");
      const std::size_t cat_col = cur.pos;
      std::string cat_text = cur.symbol("category");
      CategoryTag cat;
      try {
        cat = CategoryTag::parse(cat_text);
      } catch (const std::invalid_argument& e) {
        throw GrammarError(e.what(), line_no, cat_col + 1);
      }
      if (cur.symbol("'class'") != "class") cur.fail("expected 'class'");
      std::string cls = cur.symbol("word class");
      double weight = 1.0;
      if (!cur.at_end()) {
        if (cur.symbol("'weight'") != "weight") cur.fail("expected 'weight'");
        const std::size_t w_col = cur.pos;
        const std::string w = cur.symbol("weight");
        try {
          std::size_t used = 0;
          weight = std::stod(w, &used);
          if (used != w.size()) throw std::invalid_argument(w);
        } catch (const std::exception&) {
          throw GrammarError("malformed weight '" + w + "'", line_no, w_col + 1);
        }
        if (!(weight > 0.0)) throw GrammarError("weight must be positive", line_no, w_col + 1);
      }
      if (!cur.at_end()) cur.fail("trailing text after lexical entry");
      try {
        lexicon.add(surface, LexEntry{cat, cls, weight});
      } catch (const GrammarError& e) {
        throw GrammarError(e.what(), line_no, kw_col + 1);
      }
    } else if (keyword == "chunktype") {
      std::string major = cur.symbol("category symbol");
      cur.expect("=>");
      const std::size_t val_col = cur.pos;
      std::string kind = cur.symbol("chunk type");
      auto k = category_kind_from_string(kind);
      if (!k) throw GrammarError("unknown chunk type '" + kind + "'", line_no, val_col + 1);
      if (!cur.at_end()) cur.fail("trailing text after chunktype");
      kinds[major] = *k;
    } else if (keyword == "start") {
      std::string cat = cur.symbol("category");
      if (!cur.at_end()) cur.fail("trailing text after start");
      start.push_back(CategoryTag::parse(cat));
    } else {
      throw GrammarError("unknown directive '" + keyword + "'", line_no, kw_col + 1);
    }
  }
  return Grammar(std::move(rules), std::move(lexicon), std::move(kinds), std::move(start));
}

Grammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GrammarError("cannot open grammar file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grammar_file(ss.str());
}

namespace {
std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}
}  // namespace

std::string serialize_rule(const Rule& r, std::string_view extra_annotations) {
  std::string out = "rule " + r.id + " : " + CategoryTag(r.lhs.major).str() + " ->";
  for (const auto& c : r.rhs) out += " " + c.str();
  out += " {class: ";
  out += to_string(r.rule_class);
  for (Marker m : r.markers) {
    out += ", marker: ";
    out += to_string(m);
  }
  if (r.lhs.refinement) out += ", refine: " + *r.lhs.refinement;
  if (r.weight != 1.0) out += ", weight: " + format_weight(r.weight);
  if (!extra_annotations.empty()) {
    out += ", ";
    out += extra_annotations;
  }
  out += "}";
  return out;
}

std::string serialize(const Grammar& g) {
  std::string out;
  for (const auto& s : g.start_categories()) out += "start " + s.str() + "\n";
  for (const auto& [major, kind] : g.kind_map()) {
    out += "chunktype " + major + " => ";
    out += to_string(kind);
    out += "\n";
  }
  for (const auto& r : g.rules()) out += serialize_rule(r) + "\n";
  for (const auto& [surface, list] : g.lexicon().entries()) {
    for (const auto& e : list) {
      out += "lex \"" + surface + "\" : " + e.category.str() + " class " + e.word_class;
      if (e.weight != 1.0) out += " weight " + format_weight(e.weight);
      out += "\n";
    }
  }
  return out;
}

}  // namespace grspec
