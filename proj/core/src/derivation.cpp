#include "grspec/derivation.hpp"

#include <sstream>
#include <stdexcept>

#include "grspec/grammar.hpp"

namespace grspec {

Derivation make_leaf(std::string word, CategoryTag category, std::string word_class) {
  auto n = std::make_shared<DerivationNode>();
  n->category = std::move(category);
  n->word = std::move(word);
  n->word_class = std::move(word_class);
  return n;
}

Derivation make_internal(std::string rule_id, CategoryTag lhs, std::vector<Derivation> children) {
  auto n = std::make_shared<DerivationNode>();
  n->category = std::move(lhs);
  n->rule_id = std::move(rule_id);
  n->children = std::move(children);
  return n;
}

namespace {

void write(const DerivationNode& d, std::string& out, bool classes) {
  if (d.is_leaf()) {
    out += '{';
    out += classes ? d.word_class : d.word;
    out += '|';
    d.category.append_to(out);
    if (!classes) {
      out += '|';
      out += d.word_class;
    }
    out += '}';
    return;
  }
  out += '(';
  out += d.rule_id;
  for (const auto& c : d.children) {
    out += ' ';
    write(*c, out, classes);
  }
  out += ')';
}

struct TreeReader {
  std::string_view text;
  std::size_t pos = 0;
  const LhsLookup& lookup;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("derivation: " + msg + " at offset " + std::to_string(pos));
  }
  void ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n')) ++pos;
  }
  Derivation node() {
    ws();
    if (pos >= text.size()) fail("unexpected end");
    if (text[pos] == '{') {
      const std::size_t close = text.find('}', pos);
      if (close == std::string_view::npos) fail("unterminated leaf");
      std::string_view body = text.substr(pos + 1, close - pos - 1);
      const auto bar1 = body.find('|');
      const auto bar2 = bar1 == std::string_view::npos ? bar1 : body.find('|', bar1 + 1);
      if (bar2 == std::string_view::npos) fail("leaf needs word|Cat|class");
      pos = close + 1;
      return make_leaf(std::string(body.substr(0, bar1)),
                       CategoryTag::parse(body.substr(bar1 + 1, bar2 - bar1 - 1)),
                       std::string(body.substr(bar2 + 1)));
    }
    if (text[pos] != '(') fail("expected '(' or '{'");
    ++pos;
    ws();
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ' && text[pos] != ')' && text[pos] != '(' &&
           text[pos] != '{') {
      ++pos;
    }
    std::string id(text.substr(start, pos - start));
    if (id.empty()) fail("missing rule id");
    auto lhs = lookup(id);
    if (!lhs) fail("unknown rule '" + id + "'");
    std::vector<Derivation> kids;
    for (;;) {
      ws();
      if (pos >= text.size()) fail("unterminated node");
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      kids.push_back(node());
    }
    if (kids.empty()) fail("rule application without children");
    return make_internal(std::move(id), *lhs, std::move(kids));
  }
};

void collect_yield(const DerivationNode& d, std::vector<std::string>& out) {
  if (d.is_leaf()) {
    out.push_back(d.word);
    return;
  }
  for (const auto& c : d.children) collect_yield(*c, out);
}

void check(const DerivationNode& d, const Grammar& g, const std::string& path, ValidationReport& rep) {
  if (d.is_leaf()) {
    const auto* entries = g.lexicon().lookup(d.word);
    bool found = false;
    if (entries) {
      for (const auto& e : *entries) {
        if (e.category == d.category && e.word_class == d.word_class) found = true;
      }
    }
    if (!found) {
      rep.violations.push_back({path, "leaf \"" + d.word + "\" : " + d.category.str() + " class " +
                                          d.word_class + " is not in the lexicon"});
    }
    return;
  }
  const Rule* r = g.find_rule(d.rule_id);
  if (!r) {
    rep.violations.push_back({path, "unknown rule '" + d.rule_id + "'"});
    return;
  }
  if (r->lhs != d.category) {
    rep.violations.push_back({path, "node category " + d.category.str() + " differs from rule '" +
                                        r->id + "' lhs " + r->lhs.str()});
  }
  if (r->rhs.size() != d.children.size()) {
    rep.violations.push_back({path, "rule '" + r->id + "' expects " + std::to_string(r->rhs.size()) +
                                        " children, found " + std::to_string(d.children.size())});
  } else {
    for (std::size_t i = 0; i < r->rhs.size(); ++i) {
      if (d.children[i]->category != r->rhs[i]) {
        rep.violations.push_back({path + "/" + std::to_string(i),
                                  "expected " + r->rhs[i].str() + ", found " +
                                      d.children[i]->category.str() + " under rule '" + r->id + "'"});
      }
    }
  }
  for (std::size_t i = 0; i < d.children.size(); ++i) {
    check(*d.children[i], g, path + "/" + std::to_string(i), rep);
  }
}

}  // namespace

std::string to_string(const DerivationNode& d) {
  std::string out;
  write(d, out, false);
  return out;
}

std::string class_key(const DerivationNode& d) {
  std::string out;
  write(d, out, true);
  return out;
}

void append_class_key(const DerivationNode& d, std::string& out) { write(d, out, true); }

LhsLookup lhs_lookup(const Grammar& g) {
  return [&g](std::string_view id) -> std::optional<CategoryTag> {
    if (const Rule* r = g.find_rule(id)) return r->lhs;
    return std::nullopt;
  };
}

Derivation parse_derivation(std::string_view text, const LhsLookup& lookup) {
  TreeReader rd{text, 0, lookup};
  Derivation d = rd.node();
  rd.ws();
  if (rd.pos != text.size()) rd.fail("trailing text");
  return d;
}

std::vector<std::string> yield(const DerivationNode& d) {
  std::vector<std::string> out;
  collect_yield(d, out);
  return out;
}

std::vector<std::string> yield_tokens(const DerivationNode& d) {
  std::vector<std::string> out;
  for (const auto& w : yield(d)) {
    std::istringstream ss(w);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
  }
  return out;
}

std::size_t depth(const DerivationNode& d) {
  if (d.is_leaf()) return 0;
  std::size_t m = 0;
  for (const auto& c : d.children) m = std::max(m, depth(*c));
  return m + 1;
}

std::size_t count_leaves(const DerivationNode& d) {
  if (d.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : d.children) n += count_leaves(*c);
  return n;
}

bool structurally_equal(const DerivationNode& a, const DerivationNode& b) {
  if (&a == &b) return true;
  if (a.category != b.category || a.rule_id != b.rule_id || a.children.size() != b.children.size()) {
    return false;
  }
  if (a.is_leaf()) return a.word == b.word && a.word_class == b.word_class;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) out += v.path + ": " + v.message + "\n";
  return out;
}

ValidationReport validate_derivation(const DerivationNode& tree, const Grammar& grammar) {
  ValidationReport rep;
  check(tree, grammar, "root", rep);
  return rep;
}

}  // namespace grspec
