#include <random>
#include <set>

#include "doctest.h"
#include "grspec/chart.hpp"
#include "grspec/grammar.hpp"
#include "grspec/lattice.hpp"
#include "grspec/parser.hpp"
#include "support.hpp"

using namespace grspec;
using grspec::testing::data_path;
using grspec::testing::kShowGold;
using grspec::testing::kShowGrammar;

namespace {

std::size_t count_edges(const Chart& c, Vertex a, Vertex b, const std::string& major) {
  std::size_t n = 0;
  for (const auto& e : c.edges()) {
    if (e.start == a && e.end == b && e.category.major == major) ++n;
  }
  return n;
}

std::set<std::string> analysis_set(const FullPassResult& r) {
  std::set<std::string> s;
  for (const auto& a : r.analyses) s.insert(to_string(a.derivation));
  return s;
}

// acoustic of an edge recomputed from the lattice words along its yield
double covered_min_confidence(const Lattice& lat, const ChartEdge& e) {
  const auto toks = yield_tokens(*e.derivation);
  double best = -1.0;
  std::function<void(Vertex, std::size_t, double)> walk = [&](Vertex v, std::size_t k, double cur) {
    if (k == toks.size()) {
      if (v == e.end) best = std::max(best, cur);
      return;
    }
    for (const auto& w : lat.edges) {
      if (w.from == v && w.word == toks[k]) walk(w.to, k + 1, std::min(cur, w.confidence));
    }
  };
  walk(e.start, 0, 1.0);
  return best;
}

}  // namespace

TEST_CASE("lattice validation") {
  CHECK_THROWS_AS(Lattice{}.validate(), LatticeError);
  Lattice l;
  l.n_vertices = 3;
  l.edges = {{0, 1, "a", 1.0}};
  CHECK_THROWS_AS(l.validate(), LatticeError);  // vertex 2 unreachable
  l.edges.push_back({1, 2, "b", 0.0});
  CHECK_THROWS_AS(l.validate(), LatticeError);  // zero confidence
  l.edges.back().confidence = 0.5;
  CHECK_NOTHROW(l.validate());
  l.edges.push_back({2, 1, "c", 0.5});
  CHECK_THROWS_AS(l.validate(), LatticeError);

  const auto lin = linear_lattice("show the flight", "x");
  CHECK(lin.n_vertices == 4);
  CHECK(lin.edges.size() == 3);
  const auto back = parse_lattice_json(to_json_line(lin));
  CHECK(back.id == "x");
  CHECK(back.edges.size() == 3);
  CHECK(back.edges[1].word == "the");
  CHECK_THROWS(parse_lattice_json("{\"id\": 1"));
}

TEST_CASE("lexical_pass") {
  const auto g = parse_grammar_file(std::string(kShowGrammar) +
                                    "lex \"D\" : Letter class letter\nlex \"L\" : Letter class letter\n"
                                    "lex \"D L\" : Airline class airline_code\n");
  SUBCASE("single word") {
    const auto c = lexical_pass(linear_lattice("show"), g);
    REQUIRE(c.size() == 1);
    CHECK(c.edges()[0].start == 0);
    CHECK(c.edges()[0].end == 1);
    CHECK(c.edges()[0].category == CategoryTag("V"));
    CHECK(c.edges()[0].score == 1.0);
    CHECK(c.edges()[0].kind == EdgeKind::lexical);
  }
  SUBCASE("multiword entry") {
    const auto c = lexical_pass(linear_lattice("D L"), g);
    CHECK(c.size() == 3);
    CHECK(count_edges(c, 0, 2, "Airline") == 1);
    CHECK(count_edges(c, 0, 1, "Letter") == 1);
    CHECK(count_edges(c, 1, 2, "Letter") == 1);
  }
  SUBCASE("unknown word is a warning, not an error") {
    const auto c = lexical_pass(linear_lattice("show zzz"), g);
    CHECK(c.size() == 1);
    CHECK(c.warnings.size() == 1);
  }
  SUBCASE("empty lattice") { CHECK_THROWS_AS(lexical_pass(Lattice{}, g), LatticeError); }
}

TEST_CASE("parallel hypotheses keep their own confidence") {
  const auto g = load_grammar(data_path("toy_airline.grammar"));
  const auto lat = parse_lattice_json(
      R"({"id":"p","n_vertices":3,"edges":[{"from":0,"to":1,"word":"to","conf":1.0},)"
      R"({"from":1,"to":2,"word":"boston","conf":0.9},{"from":1,"to":2,"word":"denver","conf":0.2}]})");
  const auto c = lexical_pass(lat, g);
  double boston = 0, denver = 0;
  for (const auto& e : c.edges()) {
    if (e.derivation->word == "boston") boston = e.acoustic;
    if (e.derivation->word == "denver") denver = e.acoustic;
  }
  CHECK(boston == doctest::Approx(0.9));
  CHECK(denver == doctest::Approx(0.2));
}

TEST_CASE("phrasal_pass") {
  const auto g = parse_grammar_file(kShowGrammar);
  SUBCASE("single application") {
    auto c = lexical_pass(linear_lattice("the flight"), g);
    const auto before = c.size();
    const auto st = phrasal_pass(c, g);
    CHECK(st.edges_added == 1);
    CHECK(c.size() == before + 1);
    CHECK(count_edges(c, 0, 2, "NP") == 1);
    CHECK(c.count(EdgeKind::phrasal) == 1);
  }
  SUBCASE("nothing adjacent") {
    auto c = lexical_pass(linear_lattice("flight the"), g);
    const auto before = c.edges();
    phrasal_pass(c, g);
    REQUIRE(c.size() == before.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(c.edges()[i].id == before[i].id);
  }
  SUBCASE("cyclic phrasal rules hit the depth cap") {
    const auto cyc = parse_grammar_file(
        "rule a : A -> B {class: phrasal}\nrule b : B -> A {class: phrasal}\nrule c : A -> X {class: phrasal}\n"
        "lex \"x\" : X class x\nstart A\n");
    CHECK(cyc.phrasal_rules_cyclic());
    auto c = lexical_pass(linear_lattice("x"), cyc);
    PassOptions o;
    o.depth_cap = 6;
    const auto st = phrasal_pass(c, cyc, o);
    CHECK(st.cap_enforced);
    CHECK(st.capped > 0);
    for (const auto& e : c.edges()) CHECK(e.depth <= 6);
  }
}

TEST_CASE("phrasal pass builds the full airline noun phrase") {
  const auto g = load_grammar(data_path("toy_airline.grammar"));
  auto c = lexical_pass(linear_lattice("flight D L three one two"), g);
  phrasal_pass(c, g);
  CHECK(count_edges(c, 0, 6, "NP") >= 1);
}

TEST_CASE("phrasal pass only adds edges") {
  const auto g = load_grammar(data_path("toy_airline.grammar"));
  auto c = lexical_pass(linear_lattice("show me the flights from boston to denver on monday"), g);
  const auto before = c.edges();
  phrasal_pass(c, g);
  REQUIRE(c.size() >= before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(c.edges()[i].id == before[i].id);
    CHECK(to_string(c.edges()[i].derivation) == to_string(before[i].derivation));
  }
  std::set<std::tuple<Vertex, Vertex, std::string>> seen;
  for (const auto& e : c.edges()) CHECK(seen.insert({e.start, e.end, to_string(e.derivation)}).second);
}

TEST_CASE("acoustic is the minimum confidence of the covered words") {
  const auto g = load_grammar(data_path("toy_airline.grammar"));
  const auto lat = parse_lattice_json(
      R"({"id":"a","n_vertices":6,"edges":[)"
      R"({"from":0,"to":1,"word":"show","conf":0.95},{"from":1,"to":2,"word":"the","conf":0.7},)"
      R"({"from":1,"to":2,"word":"a","conf":0.3},{"from":2,"to":3,"word":"flight","conf":0.8},)"
      R"({"from":3,"to":4,"word":"D","conf":0.6},{"from":4,"to":5,"word":"L","conf":0.9},)"
      R"({"from":3,"to":5,"word":"delta","conf":0.4}]})");
  auto c = lexical_pass(lat, g);
  phrasal_pass(c, g);
  const auto r = full_pass(c, g);
  for (const auto& e : c.edges()) {
    const double want = covered_min_confidence(lat, e);
    CHECK(e.acoustic == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("full_pass") {
  const auto g = parse_grammar_file(kShowGrammar);
  SUBCASE("gold analysis found") {
    auto c = lexical_pass(linear_lattice("show the flight"), g);
    phrasal_pass(c, g);
    const auto before = c.size();
    const auto r = full_pass(c, g);
    CHECK(c.size() == before);
    REQUIRE(r.analyses.size() == 1);
    CHECK(to_string(r.analyses[0].derivation) == kShowGold);
    CHECK(r.analyses[0].category == CategoryTag("UTT"));
  }
  SUBCASE("empty chart") {
    Chart c(4);
    CHECK(full_pass(c, g).analyses.empty());
  }
  SUBCASE("no analysis is not an error") {
    auto c = lexical_pass(linear_lattice("the flight show"), g);
    phrasal_pass(c, g);
    const auto r = full_pass(c, g);
    CHECK(r.analyses.empty());
    CHECK_FALSE(r.timed_out());
  }
  SUBCASE("deadline in the past times out") {
    auto c = lexical_pass(linear_lattice("show the flight"), g);
    phrasal_pass(c, g);
    PassOptions o;
    o.deadline = Clock::now() - std::chrono::seconds(1);
    CHECK(full_pass(c, g, o).timed_out());
  }
}

TEST_CASE("analyses are ordered by score then derivation") {
  const auto g = load_grammar(data_path("toy_airline.grammar"));
  auto c = lexical_pass(linear_lattice("show me flights from boston to denver on monday"), g);
  phrasal_pass(c, g);
  const auto r = full_pass(c, g);
  REQUIRE(r.analyses.size() > 1);
  for (std::size_t i = 1; i < r.analyses.size(); ++i) {
    const auto& a = r.analyses[i - 1];
    const auto& b = r.analyses[i];
    CHECK((a.score > b.score || (a.score == b.score && to_string(a.derivation) < to_string(b.derivation))));
  }
  const auto again = full_pass(c, g);
  CHECK(analysis_set(again) == analysis_set(r));
}

TEST_CASE("full_pass matches brute-force enumeration on small grammars") {
  std::mt19937_64 rng(20260101);
  std::size_t with_parses = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = grspec::testing::random_small_instance(rng);
    const auto g = parse_grammar_file(inst.grammar_text);
    REQUIRE(g.rules().size() <= 10);
    std::string sentence;
    for (const auto& w : inst.sentence) sentence += (sentence.empty() ? "" : " ") + w;
    auto c = lexical_pass(linear_lattice(sentence), g);
    phrasal_pass(c, g);
    const auto got = analysis_set(full_pass(c, g));
    grspec::testing::DerivationEnumerator oracle(g, inst.sentence);
    const auto want = oracle.analyses();
    if (!want.empty()) ++with_parses;
    INFO("grammar:\n" << inst.grammar_text << "sentence: " << sentence);
    CHECK(got == want);
  }
  CHECK(with_parses > 30);
}
