#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "grspec/corpus.hpp"
#include "grspec/lattice.hpp"
#include "grspec/parser.hpp"
#include "grspec/pipeline.hpp"
#include "grspec/pruner.hpp"
#include "support.hpp"

using namespace grspec;
using grspec::testing::data_path;
using grspec::testing::kShowGold;
using grspec::testing::kShowGrammar;

namespace {

const Grammar& toy() {
  static const Grammar g = load_grammar(data_path("toy_airline.grammar"));
  return g;
}

Corpus sample(std::size_t n, std::uint64_t seed, const std::string& prefix = "u") {
  GenOptions o;
  o.n = n;
  o.seed = seed;
  o.id_prefix = prefix;
  return gen_corpus(toy(), o);
}

const TrainResult& trained() {
  static const TrainResult r = train(sample(1000, 1), toy(), ChunkScheme::new_scheme);
  return r;
}

std::string corpus_bytes(const Corpus& c) {
  std::ostringstream os;
  write_corpus(os, c);
  return os.str();
}

std::set<std::string> derivations(const PipelineResult& r) {
  std::set<std::string> s;
  for (const auto& a : r.analyses) s.insert(to_string(a.derivation));
  return s;
}

PipelineConfig variant(const std::string& name) { return PipelineConfig::from_name(name); }

}  // namespace

TEST_CASE("gen_corpus") {
  CHECK(sample(0, 1).empty());
  const auto a = sample(200, 42);
  const auto b = sample(200, 42);
  CHECK(corpus_bytes(a) == corpus_bytes(b));
  CHECK(corpus_bytes(a) != corpus_bytes(sample(200, 43)));
  CHECK(a[0].id == "u1");
  CHECK(a[199].id == "u200");
  std::size_t total = 0;
  for (const auto& [len, n] : length_histogram(a)) {
    CHECK(len > 0);
    total += n;
  }
  CHECK(total == a.size());
  for (const auto& e : a) {
    CHECK(validate_derivation(e.tree, toy()).ok());
    std::string s;
    for (const auto& w : yield_tokens(*e.tree)) s += (s.empty() ? "" : " ") + w;
    CHECK(s == e.sentence);
  }

  GenOptions bad;
  bad.n = 3;
  bad.max_depth = 0;
  CHECK_THROWS(gen_corpus(toy(), bad));
  bad.max_depth = 2;
  CHECK_THROWS_AS(gen_corpus(toy(), bad), GrammarError);
}

TEST_CASE("generated trees respect the depth bound") {
  GenOptions o;
  o.n = 300;
  o.seed = 8;
  o.max_depth = 7;
  for (const auto& e : gen_corpus(toy(), o)) CHECK(depth(*e.tree) <= 7);
}

TEST_CASE("corpus files round trip") {
  const auto c = sample(50, 9);
  const auto text = corpus_bytes(c);
  std::istringstream in(text);
  const auto back = read_corpus(in, toy());
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back[i].id == c[i].id);
    CHECK(back[i].sentence == c[i].sentence);
    CHECK(to_string(back[i].tree) == to_string(c[i].tree));
  }
  CHECK(corpus_bytes(back) == text);

  std::istringstream bad(to_json_line(c[0]) + "\n{\"id\": \"x\"}\n");
  try {
    read_corpus(bad, toy());
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("pipeline config") {
  for (auto n : {"E-P-", "E-P+", "E+P-", "E+P+"}) CHECK(variant(n).name() == n);
  CHECK(variant("E+P-").specialized);
  CHECK_FALSE(variant("E+P-").prune);
  CHECK_THROWS(PipelineConfig::from_name("E?P+"));
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.fraction2 = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.timeout_s = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(all_variants().size() == 4);
  CHECK(all_variants()[0].name() == "E-P-");
}

TEST_CASE("pipeline needs the artifacts its config asks for") {
  CHECK_THROWS_AS(Pipeline(toy(), nullptr, nullptr, variant("E-P+")), std::invalid_argument);
  CHECK_THROWS_AS(Pipeline(toy(), nullptr, nullptr, variant("E+P-")), std::invalid_argument);
  CHECK_NOTHROW(Pipeline(toy(), nullptr, nullptr, variant("E-P-")));
  const auto g = parse_grammar_file(kShowGrammar);
  const auto& sg = *trained().specialized;
  CHECK_THROWS(Pipeline(g, nullptr, &sg, variant("E+P-")));
}

TEST_CASE("training on one utterance") {
  const auto g = parse_grammar_file(kShowGrammar);
  Corpus c{{"s1", "show the flight", parse_derivation(kShowGold, lhs_lookup(g))}};
  const auto r = train(c, g, ChunkScheme::new_scheme);
  CHECK(r.irreproducible == 0);
  CHECK(r.model.entries() > 0);
  for (auto crit : {Criterion::left, Criterion::right, Criterion::unigram}) {
    std::uint64_t correct = 0;
    for (const auto& [k, v] : r.model.table(crit)) correct += v.correct;
    CHECK(correct > 0);
  }
  REQUIRE(r.specialized.has_value());
  CHECK(r.specialized->macro_rules().size() == 3);
  Pipeline p(g, &r.model, &*r.specialized, variant("E+P+"));
  const auto res = p.run(linear_lattice("show the flight"));
  CHECK(derivations(res) == std::set<std::string>{kShowGold});
}

TEST_CASE("training reproduces every gold tree") {
  const auto& r = trained();
  CHECK(r.utterances == 1000);
  CHECK(r.irreproducible == 0);
  CHECK(r.report.ok());
  for (auto crit : {Criterion::left, Criterion::right, Criterion::unigram}) {
    for (const auto& [k, v] : r.model.table(crit)) CHECK(v.correct <= v.created);
  }
}

TEST_CASE("training is deterministic") {
  const auto c = sample(150, 21);
  const auto a = train(c, toy(), ChunkScheme::new_scheme);
  const auto b = train(c, toy(), ChunkScheme::new_scheme);
  CHECK(serialize(a.model) == serialize(b.model));
  CHECK(serialize(*a.specialized) == serialize(*b.specialized));
}

TEST_CASE("model counts merge across corpus shards") {
  const auto c = sample(120, 4);
  const Corpus first(c.begin(), c.begin() + 50), second(c.begin() + 50, c.end());
  auto merged = train_prune_model(first, toy(), {});
  merged.merge(train_prune_model(second, toy(), {}));
  CHECK(merged == train_prune_model(c, toy(), {}));
}

TEST_CASE("the airline example") {
  const auto& r = trained();
  const auto& g = toy();
  const auto lat = linear_lattice("show flight D L three one two");
  const std::string gold =
      "(utt_s (s_imp (vp_vnp {show|V|display} (np_flt {flight|N|noun} {D L|Airline|airline_code} "
      "(fnum3 {three|Num/card|digit} {one|Num/card|digit} {two|Num/card|digit})))))";
  REQUIRE(validate_derivation(parse_derivation(gold, lhs_lookup(g)), g).ok());

  const auto base = Pipeline(g, &r.model, &*r.specialized, variant("E-P-")).run(lat);
  const auto pruned = Pipeline(g, &r.model, &*r.specialized, variant("E-P+")).run(lat);
  const auto full = Pipeline(g, &r.model, &*r.specialized, variant("E+P+")).run(lat);
  MESSAGE("analyses: E-P- " << base.analyses.size() << ", E-P+ " << pruned.analyses.size() << ", E+P+ "
                            << full.analyses.size());
  CHECK(base.analyses.size() > pruned.analyses.size());
  CHECK(derivations(base).count(gold) == 1);
  CHECK(derivations(pruned).count(gold) == 1);
  REQUIRE(full.analyses.size() == 1);
  CHECK(to_string(full.analyses[0].derivation) == gold);

  SUBCASE("phase-2 pruning clears the inside of the noun phrase") {
    PruneScorer scorer(r.model);
    Chart c = lexical_pass(lat, g);
    score_and_prune(scorer, c, PruneStage::lexical);
    phrasal_pass(c, g);
    auto inside = [](const Chart& ch) {
      std::size_t n = 0;
      for (const auto& e : ch.edges()) n += e.start >= 1 && e.end <= 7 && !(e.start == 1 && e.end == 7);
      return n;
    };
    const std::size_t before = inside(c);
    score_and_prune(scorer, c, PruneStage::phrasal);
    bool np_survives = false;
    for (const auto& e : c.edges()) np_survives |= e.start == 1 && e.end == 7 && e.derivation->rule_id == "np_flt";
    CHECK(np_survives);
    MESSAGE("edges inside the NP span: " << before << " -> " << inside(c));
    CHECK(inside(c) < before);
  }
}

TEST_CASE("competing lattice hypotheses") {
  // "one" competes with "the" between the same vertices
  const auto& r = trained();
  const auto& g = toy();
  auto lattice = [](const std::string& conf) {
    return parse_lattice_json(
        R"({"id":"l","n_vertices":5,"edges":[{"from":0,"to":1,"word":"show","conf":1.0},)"
        R"({"from":1,"to":2,"word":"me","conf":1.0},{"from":2,"to":3,"word":"the","conf":0.9},)"
        R"({"from":2,"to":3,"word":"one","conf":)" +
        conf + R"(},{"from":3,"to":4,"word":"flights","conf":1.0}]})");
  };
  auto uses = [](const Analysis& a, const std::string& w) {
    const auto t = yield_tokens(*a.derivation);
    return std::find(t.begin(), t.end(), w) != t.end();
  };
  auto count = [&](const PipelineResult& res, const std::string& w) {
    std::size_t n = 0;
    for (const auto& a : res.analyses) n += uses(a, w);
    return n;
  };
  const std::string the_reading =
      "(utt_s (s_imp (vp_vnpnp {show|V|display} (np_pro {me|Pro|pronoun}) (np_det {the|Det|det} (nom_n "
      "{flights|N|noun})))))";

  SUBCASE("moderate confidence keeps common readings of both words") {
    const auto lat = lattice("0.1");
    const auto base = Pipeline(g, &r.model, &*r.specialized, variant("E-P-")).run(lat);
    const auto pruned = Pipeline(g, &r.model, &*r.specialized, variant("E-P+")).run(lat);
    CHECK(count(base, "one") == 3);
    CHECK(count(base, "the") == 1);
    CHECK(pruned.analyses.size() < base.analyses.size());
    REQUIRE_FALSE(pruned.analyses.empty());
    CHECK(to_string(*pruned.analyses.front().derivation) == the_reading);
  }
  SUBCASE("low confidence removes every reading of the weak word") {
    const auto lat = lattice("0.001");
    const auto base = Pipeline(g, &r.model, &*r.specialized, variant("E-P-")).run(lat);
    const auto pruned = Pipeline(g, &r.model, &*r.specialized, variant("E-P+")).run(lat);
    CHECK(count(base, "one") == 3);
    REQUIRE(pruned.analyses.size() == 1);
    CHECK(to_string(*pruned.analyses.front().derivation) == the_reading);
  }
}

TEST_CASE("variant invariants on held-out utterances") {
  const auto& r = trained();
  const auto test = sample(120, 2, "t");
  const auto rep = evaluate(test, toy(), &r.model, &*r.specialized, all_variants(), {});
  REQUIRE(rep.variants.size() == 4);
  const auto& base = rep.variants[0];
  CHECK(rep.coverage_loss(base) == 0.0);
  CHECK(rep.coverage_loss_parsable(base) == 0.0);
  const auto* p = rep.find("E-P+");
  const auto* e = rep.find("E+P-");
  const auto* ep = rep.find("E+P+");
  REQUIRE((p && e && ep));
  for (std::size_t i = 0; i < test.size(); ++i) {
    CHECK(p->rows[i].analyses <= base.rows[i].analyses);
    CHECK(e->rows[i].analyses <= base.rows[i].analyses);
    CHECK(ep->rows[i].analyses <= e->rows[i].analyses);
    CHECK(ep->rows[i].analyses <= base.rows[i].analyses);
    if (e->rows[i].gold_found) CHECK(base.rows[i].gold_found);
  }
  CHECK(base.covered() == test.size());  // sampled trees are always recoverable

  const auto table = rep.timing_table();
  for (auto n : {"E-P-", "E-P+", "E+P-", "E+P+", "Lexical", "Phrasal", "Pruning1", "Pruning2", "Full", "TOTAL"}) {
    CHECK(table.find(n) != std::string::npos);
  }
  CHECK(rep.machine_report() ==
        evaluate(test, toy(), &r.model, &*r.specialized, all_variants(), {}).machine_report());
}

TEST_CASE("baseline does not depend on the artifacts") {
  const auto test = sample(40, 77, "b");
  const auto& r = trained();
  for (const auto& u : test) {
    const auto lat = linear_lattice(u.sentence);
    const auto with = Pipeline(toy(), &r.model, &*r.specialized, variant("E-P-")).run(lat);
    const auto without = Pipeline(toy(), nullptr, nullptr, variant("E-P-")).run(lat);
    CHECK(derivations(with) == derivations(without));
  }
}

TEST_CASE("evaluate prepends a baseline") {
  const auto& r = trained();
  const auto rep = evaluate(sample(10, 5, "x"), toy(), &r.model, &*r.specialized, {variant("E+P+")}, {});
  REQUIRE(rep.variants.size() == 2);
  CHECK(rep.variants[0].config.name() == "E-P-");
}

TEST_CASE("timed-out utterances count as failures") {
  const auto& r = trained();
  const auto test = sample(5, 6, "z");
  PipelineConfig c = variant("E-P-");
  c.timeout_s = 1e-9;
  PipelineConfig base = variant("E-P-");
  const auto rep = evaluate(test, toy(), &r.model, &*r.specialized, {base, c}, {});
  REQUIRE(rep.variants.size() == 2);
  const auto& v = rep.variants[1];
  CHECK(v.timeouts() == test.size());
  CHECK(v.covered() == 0);
  CHECK(v.rows.size() == test.size());
}

#ifdef GRSPEC_CLI
namespace {

int run(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("command-line exit codes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("grspec_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = GRSPEC_CLI;
  const std::string grammar = data_path("toy_airline.grammar");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };

  const auto ok_in = write("ok.txt", "show me the flights to boston\n");
  const auto bad_in = write("bad.txt", "boston boston the\n");
  const auto long_in = write("long.txt", "show me the flights from boston to denver on monday morning\n");

  CHECK(run(cli + " parse --grammar " + grammar + " --input " + ok_in) == 0);
  CHECK(run(cli + " parse --grammar " + grammar + " --input " + bad_in) == 2);
  CHECK(run(cli + " parse --grammar " + grammar + " --timeout 1e-9 --input " + long_in) == 3);
  CHECK(run(cli + " parse --grammar " + grammar + " --prune --input " + ok_in) == 1);
  CHECK(run(cli + " parse --grammar " + grammar + " --model " + (dir / "missing.model").string() +
            " --prune --input " + ok_in) == 1);
  CHECK(run(cli + " parse --grammar " + (dir / "nope.grammar").string() + " --input " + ok_in) == 1);
  CHECK(run(cli + " bogus") == 1);

  // closed loop through the files
  const auto corpus = (dir / "train.jsonl").string();
  const auto model = (dir / "m.model").string();
  const auto sg = (dir / "m.sg").string();
  REQUIRE(run(cli + " gen-corpus --grammar " + grammar + " --n 200 --seed 1 --out " + corpus) == 0);
  REQUIRE(run(cli + " train --grammar " + grammar + " --corpus " + corpus + " --out-model " + model +
              " --out-grammar " + sg) == 0);
  const auto show_in = write("show.txt", "show the flights\n");
  const auto out = (dir / "out.txt").string();
  const int rc = std::system((cli + " parse --grammar " + grammar + " --model " + model + " --specialized " + sg +
                              " --prune --input " + show_in + " > " + out + " 2>/dev/null")
                                 .c_str());
  CHECK(rc == 0);
  const auto text = read_file(out);
  CHECK(text.find("# line1") != std::string::npos);
  CHECK(text.find("(utt_s (s_imp (vp_vnp {show|V|display} (np_det {the|Det|det} (nom_n {flights|N|noun})))))") !=
        std::string::npos);
  CHECK(text.find("times lexical=") != std::string::npos);
  fs::remove_all(dir);
}
#endif
