#include <benchmark/benchmark.h>

#include "grspec/pipeline.hpp"

using namespace grspec;

namespace {

struct Fixture {
  Grammar grammar;
  TrainResult trained;
  Corpus test;
  std::vector<Lattice> lattices;

  Fixture() : grammar(load_grammar(std::string(GRSPEC_BENCH_DATA_DIR) + "/toy_airline.grammar")) {
    GenOptions o;
    o.n = 1000;
    o.seed = 1;
    trained = train(gen_corpus(grammar, o), grammar, ChunkScheme::new_scheme, PruneModel{});
    o.n = 200;
    o.seed = 2;
    o.id_prefix = "t";
    test = gen_corpus(grammar, o);
    for (const auto& e : test) lattices.push_back(linear_lattice(e.sentence, e.id));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

// One iteration parses the whole test set.
void BM_Pipeline(benchmark::State& state, const char* variant) {
  const auto& f = fixture();
  const Pipeline p(f.grammar, &f.trained.model, &*f.trained.specialized, PipelineConfig::from_name(variant));
  std::size_t analyses = 0;
  for (auto _ : state) {
    for (const auto& lat : f.lattices) {
      auto r = p.run(lat);
      analyses += r.analyses.size();
      benchmark::DoNotOptimize(r);
    }
  }
  state.counters["utterances/s"] =
      benchmark::Counter(static_cast<double>(state.iterations() * f.lattices.size()), benchmark::Counter::kIsRate);
  state.counters["analyses"] = static_cast<double>(analyses) / static_cast<double>(state.iterations());
}
BENCHMARK_CAPTURE(BM_Pipeline, E-P-, "E-P-")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Pipeline, E-P+, "E-P+")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Pipeline, E+P-, "E+P-")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Pipeline, E+P+, "E+P+")->Unit(benchmark::kMillisecond);

void BM_LexicalPass(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    for (const auto& lat : f.lattices) benchmark::DoNotOptimize(lexical_pass(lat, f.grammar));
  }
}
BENCHMARK(BM_LexicalPass)->Unit(benchmark::kMicrosecond);

void BM_PhrasalPass(benchmark::State& state) {
  const auto& f = fixture();
  const RuleSet rs = RuleSet::phrasal(f.grammar);
  std::vector<Chart> charts;
  for (const auto& lat : f.lattices) charts.push_back(lexical_pass(lat, f.grammar));
  for (auto _ : state) {
    for (const auto& c : charts) {
      Chart work = c;
      benchmark::DoNotOptimize(phrasal_pass(work, rs));
    }
  }
}
BENCHMARK(BM_PhrasalPass)->Unit(benchmark::kMicrosecond);

void BM_ScoreAndPrune(benchmark::State& state, PruneStage stage) {
  const auto& f = fixture();
  const PruneScorer scorer(f.trained.model);
  const RuleSet rs = RuleSet::phrasal(f.grammar);
  std::vector<Chart> charts;
  for (const auto& lat : f.lattices) {
    charts.push_back(lexical_pass(lat, f.grammar));
    if (stage == PruneStage::phrasal) phrasal_pass(charts.back(), rs);
  }
  for (auto _ : state) {
    for (const auto& c : charts) {
      Chart work = c;
      benchmark::DoNotOptimize(score_and_prune(scorer, work, stage));
    }
  }
}
BENCHMARK_CAPTURE(BM_ScoreAndPrune, lexical, PruneStage::lexical)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_ScoreAndPrune, phrasal, PruneStage::phrasal)->Unit(benchmark::kMicrosecond);

void BM_FullPass(benchmark::State& state, bool specialized) {
  const auto& f = fixture();
  const auto& sg = *f.trained.specialized;
  const RuleSet rs = specialized ? RuleSet::macro(sg) : RuleSet::nonphrasal(f.grammar);
  const RuleSet phr = RuleSet::phrasal(f.grammar);
  std::vector<Chart> charts;
  for (const auto& lat : f.lattices) {
    charts.push_back(lexical_pass(lat, f.grammar));
    phrasal_pass(charts.back(), phr);
  }
  for (auto _ : state) {
    for (const auto& c : charts) benchmark::DoNotOptimize(full_pass(c, rs, specialized ? &sg : nullptr));
  }
}
BENCHMARK_CAPTURE(BM_FullPass, original, false)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_FullPass, specialized, true)->Unit(benchmark::kMicrosecond);

void BM_Train(benchmark::State& state) {
  const auto& f = fixture();
  GenOptions o;
  o.n = static_cast<std::size_t>(state.range(0));
  o.seed = 1;
  const Corpus corpus = gen_corpus(f.grammar, o);
  for (auto _ : state) benchmark::DoNotOptimize(train(corpus, f.grammar, ChunkScheme::new_scheme, PruneModel{}));
}
BENCHMARK(BM_Train)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
