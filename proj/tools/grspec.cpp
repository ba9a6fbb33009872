// grspec: corpus generation, training, parsing and evaluation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grspec/corpus.hpp"
#include "grspec/ebl.hpp"
#include "grspec/grammar.hpp"
#include "grspec/lattice.hpp"
#include "grspec/pipeline.hpp"
#include "grspec/prune_model.hpp"
#include "grspec/specialized.hpp"

namespace {

enum Exit { kOk = 0, kError = 1, kNoParse = 2, kTimeout = 3 };

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, sep)) {
    if (!p.empty()) parts.push_back(p);
  }
  return parts;
}

struct GenArgs {
  std::string grammar, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t max_depth = 12;
  std::string prefix = "u";
};

int gen_corpus_cmd(const GenArgs& a) {
  const auto g = grspec::load_grammar(a.grammar);
  grspec::GenOptions opts;
  opts.n = a.n;
  opts.seed = a.seed;
  opts.max_depth = a.max_depth;
  opts.id_prefix = a.prefix;
  const auto corpus = grspec::gen_corpus(g, opts);
  std::ostringstream os;
  grspec::write_corpus(os, corpus);
  if (a.out.empty() || a.out == "-") {
    std::cout << os.str();
  } else {
    write_file(a.out, os.str());
  }
  std::size_t total = 0;
  for (const auto& [len, count] : grspec::length_histogram(corpus)) total += len * count;
  std::cerr << "generated " << corpus.size() << " utterances, mean length "
            << (corpus.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(corpus.size())) << "\n";
  return kOk;
}

struct TrainArgs {
  std::string grammar, corpus, scheme = "new", out_model, out_grammar, report;
};

int train_cmd(const TrainArgs& a) {
  const auto g = grspec::load_grammar(a.grammar);
  const auto scheme = grspec::chunk_scheme_from_string(a.scheme);
  if (!scheme) throw std::invalid_argument("unknown scheme '" + a.scheme + "'");
  const auto corpus = grspec::load_corpus(a.corpus, g);
  const auto r = grspec::train(corpus, g, *scheme);
  write_file(a.out_model, grspec::serialize(r.model));
  write_file(a.out_grammar, grspec::serialize(*r.specialized));

  std::ostringstream rep;
  rep << "utterances: " << r.utterances << "\n";
  rep << "irreproducible: " << r.irreproducible << "\n";
  rep << "model entries: " << r.model.entries() << "\n";
  rep << r.report.text();
  for (const auto& n : r.notes) rep << "note: " << n << "\n";
  if (!a.report.empty()) write_file(a.report, rep.str());
  std::cerr << rep.str();
  return kOk;
}

struct ParseArgs {
  std::string grammar, model, specialized, input;
  bool prune = false, lattice = false, text = false;
  double fraction1 = 1.0 / 20.0, fraction2 = 1.0 / 150.0, timeout = 90.0;
};

int parse_cmd(const ParseArgs& a) {
  const auto g = grspec::load_grammar(a.grammar);
  if (a.prune && a.model.empty()) throw std::invalid_argument("--prune needs --model");
  std::optional<grspec::PruneModel> model;
  if (!a.model.empty()) model = grspec::load_prune_model(a.model);
  std::optional<grspec::SpecializedGrammar> sg;
  if (!a.specialized.empty()) sg = grspec::load_specialized(a.specialized, g);

  grspec::PipelineConfig cfg;
  cfg.prune = a.prune;
  cfg.specialized = sg.has_value();
  cfg.fraction1 = a.fraction1;
  cfg.fraction2 = a.fraction2;
  cfg.timeout_s = a.timeout;
  grspec::Pipeline pipeline(g, model ? &*model : nullptr, sg ? &*sg : nullptr, cfg);

  std::ifstream file;
  if (!a.input.empty()) {
    file.open(a.input);
    if (!file) throw std::invalid_argument("cannot open '" + a.input + "'");
  }
  std::istream& in = a.input.empty() ? std::cin : file;

  int status = kOk;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++n;
    const grspec::Lattice lat =
        a.lattice ? grspec::parse_lattice_json(line) : grspec::linear_lattice(line, "line" + std::to_string(n));
    const auto r = pipeline.run(lat);
    std::cout << "# " << (lat.id.empty() ? "line" + std::to_string(n) : lat.id) << "\n";
    for (const auto& an : r.analyses) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", an.score);
      std::cout << buf << "\t" << grspec::to_string(an.derivation) << "\n";
    }
    char times[256];
    std::snprintf(times, sizeof times,
                  "times lexical=%.6f phrasal=%.6f prune1=%.6f prune2=%.6f full=%.6f total=%.6f",
                  r.times.lexical, r.times.phrasal, r.times.prune1, r.times.prune2, r.times.full,
                  r.times.total());
    std::cout << times << "\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    if (r.timed_out) {
      std::cout << "timeout\n";
      status = kTimeout;
    } else if (r.analyses.empty()) {
      std::cout << "no parse\n";
      if (status == kOk) status = kNoParse;
    }
  }
  return status;
}

struct EvalArgs {
  std::string grammar, model, specialized, test, variants = "all", out;
  double fraction1 = 1.0 / 20.0, fraction2 = 1.0 / 150.0, timeout = 90.0;
};

int evaluate_cmd(const EvalArgs& a) {
  const auto g = grspec::load_grammar(a.grammar);
  const auto model = grspec::load_prune_model(a.model);
  const auto sg = grspec::load_specialized(a.specialized, g);
  const auto test = grspec::load_corpus(a.test, g);

  grspec::PipelineConfig base;
  base.fraction1 = a.fraction1;
  base.fraction2 = a.fraction2;
  base.timeout_s = a.timeout;
  std::vector<grspec::PipelineConfig> configs;
  if (a.variants == "all") {
    configs = grspec::all_variants(base);
  } else {
    for (const auto& name : split(a.variants, ',')) {
      auto c = grspec::PipelineConfig::from_name(name);
      c.fraction1 = base.fraction1;
      c.fraction2 = base.fraction2;
      c.timeout_s = base.timeout_s;
      configs.push_back(c);
    }
  }
  const auto rep = grspec::evaluate(test, g, &model, &sg, configs);
  std::cout << rep.timing_table();
  for (const auto& v : rep.variants) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s coverage %.4f loss(all) %+.4f loss(parsable) %.4f\n",
                  v.config.name().c_str(), v.coverage(), rep.coverage_loss(v), rep.coverage_loss_parsable(v));
    std::cout << buf;
  }
  if (!a.out.empty()) write_file(a.out, rep.machine_report());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar specialization and pruned lattice parsing"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-corpus", "Sample a corpus of gold derivations");
  g->add_option("--grammar", gen.grammar, "Grammar file")->required();
  g->add_option("--n", gen.n, "Number of utterances")->required();
  g->add_option("--seed", gen.seed, "Random seed")->required();
  g->add_option("--out", gen.out, "Output JSONL file (default stdout)");
  g->add_option("--max-depth", gen.max_depth, "Derivation height bound");
  g->add_option("--id-prefix", gen.prefix, "Utterance id prefix");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a prune model and a specialized grammar");
  t->add_option("--grammar", tr.grammar, "Grammar file")->required();
  t->add_option("--corpus", tr.corpus, "Training corpus (JSONL)")->required();
  t->add_option("--scheme", tr.scheme, "Chunking scheme")->check(CLI::IsMember({"new", "old", "whole", "identity"}));
  t->add_option("--out-model", tr.out_model, "Prune model output")->required();
  t->add_option("--out-grammar", tr.out_grammar, "Specialized grammar output")->required();
  t->add_option("--report", tr.report, "Training report output");

  ParseArgs pa;
  auto* p = app.add_subcommand("parse", "Parse text lines or lattices from stdin");
  p->add_option("--grammar", pa.grammar, "Grammar file")->required();
  p->add_option("--model", pa.model, "Prune model");
  p->add_option("--specialized", pa.specialized, "Specialized grammar");
  p->add_flag("--prune", pa.prune, "Prune before the phrasal and full passes");
  auto* lat_flag = p->add_flag("--lattice", pa.lattice, "Input lines are JSON lattices");
  auto* text_flag = p->add_flag("--text", pa.text, "Input lines are sentences (default)");
  lat_flag->excludes(text_flag);
  p->add_option("--fraction1", pa.fraction1, "Pruning fraction before the phrasal pass");
  p->add_option("--fraction2", pa.fraction2, "Pruning fraction before the full pass");
  p->add_option("--timeout", pa.timeout, "Per-utterance timeout in seconds");
  p->add_option("--input", pa.input, "Read input from a file instead of stdin");

  EvalArgs ev;
  auto* e = app.add_subcommand("evaluate", "Compare parser variants on a test corpus");
  e->add_option("--grammar", ev.grammar, "Grammar file")->required();
  e->add_option("--model", ev.model, "Prune model")->required();
  e->add_option("--specialized", ev.specialized, "Specialized grammar")->required();
  e->add_option("--test", ev.test, "Test corpus (JSONL)")->required();
  e->add_option("--variants", ev.variants, "all, or a comma list of E[+-]P[+-]");
  e->add_option("--fraction1", ev.fraction1, "Pruning fraction before the phrasal pass");
  e->add_option("--fraction2", ev.fraction2, "Pruning fraction before the full pass");
  e->add_option("--timeout", ev.timeout, "Per-utterance timeout in seconds");
  e->add_option("--out", ev.out, "Machine-readable report output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*g) return gen_corpus_cmd(gen);
    if (*t) return train_cmd(tr);
    if (*p) return parse_cmd(pa);
    if (*e) return evaluate_cmd(ev);
  } catch (const std::exception& ex) {
    std::cerr << "grspec: " << ex.what() << "\n";
    return kError;
  }
  return kError;
}
