#include "grspec/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace grspec {

void PipelineConfig::validate() const {
  if (!(fraction2 > 0.0 && fraction2 < fraction1 && fraction1 < 1.0)) {
    throw std::invalid_argument("pruning fractions must satisfy 0 < fraction2 < fraction1 < 1");
  }
  if (!(timeout_s > 0.0)) throw std::invalid_argument("timeout must be positive");
}

std::string PipelineConfig::name() const {
  return std::string(specialized ? "E+" : "E-") + (prune ? "P+" : "P-");
}

PipelineConfig PipelineConfig::from_name(const std::string& name) {
  if (name.size() != 4 || name[0] != 'E' || name[2] != 'P' || (name[1] != '+' && name[1] != '-') ||
      (name[3] != '+' && name[3] != '-')) {
    throw std::invalid_argument("unknown variant '" + name + "' (expected E[+-]P[+-])");
  }
  PipelineConfig c;
  c.specialized = name[1] == '+';
  c.prune = name[3] == '+';
  return c;
}

PhaseTimes& PhaseTimes::operator+=(const PhaseTimes& o) {
  lexical += o.lexical;
  phrasal += o.phrasal;
  prune1 += o.prune1;
  prune2 += o.prune2;
  full += o.full;
  return *this;
}

Pipeline::Pipeline(const Grammar& grammar, const PruneModel* model, const SpecializedGrammar* sg,
                   PipelineConfig config)
    : grammar_(grammar), model_(model), sg_(sg), config_(config) {
  config_.validate();
  if (config_.prune && !model_) throw std::invalid_argument("pruning requires a prune model");
  if (config_.specialized && !sg_) throw std::invalid_argument("specialized parsing requires a specialized grammar");
  if (sg_ && sg_->source_grammar_id() != grammar.checksum_hex()) {
    throw std::invalid_argument("specialized grammar was built from a different grammar");
  }
  phrasal_ = std::make_shared<const RuleSet>(RuleSet::phrasal(grammar_));
  full_ = std::make_shared<const RuleSet>(config_.specialized ? RuleSet::macro(*sg_) : RuleSet::nonphrasal(grammar_));
  if (config_.prune) scorer_ = std::make_shared<const PruneScorer>(*model_);
}

namespace {
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

PipelineResult Pipeline::run(const Lattice& lattice) const {
  PipelineResult res;
  const auto begin = Clock::now();
  PassOptions opts;
  opts.deadline = begin + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config_.timeout_s));
  opts.depth_cap = config_.depth_cap;

  auto t = Clock::now();
  Chart chart = lexical_pass(lattice, grammar_);
  res.times.lexical = seconds_since(t);

  if (config_.prune) {
    t = Clock::now();
    score_chart(*scorer_, chart, PruneStage::lexical);
    res.prune1 = prune(chart, config_.fraction1);
    res.times.prune1 = seconds_since(t);
  }

  t = Clock::now();
  const PassStats ps = phrasal_pass(chart, *phrasal_, opts);
  res.times.phrasal = seconds_since(t);
  res.edges_after_phrasal = chart.size();
  if (ps.timed_out) {
    res.timed_out = true;
    res.warnings = chart.warnings;
    return res;
  }

  if (config_.prune) {
    t = Clock::now();
    score_chart(*scorer_, chart, PruneStage::phrasal);
    res.prune2 = prune(chart, config_.fraction2);
    res.times.prune2 = seconds_since(t);
  }

  res.warnings = chart.warnings;
  t = Clock::now();
  FullPassResult fr = full_pass(std::move(chart), *full_, config_.specialized ? sg_ : nullptr, opts);
  res.times.full = seconds_since(t);
  res.timed_out = fr.timed_out();
  res.analyses = std::move(fr.analyses);
  return res;
}

// ---------------------------------------------------------------------------
// Training

PruneModel train_prune_model(const Corpus& corpus, const Grammar& grammar, const PruneModel& params,
                             std::size_t* irreproducible, std::vector<std::string>* notes) {
  params.validate();
  PruneModel model;
  model.smoothing_a = params.smoothing_a;
  model.smoothing_b = params.smoothing_b;
  model.score_floor = params.score_floor;
  model.fraction_phase1 = params.fraction_phase1;
  model.fraction_phase2 = params.fraction_phase2;
  const RuleSet phrasal = RuleSet::phrasal(grammar);
  std::size_t bad = 0;
  for (const auto& e : corpus) {
    const Lattice lat = linear_lattice(e.sentence, e.id);
    try {
      Chart chart = lexical_pass(lat, grammar);
      observe(model, chart, e.tree, grammar, PruneStage::lexical);
      phrasal_pass(chart, phrasal);
      observe(model, chart, e.tree, grammar, PruneStage::phrasal);
      // The full parse is built from these edges; if one is missing the
      // gold tree cannot come out of the pipeline.
      for (const auto& g : gold_constituents(e.tree, lat, grammar, PruneStage::phrasal)) {
        bool present = false;
        for (std::size_t i : chart.starting_at(g.start)) {
          const auto& ce = chart.edges()[i];
          if (ce.end == g.end && ce.category == g.category && to_string(ce.derivation) == g.derivation) {
            present = true;
            break;
          }
        }
        if (!present) throw std::runtime_error("gold constituent " + g.derivation + " missing from chart");
      }
    } catch (const std::exception& ex) {
      ++bad;
      if (notes) notes->push_back(e.id + ": " + ex.what());
    }
  }
  if (irreproducible) *irreproducible = bad;
  return model;
}

SpecializedGrammar specialize(const Corpus& corpus, const Grammar& grammar, ChunkScheme scheme,
                              std::vector<std::string>* notes) {
  std::vector<Chunk> chunks;
  for (const auto& e : corpus) {
    AnnotatedTree at = classify_nodes(e.tree, grammar);
    if (notes) {
      for (auto& n : at.notes) notes->push_back(e.id + ": " + n);
    }
    auto cs = extract_chunks(at, grammar, scheme);
    chunks.insert(chunks.end(), std::make_move_iterator(cs.begin()), std::make_move_iterator(cs.end()));
  }
  return synthesize(chunks, grammar, scheme);
}

TrainResult train(const Corpus& corpus, const Grammar& grammar, ChunkScheme scheme, const PruneModel& params) {
  TrainResult r;
  r.utterances = corpus.size();
  r.model = train_prune_model(corpus, grammar, params, &r.irreproducible, &r.notes);
  r.specialized = specialize(corpus, grammar, scheme, &r.notes);
  r.report = check_specialized(*r.specialized, grammar);
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation

std::size_t VariantReport::covered() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.gold_found; }));
}

std::size_t VariantReport::timeouts() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.timed_out; }));
}

double VariantReport::coverage() const {
  return rows.empty() ? 0.0 : static_cast<double>(covered()) / static_cast<double>(rows.size());
}

double VariantReport::mean_analyses() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += static_cast<double>(r.analyses);
  return s / static_cast<double>(rows.size());
}

PhaseTimes VariantReport::mean_times() const {
  PhaseTimes t;
  for (const auto& r : rows) t += r.times;
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    t.lexical /= n;
    t.phrasal /= n;
    t.prune1 /= n;
    t.prune2 /= n;
    t.full /= n;
  }
  return t;
}

const VariantReport* EvalReport::find(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.config.name() == name) return &v;
  }
  return nullptr;
}

double EvalReport::coverage_loss(const VariantReport& v) const {
  return variants.front().coverage() - v.coverage();
}

double EvalReport::coverage_loss_parsable(const VariantReport& v) const {
  const auto& base = variants.front().rows;
  std::size_t denom = 0, missed = 0;
  for (std::size_t i = 0; i < base.size() && i < v.rows.size(); ++i) {
    if (!base[i].gold_found) continue;
    ++denom;
    if (!v.rows[i].gold_found) ++missed;
  }
  return denom == 0 ? 0.0 : static_cast<double>(missed) / static_cast<double>(denom);
}

namespace {
std::string fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}
}  // namespace

std::string EvalReport::timing_table() const {
  std::ostringstream os;
  auto row = [&](const std::string& label, auto value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-10s", label.c_str());
    os << buf;
    for (const auto& v : variants) {
      std::snprintf(buf, sizeof buf, " %12s", value(v).c_str());
      os << buf;
    }
    os << "\n";
  };
  row("", [](const VariantReport& v) { return v.config.name(); });
  row("Lexical", [](const VariantReport& v) { return fixed(v.mean_times().lexical * 1e3, 3); });
  row("Phrasal", [](const VariantReport& v) { return fixed(v.mean_times().phrasal * 1e3, 3); });
  row("Pruning1", [](const VariantReport& v) { return fixed(v.mean_times().prune1 * 1e3, 3); });
  row("Pruning2", [](const VariantReport& v) { return fixed(v.mean_times().prune2 * 1e3, 3); });
  row("Full", [](const VariantReport& v) { return fixed(v.mean_times().full * 1e3, 3); });
  row("TOTAL", [](const VariantReport& v) { return fixed(v.mean_times().total() * 1e3, 3); });
  os << "(mean milliseconds per utterance)\n";
  row("Coverage", [](const VariantReport& v) { return fixed(v.coverage() * 100.0, 1) + "%"; });
  row("Analyses", [](const VariantReport& v) { return fixed(v.mean_analyses(), 2); });
  row("Timeouts", [](const VariantReport& v) { return std::to_string(v.timeouts()); });
  return os.str();
}

std::string EvalReport::machine_report() const {
  std::ostringstream os;
  for (const auto& v : variants) {
    os << "variant\t" << v.config.name() << "\tutterances\t" << v.rows.size() << "\tcovered\t" << v.covered()
       << "\ttimeouts\t" << v.timeouts() << "\tmean_analyses\t" << fixed(v.mean_analyses(), 6)
       << "\tloss_all\t" << fixed(coverage_loss(v), 6) << "\tloss_parsable\t"
       << fixed(coverage_loss_parsable(v), 6) << "\n";
  }
  for (const auto& v : variants) {
    for (const auto& r : v.rows) {
      os << "utterance\t" << v.config.name() << "\t" << r.id << "\t" << r.analyses << "\t"
         << (r.gold_found ? "gold" : "miss") << "\t" << (r.timed_out ? "timeout" : "done") << "\n";
    }
  }
  return os.str();
}

std::vector<PipelineConfig> all_variants(const PipelineConfig& base) {
  std::vector<PipelineConfig> out;
  for (bool spec : {false, true}) {
    for (bool pr : {false, true}) {
      PipelineConfig c = base;
      c.specialized = spec;
      c.prune = pr;
      out.push_back(c);
    }
  }
  // Order: E-P-, E-P+, E+P-, E+P+
  return out;
}

EvalReport evaluate(const Corpus& test, const Grammar& grammar, const PruneModel* model,
                    const SpecializedGrammar* sg, const std::vector<PipelineConfig>& configs,
                    const EvalOptions& opts) {
  std::vector<PipelineConfig> cfgs = configs;
  if (cfgs.empty() || cfgs.front().prune || cfgs.front().specialized) {
    PipelineConfig base = cfgs.empty() ? PipelineConfig{} : cfgs.front();
    base.prune = false;
    base.specialized = false;
    cfgs.erase(std::remove_if(cfgs.begin(), cfgs.end(),
                              [](const PipelineConfig& c) { return !c.prune && !c.specialized; }),
               cfgs.end());
    cfgs.insert(cfgs.begin(), base);
  }

  std::vector<Lattice> lattices;
  std::vector<std::string> gold;
  lattices.reserve(test.size());
  for (const auto& e : test) {
    lattices.push_back(linear_lattice(e.sentence, e.id));
    gold.push_back(to_string(e.tree));
  }

  EvalReport rep;
  for (const auto& cfg : cfgs) {
    Pipeline p(grammar, model, sg, cfg);
    if (opts.warmup && !lattices.empty()) (void)p.run(lattices.front());
    VariantReport vr;
    vr.config = cfg;
    for (std::size_t i = 0; i < test.size(); ++i) {
      UtteranceOutcome o;
      o.id = test[i].id;
      PipelineResult r;
      try {
        r = p.run(lattices[i]);
      } catch (const LatticeError&) {
        vr.rows.push_back(o);
        continue;
      }
      o.times = r.times;
      o.timed_out = r.timed_out;
      o.analyses = r.analyses.size();
      if (!r.timed_out) {
        for (const auto& a : r.analyses) {
          if (to_string(a.derivation) == gold[i]) {
            o.gold_found = true;
            break;
          }
        }
      }
      vr.rows.push_back(std::move(o));
    }
    rep.variants.push_back(std::move(vr));
  }
  return rep;
}

}  // namespace grspec
