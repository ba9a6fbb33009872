#include "grspec/prune_model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grspec {

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::left: return "LEFT";
    case Criterion::right: return "RIGHT";
    case Criterion::unigram: return "UNIGRAM";
  }
  return "?";
}

std::string_view to_string(PruneStage s) { return s == PruneStage::lexical ? "lex" : "phr"; }

EdgeProperty EdgeProperty::left(PruneStage s, std::string tag, std::string anchor, std::string left_tag) {
  EdgeProperty p;
  p.criterion = Criterion::left;
  p.stage = s;
  p.tag = std::move(tag);
  p.anchor = std::move(anchor);
  p.neighbour = std::move(left_tag);
  return p;
}

EdgeProperty EdgeProperty::right(PruneStage s, std::string tag, std::string anchor, std::string right_tag) {
  EdgeProperty p = left(s, std::move(tag), std::move(anchor), std::move(right_tag));
  p.criterion = Criterion::right;
  return p;
}

EdgeProperty EdgeProperty::unigram(PruneStage s, std::string tree_key) {
  EdgeProperty p;
  p.criterion = Criterion::unigram;
  p.stage = s;
  p.tree_key = std::move(tree_key);
  return p;
}

std::string EdgeProperty::key() const {
  std::string k(to_string(stage));
  k += '|';
  if (criterion == Criterion::unigram) return k + tree_key;
  return k + tag + '|' + anchor + '|' + neighbour;
}

CountTable& PruneModel::table(Criterion c) {
  return c == Criterion::left ? left : c == Criterion::right ? right : unigram;
}

const CountTable& PruneModel::table(Criterion c) const {
  return c == Criterion::left ? left : c == Criterion::right ? right : unigram;
}

void PruneModel::validate() const {
  if (!(fraction_phase2 > 0.0 && fraction_phase2 < fraction_phase1 && fraction_phase1 < 1.0)) {
    throw std::invalid_argument("pruning fractions must satisfy 0 < phase2 < phase1 < 1");
  }
  if (!(score_floor > 0.0)) throw std::invalid_argument("score floor must be positive");
  if (!(smoothing_b > 0.0 && smoothing_a >= 0.0 && smoothing_a <= smoothing_b)) {
    throw std::invalid_argument("smoothing requires 0 <= a <= b and b > 0");
  }
}

void PruneModel::merge(const PruneModel& other) {
  for (auto c : {Criterion::left, Criterion::right, Criterion::unigram}) {
    auto& mine = table(c);
    for (const auto& [k, v] : other.table(c)) {
      auto& slot = mine[k];
      slot.created += v.created;
      slot.correct += v.correct;
    }
  }
}

double estimate(const PruneModel& model, Criterion c, const std::string& key) {
  Counts counts;
  const auto& t = model.table(c);
  if (auto it = t.find(key); it != t.end()) counts = it->second;
  const double p = (static_cast<double>(counts.correct) + model.smoothing_a) /
                   (static_cast<double>(counts.created) + model.smoothing_b);
  return std::max(model.score_floor, p);
}

double estimate(const PruneModel& model, const EdgeProperty& p) {
  return estimate(model, p.criterion, p.key());
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string serialize(const PruneModel& model) {
  std::string out = "grspec-prune-model 1\n";
  out += "smoothing_a " + fmt(model.smoothing_a) + "\n";
  out += "smoothing_b " + fmt(model.smoothing_b) + "\n";
  out += "score_floor " + fmt(model.score_floor) + "\n";
  out += "fraction_phase1 " + fmt(model.fraction_phase1) + "\n";
  out += "fraction_phase2 " + fmt(model.fraction_phase2) + "\n";
  for (auto c : {Criterion::left, Criterion::right, Criterion::unigram}) {
    const auto& t = model.table(c);
    out += std::string(to_string(c)) + " " + std::to_string(t.size()) + "\n";
    for (const auto& [k, v] : t) {
      out += k + " " + std::to_string(v.created) + " " + std::to_string(v.correct) + "\n";
    }
  }
  return out;
}

PruneModel parse_prune_model(std::string_view text) {
  PruneModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](const std::string& msg) { throw std::invalid_argument("prune model: " + msg); };
  if (!std::getline(in, line) || line != "grspec-prune-model 1") fail("missing or unsupported header");

  auto read_param = [&](const char* name, double& dst) {
    if (!std::getline(in, line)) fail(std::string("missing ") + name);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> dst) || key != name) fail(std::string("expected ") + name);
  };
  read_param("smoothing_a", m.smoothing_a);
  read_param("smoothing_b", m.smoothing_b);
  read_param("score_floor", m.score_floor);
  read_param("fraction_phase1", m.fraction_phase1);
  read_param("fraction_phase2", m.fraction_phase2);

  for (auto c : {Criterion::left, Criterion::right, Criterion::unigram}) {
    if (!std::getline(in, line)) fail("missing section " + std::string(to_string(c)));
    std::istringstream hs(line);
    std::string name;
    std::size_t n = 0;
    if (!(hs >> name >> n) || name != to_string(c)) fail("expected section " + std::string(to_string(c)));
    auto& t = m.table(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::getline(in, line)) fail("truncated section " + name);
      const auto sp2 = line.rfind(' ');
      const auto sp1 = sp2 == std::string::npos || sp2 == 0 ? std::string::npos : line.rfind(' ', sp2 - 1);
      if (sp1 == std::string::npos) fail("malformed entry '" + line + "'");
      Counts counts;
      try {
        counts.created = std::stoull(line.substr(sp1 + 1, sp2 - sp1 - 1));
        counts.correct = std::stoull(line.substr(sp2 + 1));
      } catch (const std::exception&) {
        fail("malformed counts in '" + line + "'");
      }
      if (counts.correct > counts.created) fail("correct exceeds created in '" + line + "'");
      t[line.substr(0, sp1)] = counts;
    }
  }
  m.validate();
  return m;
}

PruneModel load_prune_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open prune model '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_prune_model(ss.str());
}

}  // namespace grspec
