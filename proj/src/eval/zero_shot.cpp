#include "bindcore/eval/zero_shot.hpp"

#include <algorithm>
#include <cmath>

#include "bindcore/common/error.hpp"

namespace bindcore::eval {

std::string classification_prompt(const std::string& name) {
  return "The molecule is " + name + ".";
}

std::vector<double> zero_shot_classify(const align::JointModel& model,
                                       const chem::MoleculeGraph& graph,
                                       const std::vector<std::string>& names, double tau) {
  if (names.empty()) throw ContractError("zero_shot_classify: empty name list");
  if (!(tau > 0.0)) throw ContractError("zero_shot_classify: temperature must be positive");

  const num::Tensor g = model.embed_graph(graph);
  const int d = model.config.embed_dim;

  std::vector<double> logits;
  logits.reserve(names.size());
  for (const auto& name : names) {
    const chem::TokenSequence seq = chem::tokenize(model.config.vocab, classification_prompt(name));
    const num::Tensor t = model.embed_text(seq);
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += g.at(j) * t.at(j);
    logits.push_back(dot / tau);
  }

  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    z += probs[i];
  }
  for (auto& p : probs) p /= z;
  return probs;
}

}  // namespace bindcore::eval
