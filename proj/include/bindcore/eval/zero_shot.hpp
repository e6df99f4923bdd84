#pragma once

#include <string>
#include <vector>

#include "bindcore/align/model.hpp"

namespace bindcore::eval {

// Renders each candidate name through the classification template, embeds it
// with the text tower, and softmaxes the graph-to-name similarities at
// temperature tau.
std::vector<double> zero_shot_classify(const align::JointModel& model,
                                       const chem::MoleculeGraph& graph,
                                       const std::vector<std::string>& names, double tau);

std::string classification_prompt(const std::string& name);

}  // namespace bindcore::eval
