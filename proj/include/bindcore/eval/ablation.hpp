#pragma once

#include <string>
#include <vector>

#include "bindcore/align/trainer.hpp"

namespace bindcore::eval {

struct AblationRowSpec {
  std::string label;
  std::vector<chem::PairKind> pairs;
};

struct AblationRowResult {
  std::string label;
  std::uint64_t seed = 0;
  double l2g_recall_at_1 = 0.0;  // full test set, language -> graph
  double l2c_recall_at_1 = 0.0;  // full test set, language -> conformation
};

// Trains one model per configuration (identical initialization, one training
// stream per row) and reports full-test L2G / L2C R@1 per row, in input
// order.
std::vector<AblationRowResult> ablation_run(const chem::DataStore& data,
                                            const std::vector<AblationRowSpec>& rows,
                                            const align::ModelConfig& model_config,
                                            const align::AlignmentConfig& base_config);

std::string ablation_csv(const std::vector<AblationRowResult>& rows);

// Matched-vs-mismatched cosine margin with a permutation test over the given
// split's pairings.
struct EmergenceStats {
  double matched_mean = 0.0;
  double mismatched_mean = 0.0;
  double margin = 0.0;
  double p_value = 1.0;
};

EmergenceStats emergence_test(const align::JointModel& model, const chem::DataStore& data,
                              chem::PairKind kind, chem::Split split, int n_permutations,
                              std::uint64_t seed);

}  // namespace bindcore::eval
