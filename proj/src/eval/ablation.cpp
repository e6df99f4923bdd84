#include "bindcore/eval/ablation.hpp"

#include <numeric>
#include <sstream>

#include "bindcore/common/error.hpp"
#include "bindcore/eval/retrieval.hpp"
#include "bindcore/num/rng.hpp"

namespace bindcore::eval {

std::vector<AblationRowResult> ablation_run(const chem::DataStore& data,
                                            const std::vector<AblationRowSpec>& rows,
                                            const align::ModelConfig& model_config,
                                            const align::AlignmentConfig& base_config) {
  if (rows.empty()) throw ConfigError("ablation_run: empty configuration grid");
  for (const auto& row : rows) {
    if (row.pairs.empty()) {
      throw ConfigError("ablation_run: configuration '" + row.label + "' has no pair kinds");
    }
  }

  std::vector<AblationRowResult> results;
  num::Rng root(base_config.seed);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Same model initialization for every row; each row trains on its own
    // stream so rows stay independent when run in parallel.
    align::JointModel model = align::JointModel::init(model_config, base_config.seed);

    align::AlignmentConfig cfg = base_config;
    cfg.active_pairs = rows[i].pairs;
    cfg.seed = root.split("ablation").split(i).seed();
    align::train(model, data, cfg);

    RetrievalOptions options;
    options.mode = RetrievalMode::FullSet;
    options.split = chem::Split::Test;
    options.query_left = true;  // language is the left side of both kinds
    options.ks = {1};

    AblationRowResult result;
    result.label = rows[i].label;
    result.seed = base_config.seed;
    result.l2g_recall_at_1 =
        evaluate_retrieval(model, data, chem::PairKind::LanguageGraph, options).recall_at.at(1);
    result.l2c_recall_at_1 =
        evaluate_retrieval(model, data, chem::PairKind::LanguageConformation, options)
            .recall_at.at(1);
    results.push_back(std::move(result));
  }
  return results;
}

std::string ablation_csv(const std::vector<AblationRowResult>& rows) {
  std::ostringstream out;
  out << "config,l2g_recall_at_1,l2c_recall_at_1,seed\n";
  for (const auto& row : rows) {
    out << '"' << row.label << "\"," << row.l2g_recall_at_1 << ',' << row.l2c_recall_at_1 << ','
        << row.seed << '\n';
  }
  return out.str();
}

EmergenceStats emergence_test(const align::JointModel& model, const chem::DataStore& data,
                              chem::PairKind kind, chem::Split split, int n_permutations,
                              std::uint64_t seed) {
  const chem::PairManifest subset = data.manifest(kind).filter(split);
  const int n = static_cast<int>(subset.entries.size());
  if (n < 2) throw DataError("emergence_test: need at least 2 pairs");
  if (n_permutations < 1) throw ConfigError("emergence_test: need at least 1 permutation");

  const auto [left_mod, right_mod] = pair_modalities(kind);
  const int d = model.config.embed_dim;
  std::vector<num::Tensor> left_rows, right_rows;
  for (const auto& e : subset.entries) {
    left_rows.push_back(num::reshape(model.embed_record(left_mod, data, e.left), {1, d}));
    right_rows.push_back(num::reshape(model.embed_record(right_mod, data, e.right), {1, d}));
  }
  SimilarityMatrix sim =
      similarity_matrix(num::concat(left_rows, 0), num::concat(right_rows, 0));

  EmergenceStats stats;
  double diag = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    diag += sim.score(i, i);
    for (int j = 0; j < n; ++j) total += sim.score(i, j);
  }
  stats.matched_mean = diag / n;
  stats.mismatched_mean = (total - diag) / (static_cast<double>(n) * (n - 1));
  stats.margin = stats.matched_mean - stats.mismatched_mean;

  // Permutation test on the pairing: how often does a random assignment of
  // right-side rows score at least as well as the true pairing?
  num::Rng rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  int at_least = 0;
  for (int p = 0; p < n_permutations; ++p) {
    rng.shuffle(perm);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sim.score(i, perm[static_cast<std::size_t>(i)]);
    if (s / n >= stats.matched_mean) ++at_least;
  }
  stats.p_value = (1.0 + at_least) / (1.0 + n_permutations);
  return stats;
}

}  // namespace bindcore::eval
