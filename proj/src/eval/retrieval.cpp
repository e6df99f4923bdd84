#include "bindcore/eval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "bindcore/common/error.hpp"
#include "bindcore/num/rng.hpp"

namespace bindcore::eval {

using num::Tensor;

namespace {

// Fixed partition seed keeps in-batch numbers comparable between the trainer
// and the CLI evaluator.
constexpr std::uint64_t kBatchPartitionSeed = 0x5ca1ab1eULL;

void check_rows_normalized(const char* what, const Tensor& t) {
  const int rows = t.dim(0), d = t.dim(1);
  const auto& v = t.values();
  for (int i = 0; i < rows; ++i) {
    double sq = 0.0;
    for (int j = 0; j < d; ++j) {
      const double e = v[static_cast<std::size_t>(i) * d + j];
      sq += e * e;
    }
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-3) {
      throw ContractError(std::string(what) + ": row " + std::to_string(i) +
                          " is not L2-normalized");
    }
  }
}

}  // namespace

SimilarityMatrix similarity_matrix(const Tensor& queries, const Tensor& candidates) {
  if (queries.rank() != 2 || candidates.rank() != 2) {
    throw DimensionError("similarity_matrix: expected [Q×D] and [C×D]");
  }
  if (queries.dim(1) != candidates.dim(1)) {
    throw DimensionError("similarity_matrix: width mismatch " + num::shape_str(queries.shape()) +
                         " vs " + num::shape_str(candidates.shape()));
  }
  check_rows_normalized("similarity_matrix", queries);
  check_rows_normalized("similarity_matrix", candidates);

  SimilarityMatrix sim;
  sim.n_queries = queries.dim(0);
  sim.n_candidates = candidates.dim(0);
  const int d = queries.dim(1);
  sim.scores.resize(static_cast<std::size_t>(sim.n_queries) * sim.n_candidates);
  const auto& qv = queries.values();
  const auto& cv = candidates.values();
  for (int q = 0; q < sim.n_queries; ++q) {
    for (int c = 0; c < sim.n_candidates; ++c) {
      double dot = 0.0;
      for (int j = 0; j < d; ++j) {
        dot += qv[static_cast<std::size_t>(q) * d + j] * cv[static_cast<std::size_t>(c) * d + j];
      }
      sim.scores[static_cast<std::size_t>(q) * sim.n_candidates + c] = dot;
    }
  }
  if (sim.n_queries == sim.n_candidates) {
    sim.ground_truth.resize(static_cast<std::size_t>(sim.n_queries));
    std::iota(sim.ground_truth.begin(), sim.ground_truth.end(), 0);
  }
  return sim;
}

double recall_at_k(const SimilarityMatrix& sim, int k) {
  if (k < 1) throw ContractError("recall_at_k: K must be >= 1");
  if (k > sim.n_candidates) {
    throw ContractError("recall_at_k: K " + std::to_string(k) + " exceeds " +
                        std::to_string(sim.n_candidates) + " candidates");
  }
  if (static_cast<int>(sim.ground_truth.size()) != sim.n_queries) {
    throw ContractError("recall_at_k: ground truth missing");
  }
  int hits = 0;
  for (int q = 0; q < sim.n_queries; ++q) {
    const int gt = sim.ground_truth[static_cast<std::size_t>(q)];
    if (gt < 0 || gt >= sim.n_candidates) {
      throw ContractError("recall_at_k: ground truth index out of range");
    }
    const double s_gt = sim.score(q, gt);
    int ahead = 0;
    for (int c = 0; c < sim.n_candidates; ++c) {
      if (c == gt) continue;
      const double s = sim.score(q, c);
      if (s > s_gt || (s == s_gt && c < gt)) ++ahead;
    }
    if (ahead < k) ++hits;
  }
  return 100.0 * hits / sim.n_queries;
}

std::string direction_label(chem::PairKind kind, bool query_left) {
  auto letter = [](chem::Modality m) {
    switch (m) {
      case chem::Modality::Language: return 'L';
      case chem::Modality::Graph: return 'G';
      case chem::Modality::Conformation: return 'C';
      case chem::Modality::Pocket: return 'P';
    }
    return '?';
  };
  const auto [left, right] = pair_modalities(kind);
  const char a = letter(query_left ? left : right);
  const char b = letter(query_left ? right : left);
  return std::string{a, '2', b};
}

std::string RetrievalReport::to_json() const {
  nlohmann::json j;
  j["direction"] = direction;
  j["mode"] = mode == RetrievalMode::InBatch ? "batch" : "full";
  if (mode == RetrievalMode::InBatch) j["batch_size"] = batch_size;
  nlohmann::json recall;
  for (const auto& [k, v] : recall_at) recall[std::to_string(k)] = v;
  j["recall"] = recall;
  j["n_queries"] = n_queries;
  j["n_candidates"] = n_candidates;
  if (degenerate) j["degenerate"] = true;
  return j.dump();
}

RetrievalReport evaluate_retrieval(const align::JointModel& model, const chem::DataStore& data,
                                   chem::PairKind kind, const RetrievalOptions& options) {
  const chem::PairManifest subset = data.manifest(kind).filter(options.split);
  if (subset.entries.empty()) {
    throw DataError("evaluate_retrieval: split '" + chem::split_name(options.split) +
                    "' of " + chem::pair_kind_name(kind) + " is empty");
  }
  const int n = static_cast<int>(subset.entries.size());
  const auto [left_mod, right_mod] = pair_modalities(kind);

  std::vector<Tensor> left_rows, right_rows;
  left_rows.reserve(static_cast<std::size_t>(n));
  for (const auto& e : subset.entries) {
    const int d = model.config.embed_dim;
    left_rows.push_back(num::reshape(model.embed_record(left_mod, data, e.left), {1, d}));
    right_rows.push_back(num::reshape(model.embed_record(right_mod, data, e.right), {1, d}));
  }
  Tensor left = num::concat(left_rows, 0);
  Tensor right = num::concat(right_rows, 0);
  const Tensor& queries = options.query_left ? left : right;
  const Tensor& candidates = options.query_left ? right : left;

  RetrievalReport report;
  report.direction = direction_label(kind, options.query_left);
  report.mode = options.mode;

  auto ids_of = [&](bool left_side) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (const auto& e : subset.entries) ids.push_back(left_side ? e.left : e.right);
    return ids;
  };

  if (options.mode == RetrievalMode::FullSet) {
    SimilarityMatrix sim = similarity_matrix(queries, candidates);
    sim.query_ids = ids_of(options.query_left);
    sim.candidate_ids = ids_of(!options.query_left);
    report.n_queries = n;
    report.n_candidates = n;
    report.degenerate = n == 1;
    for (int k : options.ks) {
      if (k > sim.n_candidates) {
        report.degenerate = true;
        continue;
      }
      report.recall_at[k] = recall_at_k(sim, k);
    }
    return report;
  }

  const int b = options.batch_size;
  if (b < 2) throw ConfigError("evaluate_retrieval: batch size must be >= 2");
  if (n < b) {
    throw DataError("evaluate_retrieval: in-batch mode needs >= " + std::to_string(b) +
                    " samples, split has " + std::to_string(n));
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng(kBatchPartitionSeed);
  rng.shuffle(order);

  const int n_batches = n / b;  // final partial batch dropped
  const int d = model.config.embed_dim;
  std::map<int, double> sums;
  report.degenerate = false;
  for (int bi = 0; bi < n_batches; ++bi) {
    std::vector<double> qdata(static_cast<std::size_t>(b) * d);
    std::vector<double> cdata(static_cast<std::size_t>(b) * d);
    for (int r = 0; r < b; ++r) {
      const int src = order[static_cast<std::size_t>(bi * b + r)];
      for (int j = 0; j < d; ++j) {
        qdata[static_cast<std::size_t>(r) * d + j] = queries.at(static_cast<std::int64_t>(src) * d + j);
        cdata[static_cast<std::size_t>(r) * d + j] = candidates.at(static_cast<std::int64_t>(src) * d + j);
      }
    }
    SimilarityMatrix sim =
        similarity_matrix(Tensor::from_data({b, d}, std::move(qdata)),
                          Tensor::from_data({b, d}, std::move(cdata)));
    for (int k : options.ks) {
      if (k > b) {
        report.degenerate = true;
        continue;
      }
      sums[k] += recall_at_k(sim, k);
    }
  }
  report.batch_size = b;
  report.n_queries = n_batches * b;
  report.n_candidates = b;
  for (auto& [k, v] : sums) report.recall_at[k] = v / n_batches;
  return report;
}

double validation_recall_at_1(const align::JointModel& model, const chem::DataStore& data,
                              chem::PairKind kind, int batch_size) {
  const chem::PairManifest subset = data.manifest(kind).filter(chem::Split::Validation);
  const int n = static_cast<int>(subset.entries.size());
  if (n == 0) {
    throw DataError("validation_recall_at_1: empty validation split for " +
                    chem::pair_kind_name(kind));
  }
  const auto [left_mod, right_mod] = pair_modalities(kind);
  const int d = model.config.embed_dim;

  std::vector<Tensor> left_rows, right_rows;
  left_rows.reserve(static_cast<std::size_t>(n));
  for (const auto& e : subset.entries) {
    left_rows.push_back(num::reshape(model.embed_record(left_mod, data, e.left), {1, d}));
    right_rows.push_back(num::reshape(model.embed_record(right_mod, data, e.right), {1, d}));
  }
  Tensor left = num::concat(left_rows, 0);
  Tensor right = num::concat(right_rows, 0);

  if (n < batch_size) {  // too small for the in-batch protocol; rank the full split
    const double fwd = recall_at_k(similarity_matrix(left, right), 1);
    const double rev = recall_at_k(similarity_matrix(right, left), 1);
    return 0.5 * (fwd + rev);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng(kBatchPartitionSeed);
  rng.shuffle(order);
  const int n_batches = n / batch_size;
  double total = 0.0;
  for (int bi = 0; bi < n_batches; ++bi) {
    std::vector<double> ld(static_cast<std::size_t>(batch_size) * d);
    std::vector<double> rd(static_cast<std::size_t>(batch_size) * d);
    for (int r = 0; r < batch_size; ++r) {
      const int src = order[static_cast<std::size_t>(bi * batch_size + r)];
      for (int j = 0; j < d; ++j) {
        ld[static_cast<std::size_t>(r) * d + j] = left.at(static_cast<std::int64_t>(src) * d + j);
        rd[static_cast<std::size_t>(r) * d + j] = right.at(static_cast<std::int64_t>(src) * d + j);
      }
    }
    Tensor lb = Tensor::from_data({batch_size, d}, std::move(ld));
    Tensor rb = Tensor::from_data({batch_size, d}, std::move(rd));
    total += 0.5 * (recall_at_k(similarity_matrix(lb, rb), 1) +
                    recall_at_k(similarity_matrix(rb, lb), 1));
  }
  return total / n_batches;
}

}  // namespace bindcore::eval
