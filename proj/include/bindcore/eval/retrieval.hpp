#pragma once

#include <map>
#include <string>
#include <vector>

#include "bindcore/align/model.hpp"

namespace bindcore::eval {

// Query-by-candidate dot-product scores with the ground-truth candidate index
// per query.
struct SimilarityMatrix {
  int n_queries = 0;
  int n_candidates = 0;
  std::vector<double> scores;  // row-major Q×C
  std::vector<std::string> query_ids;
  std::vector<std::string> candidate_ids;
  std::vector<int> ground_truth;  // per query

  double score(int q, int c) const {
    return scores[static_cast<std::size_t>(q) * n_candidates + c];
  }
};

// Rows must be L2-normalized. Ground truth defaults to the identity pairing
// when queries and candidates line up.
SimilarityMatrix similarity_matrix(const num::Tensor& queries, const num::Tensor& candidates);

// Percentage of queries whose ground-truth candidate ranks in the top K.
// Ties break by ascending candidate index.
double recall_at_k(const SimilarityMatrix& sim, int k);

enum class RetrievalMode { InBatch, FullSet };

struct RetrievalReport {
  std::string direction;
  RetrievalMode mode = RetrievalMode::FullSet;
  int batch_size = 0;  // in-batch mode only
  std::map<int, double> recall_at;
  int n_queries = 0;
  int n_candidates = 0;
  bool degenerate = false;  // too few candidates for some requested K

  std::string to_json() const;
};

struct RetrievalOptions {
  RetrievalMode mode = RetrievalMode::FullSet;
  int batch_size = 64;
  chem::Split split = chem::Split::Test;
  bool query_left = true;
  std::vector<int> ks = {1, 20};
};

std::string direction_label(chem::PairKind kind, bool query_left);

// Embeds both sides of the split and ranks. In-batch mode partitions into
// fixed-seed batches and averages, dropping a final partial batch.
RetrievalReport evaluate_retrieval(const align::JointModel& model, const chem::DataStore& data,
                                   chem::PairKind kind, const RetrievalOptions& options);

// Mean R@1 over both directions of one kind on the validation split; used by
// the trainer for early stopping. Falls back to full-set ranking when the
// validation split is smaller than one batch.
double validation_recall_at_1(const align::JointModel& model, const chem::DataStore& data,
                              chem::PairKind kind, int batch_size = 64);

}  // namespace bindcore::eval
