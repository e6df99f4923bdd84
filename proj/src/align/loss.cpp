#include "bindcore/align/loss.hpp"

#include <cmath>

#include "bindcore/common/error.hpp"

namespace bindcore::align {

using num::Tensor;

namespace {

void check_inputs(const Tensor& x, const Tensor& y) {
  if (x.rank() != 2 || y.rank() != 2) {
    throw DimensionError("info_nce: expected [B×D] tensors");
  }
  if (x.shape() != y.shape()) {
    throw DimensionError("info_nce: shape mismatch " + num::shape_str(x.shape()) + " vs " +
                         num::shape_str(y.shape()));
  }
  const int b = x.dim(0), d = x.dim(1);
  if (b < 2) {
    throw ContractError("info_nce: batch size " + std::to_string(b) +
                        " leaves no in-batch negatives (need >= 2)");
  }
  for (const Tensor* t : {&x, &y}) {
    const auto& v = t->values();
    for (int i = 0; i < b; ++i) {
      double sq = 0.0;
      for (int j = 0; j < d; ++j) {
        const double e = v[static_cast<std::size_t>(i) * d + j];
        sq += e * e;
      }
      if (std::abs(std::sqrt(sq) - 1.0) > 1e-3) {
        throw ContractError("info_nce: row " + std::to_string(i) +
                            " is not L2-normalized (norm " + std::to_string(std::sqrt(sq)) + ")");
      }
    }
  }
}

Tensor nce_from_scores(const Tensor& scores, int b) {
  Tensor lse = num::logsumexp_rows(scores);
  Tensor diag = num::take_diag(scores);
  return num::scale(num::sum(num::sub(lse, diag)), 1.0 / b);
}

}  // namespace

Tensor info_nce(const Tensor& x, const Tensor& y, double tau) {
  if (!(tau > 0.0)) throw ContractError("info_nce: temperature must be positive");
  check_inputs(x, y);
  Tensor scores = num::scale(num::matmul(x, num::transpose(y)), 1.0 / tau);
  return nce_from_scores(scores, x.dim(0));
}

Tensor symmetric_loss(const Tensor& x, const Tensor& y, double tau) {
  return num::add(info_nce(x, y, tau), info_nce(y, x, tau));
}

Tensor info_nce(const Tensor& x, const Tensor& y, const Tensor& log_tau) {
  if (log_tau.size() != 1) throw ContractError("info_nce: log_tau must be a scalar tensor");
  check_inputs(x, y);
  Tensor inv_tau = num::exp(num::scale(log_tau, -1.0));
  Tensor scores = num::mul_scalar(num::matmul(x, num::transpose(y)), inv_tau);
  return nce_from_scores(scores, x.dim(0));
}

Tensor symmetric_loss(const Tensor& x, const Tensor& y, const Tensor& log_tau) {
  return num::add(info_nce(x, y, log_tau), info_nce(y, x, log_tau));
}

}  // namespace bindcore::align
