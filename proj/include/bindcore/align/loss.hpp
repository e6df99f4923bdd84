#pragma once

#include "bindcore/num/tensor.hpp"

namespace bindcore::align {

// In-batch contrastive loss: mean over rows of
// -log( exp(x_i·y_i/τ) / Σ_j exp(x_i·y_j/τ) ), log-sum-exp stabilized.
// Rows must be L2-normalized and B >= 2 (at least one negative).
num::Tensor info_nce(const num::Tensor& x, const num::Tensor& y, double tau);

// info_nce(x, y) + info_nce(y, x).
num::Tensor symmetric_loss(const num::Tensor& x, const num::Tensor& y, double tau);

// Variants with a learnable temperature: tau = exp(log_tau).
num::Tensor info_nce(const num::Tensor& x, const num::Tensor& y, const num::Tensor& log_tau);
num::Tensor symmetric_loss(const num::Tensor& x, const num::Tensor& y, const num::Tensor& log_tau);

}  // namespace bindcore::align
