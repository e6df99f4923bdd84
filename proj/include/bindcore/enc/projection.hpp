#pragma once

#include "bindcore/enc/linear.hpp"

namespace bindcore::enc {

// Modality-specific linear map into the shared embedding space, followed by
// L2 normalization. No bias, so the output is scale-invariant in the input.
struct ProjectionHead {
  num::Tensor w;  // [encoder_width × D]

  static ProjectionHead init(int in, int out, num::Rng& rng);
  void register_params(num::ParamSet& set, const std::string& prefix);
  int out_dim() const { return w.dim(1); }
};

num::Tensor project(const ProjectionHead& head, const num::Tensor& e);        // [in] -> [D]
num::Tensor project_rows(const ProjectionHead& head, const num::Tensor& e);   // [B×in] -> [B×D]

}  // namespace bindcore::enc
