#pragma once

#include "bindcore/num/adam.hpp"
#include "bindcore/num/rng.hpp"
#include "bindcore/num/tensor.hpp"

namespace bindcore::enc {

struct LinearParams {
  num::Tensor w;  // [in × out]
  num::Tensor b;  // [out]
};

LinearParams init_linear(int in, int out, num::Rng& rng, double weight_scale = 1.0);
num::Tensor linear(const LinearParams& p, const num::Tensor& x);  // [N×in] -> [N×out]

struct LayerNormParams {
  num::Tensor gain;  // [d], ones at init
  num::Tensor bias;  // [d], zeros at init
};

LayerNormParams init_layer_norm(int d);
num::Tensor layer_norm(const LayerNormParams& p, const num::Tensor& x);

// Xavier-uniform matrix / small-normal embedding initializers.
num::Tensor init_weight(int in, int out, num::Rng& rng);
num::Tensor init_embedding(int rows, int cols, num::Rng& rng, double scale = 0.1);

void register_linear(num::ParamSet& set, const std::string& prefix, LinearParams& p);
void register_layer_norm(num::ParamSet& set, const std::string& prefix, LayerNormParams& p);

}  // namespace bindcore::enc
