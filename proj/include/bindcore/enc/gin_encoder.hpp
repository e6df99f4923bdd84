#pragma once

#include <vector>

#include "bindcore/chem/types.hpp"
#include "bindcore/enc/linear.hpp"

namespace bindcore::enc {

struct GraphEncoderConfig {
  int hidden = 64;
  int layers = 2;
};

// One GIN layer: h_v' = MLP((1+eps)·h_v + Σ_{u∈N(v)} (h_u + e_bond)) with a
// learnable eps. Sum aggregation plus mean pooling keeps the encoding
// permutation-invariant.
struct GinLayerParams {
  num::Tensor eps;  // rank-0, starts at 0
  LinearParams mlp_in, mlp_out;
};

struct GraphEncoderParams {
  GraphEncoderConfig config;
  num::Tensor atom_embed;  // [T × H]
  num::Tensor bond_embed;  // [4 × H], indexed by bond order - 1
  std::vector<GinLayerParams> layers;

  static GraphEncoderParams init(const GraphEncoderConfig& config, num::Rng& rng);
  void register_params(num::ParamSet& set, const std::string& prefix);
};

// Mean-pooled node states after all layers, [H].
num::Tensor encode_graph(const GraphEncoderParams& p, const chem::MoleculeGraph& g);

}  // namespace bindcore::enc
