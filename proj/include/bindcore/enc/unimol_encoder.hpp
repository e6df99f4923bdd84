#pragma once

#include <vector>

#include "bindcore/chem/types.hpp"
#include "bindcore/enc/linear.hpp"

namespace bindcore::enc {

struct UniMolConfig {
  int hidden = 64;       // atom-state width D; also the Gaussian kernel count
  int layers = 2;
  int heads = 4;         // hidden must divide evenly into heads
  double mu_max = 12.0;  // kernel centers evenly spaced on [0, mu_max] Å
  bool residual = true;
  bool pre_norm = true;

  int head_dim() const { return hidden / heads; }
};

// Per-atom-pair bias, one channel per attention head, each [N×N].
struct PairRep {
  std::vector<num::Tensor> head_channels;
};

struct UniMolLayerParams {
  LayerNormParams ln;
  std::vector<num::Tensor> wq, wk, wv;  // per head, each [D × head_dim]
};

struct UniMolEncoderParams {
  UniMolConfig config;
  num::Tensor atom_embed;     // [T × D]; one-hot types times this matrix
  num::Tensor pair_affine_a;  // [T²], per pair type
  num::Tensor pair_affine_b;  // [T²]
  num::Tensor kernel_mu;      // [D]
  num::Tensor kernel_sigma;   // [D], must stay positive
  LinearParams pair_head;     // [D × heads]: distance features -> head biases
  std::vector<UniMolLayerParams> layers;

  static UniMolEncoderParams init(const UniMolConfig& config, num::Rng& rng);
  void register_params(num::ParamSet& set, const std::string& prefix);
};

// Gaussian densities of the pair-type-affined distance under every kernel:
// component k is G(a_t·d + b_t, mu_k, sigma_k).
num::Tensor gaussian_pair_features(const UniMolEncoderParams& p, double distance, int pair_type);
// Batched form over flattened pair lists: [P],[P] -> [P × D].
num::Tensor gaussian_pair_features(const UniMolEncoderParams& p, const num::Tensor& distances,
                                   const std::vector<int>& pair_types);

// One layer: shared per-head query-key products update the pair bias
// (scaled by 1/sqrt(D)) and bias the attention logits (scaled by
// 1/sqrt(head_dim)); head outputs are concatenated.
std::pair<num::Tensor, PairRep> unimol_layer(const UniMolLayerParams& layer,
                                             const UniMolConfig& config, const num::Tensor& h,
                                             const PairRep& pair);

num::Tensor encode_conformation(const UniMolEncoderParams& p, const chem::Conformation& c);
num::Tensor encode_pocket(const UniMolEncoderParams& p, const chem::PocketStructure& pocket);

}  // namespace bindcore::enc
