#pragma once

#include <vector>

#include "bindcore/chem/types.hpp"
#include "bindcore/enc/linear.hpp"

namespace bindcore::enc {

struct TextEncoderConfig {
  int vocab_size = 1;
  int hidden = 64;
  int layers = 2;
  int max_len = 128;  // longer sequences are truncated
};

// Pre-norm block: single-head self-attention followed by a two-layer MLP,
// both with residuals.
struct TextBlockParams {
  LayerNormParams ln_attn;
  LinearParams wq, wk, wv, wo;
  LayerNormParams ln_mlp;
  LinearParams mlp_in, mlp_out;
};

struct TextEncoderParams {
  TextEncoderConfig config;
  num::Tensor token_embed;  // [vocab × H]
  num::Tensor pos_embed;    // [max_len × H], learned absolute positions
  std::vector<TextBlockParams> blocks;

  static TextEncoderParams init(const TextEncoderConfig& config, num::Rng& rng);
  void register_params(num::ParamSet& set, const std::string& prefix);
};

// Mean-pooled final-layer token states, [H].
num::Tensor encode_text(const TextEncoderParams& p, const chem::TokenSequence& seq);

}  // namespace bindcore::enc
