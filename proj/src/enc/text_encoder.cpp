#include "bindcore/enc/text_encoder.hpp"

#include <cmath>
#include <numeric>

#include "bindcore/common/error.hpp"

namespace bindcore::enc {

using num::Tensor;

TextEncoderParams TextEncoderParams::init(const TextEncoderConfig& config, num::Rng& rng) {
  TextEncoderParams p;
  p.config = config;
  p.token_embed = init_embedding(config.vocab_size, config.hidden, rng);
  p.pos_embed = init_embedding(config.max_len, config.hidden, rng);
  for (int l = 0; l < config.layers; ++l) {
    TextBlockParams block;
    block.ln_attn = init_layer_norm(config.hidden);
    block.wq = init_linear(config.hidden, config.hidden, rng);
    block.wk = init_linear(config.hidden, config.hidden, rng);
    block.wv = init_linear(config.hidden, config.hidden, rng);
    block.wo = init_linear(config.hidden, config.hidden, rng);
    block.ln_mlp = init_layer_norm(config.hidden);
    block.mlp_in = init_linear(config.hidden, 2 * config.hidden, rng);
    block.mlp_out = init_linear(2 * config.hidden, config.hidden, rng);
    p.blocks.push_back(std::move(block));
  }
  return p;
}

void TextEncoderParams::register_params(num::ParamSet& set, const std::string& prefix) {
  set.add(prefix + ".token_embed", token_embed);
  set.add(prefix + ".pos_embed", pos_embed);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const std::string b = prefix + ".block" + std::to_string(l);
    register_layer_norm(set, b + ".ln_attn", blocks[l].ln_attn);
    register_linear(set, b + ".wq", blocks[l].wq);
    register_linear(set, b + ".wk", blocks[l].wk);
    register_linear(set, b + ".wv", blocks[l].wv);
    register_linear(set, b + ".wo", blocks[l].wo);
    register_layer_norm(set, b + ".ln_mlp", blocks[l].ln_mlp);
    register_linear(set, b + ".mlp_in", blocks[l].mlp_in);
    register_linear(set, b + ".mlp_out", blocks[l].mlp_out);
  }
}

Tensor encode_text(const TextEncoderParams& p, const chem::TokenSequence& seq) {
  if (seq.token_ids.empty()) {
    throw ContractError("encode_text: empty token sequence");
  }
  std::vector<int> ids = seq.token_ids;
  if (static_cast<int>(ids.size()) > p.config.max_len) {
    ids.resize(static_cast<std::size_t>(p.config.max_len));
  }
  for (int id : ids) {
    if (id < 0 || id >= p.config.vocab_size) {
      throw ContractError("encode_text: token id " + std::to_string(id) +
                          " outside vocabulary of size " + std::to_string(p.config.vocab_size));
    }
  }
  const int n = static_cast<int>(ids.size());
  std::vector<int> positions(static_cast<std::size_t>(n));
  std::iota(positions.begin(), positions.end(), 0);

  Tensor x = num::add(num::gather_rows(p.token_embed, ids),
                      num::gather_rows(p.pos_embed, positions));

  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(p.config.hidden));
  for (const auto& block : p.blocks) {
    Tensor h = layer_norm(block.ln_attn, x);
    Tensor q = linear(block.wq, h);
    Tensor k = linear(block.wk, h);
    Tensor v = linear(block.wv, h);
    Tensor attn = num::softmax_rows(num::scale(num::matmul(q, num::transpose(k)), inv_sqrt_h));
    x = num::add(x, linear(block.wo, num::matmul(attn, v)));

    Tensor m = layer_norm(block.ln_mlp, x);
    x = num::add(x, linear(block.mlp_out, num::relu(linear(block.mlp_in, m))));
  }
  return num::mean_pool(x);
}

}  // namespace bindcore::enc
