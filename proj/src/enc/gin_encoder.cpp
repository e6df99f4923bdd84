#include "bindcore/enc/gin_encoder.hpp"

#include "bindcore/chem/elements.hpp"
#include "bindcore/common/error.hpp"

namespace bindcore::enc {

using num::Tensor;

GraphEncoderParams GraphEncoderParams::init(const GraphEncoderConfig& config, num::Rng& rng) {
  GraphEncoderParams p;
  p.config = config;
  p.atom_embed = init_embedding(chem::kNumAtomTypes, config.hidden, rng);
  p.bond_embed = init_embedding(4, config.hidden, rng);
  for (int l = 0; l < config.layers; ++l) {
    GinLayerParams layer;
    layer.eps = Tensor::variable({}, {0.0});
    layer.mlp_in = init_linear(config.hidden, 2 * config.hidden, rng);
    layer.mlp_out = init_linear(2 * config.hidden, config.hidden, rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void GraphEncoderParams::register_params(num::ParamSet& set, const std::string& prefix) {
  set.add(prefix + ".atom_embed", atom_embed);
  set.add(prefix + ".bond_embed", bond_embed);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string b = prefix + ".layer" + std::to_string(l);
    set.add(b + ".eps", layers[l].eps);
    register_linear(set, b + ".mlp_in", layers[l].mlp_in);
    register_linear(set, b + ".mlp_out", layers[l].mlp_out);
  }
}

Tensor encode_graph(const GraphEncoderParams& p, const chem::MoleculeGraph& g) {
  g.validate();
  const int n = g.num_atoms();

  // Undirected bonds expand into two directed messages.
  std::vector<int> src, dst, order_ids;
  src.reserve(g.bonds.size() * 2);
  for (const auto& bond : g.bonds) {
    src.push_back(bond.i);
    dst.push_back(bond.j);
    order_ids.push_back(bond.order - 1);
    src.push_back(bond.j);
    dst.push_back(bond.i);
    order_ids.push_back(bond.order - 1);
  }

  Tensor h = num::gather_rows(p.atom_embed, g.atom_types);
  const Tensor one = Tensor::scalar(1.0);
  for (const auto& layer : p.layers) {
    Tensor self = num::mul_scalar(h, num::add(one, layer.eps));
    Tensor combined;
    if (src.empty()) {
      combined = self;
    } else {
      Tensor messages = num::add(num::gather_rows(h, src), num::gather_rows(p.bond_embed, order_ids));
      combined = num::add(self, num::scatter_sum(messages, dst, n));
    }
    h = linear(layer.mlp_out, num::relu(linear(layer.mlp_in, combined)));
  }
  return num::mean_pool(h);
}

}  // namespace bindcore::enc
