#include "bindcore/enc/unimol_encoder.hpp"

#include <cmath>
#include <numbers>

#include "bindcore/chem/elements.hpp"
#include "bindcore/chem/parse.hpp"
#include "bindcore/common/error.hpp"

namespace bindcore::enc {

using num::Tensor;

UniMolEncoderParams UniMolEncoderParams::init(const UniMolConfig& config, num::Rng& rng) {
  if (config.hidden % config.heads != 0) {
    throw ConfigError("UniMol: hidden " + std::to_string(config.hidden) +
                      " not divisible by heads " + std::to_string(config.heads));
  }
  UniMolEncoderParams p;
  p.config = config;
  p.atom_embed = init_embedding(chem::kNumAtomTypes, config.hidden, rng);

  p.pair_affine_a = Tensor::variable(
      {chem::kNumPairTypes}, std::vector<double>(chem::kNumPairTypes, 1.0));
  p.pair_affine_b = Tensor::variable(
      {chem::kNumPairTypes}, std::vector<double>(chem::kNumPairTypes, 0.0));

  const int k = config.hidden;
  std::vector<double> mu(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    mu[static_cast<std::size_t>(i)] = config.mu_max * i / (k > 1 ? k - 1 : 1);
  }
  p.kernel_mu = Tensor::variable({k}, std::move(mu));
  p.kernel_sigma = Tensor::variable({k}, std::vector<double>(static_cast<std::size_t>(k),
                                                             config.mu_max / k));

  p.pair_head = init_linear(config.hidden, config.heads, rng);

  for (int l = 0; l < config.layers; ++l) {
    UniMolLayerParams layer;
    layer.ln = init_layer_norm(config.hidden);
    for (int h = 0; h < config.heads; ++h) {
      layer.wq.push_back(init_weight(config.hidden, config.head_dim(), rng));
      layer.wk.push_back(init_weight(config.hidden, config.head_dim(), rng));
      layer.wv.push_back(init_weight(config.hidden, config.head_dim(), rng));
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void UniMolEncoderParams::register_params(num::ParamSet& set, const std::string& prefix) {
  set.add(prefix + ".atom_embed", atom_embed);
  set.add(prefix + ".pair_affine_a", pair_affine_a);
  set.add(prefix + ".pair_affine_b", pair_affine_b);
  set.add(prefix + ".kernel_mu", kernel_mu);
  set.add(prefix + ".kernel_sigma", kernel_sigma);
  register_linear(set, prefix + ".pair_head", pair_head);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string b = prefix + ".layer" + std::to_string(l);
    register_layer_norm(set, b + ".ln", layers[l].ln);
    for (std::size_t h = 0; h < layers[l].wq.size(); ++h) {
      set.add(b + ".head" + std::to_string(h) + ".wq", layers[l].wq[h]);
      set.add(b + ".head" + std::to_string(h) + ".wk", layers[l].wk[h]);
      set.add(b + ".head" + std::to_string(h) + ".wv", layers[l].wv[h]);
    }
  }
}

Tensor gaussian_pair_features(const UniMolEncoderParams& p, const Tensor& distances,
                              const std::vector<int>& pair_types) {
  for (double s : p.kernel_sigma.values()) {
    if (s <= 0.0) throw ContractError("gaussian_pair_features: sigma must be positive");
  }
  for (double d : distances.values()) {
    if (d < 0.0) throw ContractError("gaussian_pair_features: negative distance");
  }
  if (distances.rank() != 1 ||
      distances.size() != static_cast<std::int64_t>(pair_types.size())) {
    throw DimensionError("gaussian_pair_features: one pair type per distance required");
  }

  // x = a_t·d + b_t per pair, then G(x, mu_k, sigma_k) over all kernels.
  Tensor a = num::reshape(num::gather_rows(num::reshape(p.pair_affine_a, {chem::kNumPairTypes, 1}),
                                           pair_types),
                          {distances.dim(0)});
  Tensor b = num::reshape(num::gather_rows(num::reshape(p.pair_affine_b, {chem::kNumPairTypes, 1}),
                                           pair_types),
                          {distances.dim(0)});
  Tensor x = num::add(num::mul(a, distances), b);

  Tensor inv_sigma = num::reciprocal(p.kernel_sigma);
  Tensor u = num::colwise_scale(num::outer_sub(x, p.kernel_mu), inv_sigma);
  Tensor e = num::exp(num::scale(num::mul(u, u), -0.5));
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return num::colwise_scale(e, num::scale(inv_sigma, inv_sqrt_2pi));
}

Tensor gaussian_pair_features(const UniMolEncoderParams& p, double distance, int pair_type) {
  Tensor d = Tensor::from_data({1}, {distance});
  return num::reshape(gaussian_pair_features(p, d, {pair_type}), {p.config.hidden});
}

std::pair<Tensor, PairRep> unimol_layer(const UniMolLayerParams& layer, const UniMolConfig& config,
                                        const Tensor& h, const PairRep& pair) {
  if (static_cast<int>(pair.head_channels.size()) != config.heads) {
    throw ContractError("unimol_layer: pair bias has " +
                        std::to_string(pair.head_channels.size()) + " channels for " +
                        std::to_string(config.heads) + " heads");
  }
  const int n = h.dim(0);
  for (const auto& q : pair.head_channels) {
    if (q.rank() != 2 || q.dim(0) != n || q.dim(1) != n) {
      throw DimensionError("unimol_layer: pair channel shape " + num::shape_str(q.shape()) +
                           " does not match " + std::to_string(n) + " atoms");
    }
  }

  Tensor g = config.pre_norm ? layer_norm(layer.ln, h) : h;

  const double pair_scale = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(config.head_dim()));

  PairRep next;
  std::vector<Tensor> head_outputs;
  for (int head = 0; head < config.heads; ++head) {
    Tensor q = num::matmul(g, layer.wq[static_cast<std::size_t>(head)]);
    Tensor k = num::matmul(g, layer.wk[static_cast<std::size_t>(head)]);
    Tensor v = num::matmul(g, layer.wv[static_cast<std::size_t>(head)]);
    Tensor qk = num::matmul(q, num::transpose(k));

    const Tensor& bias = pair.head_channels[static_cast<std::size_t>(head)];
    next.head_channels.push_back(num::add(bias, num::scale(qk, pair_scale)));

    Tensor attn = num::softmax_rows(num::add(num::scale(qk, attn_scale), bias));
    head_outputs.push_back(num::matmul(attn, v));
  }

  Tensor mixed = num::concat(head_outputs, 1);
  Tensor out = config.residual ? num::add(h, mixed) : mixed;
  return {out, std::move(next)};
}

namespace {

Tensor encode_structure(const UniMolEncoderParams& p, const std::vector<int>& atom_types,
                        const std::vector<std::array<double, 3>>& coords) {
  const int n = static_cast<int>(atom_types.size());

  Tensor dist = num::reshape(chem::pairwise_distances(coords), {n * n});
  std::vector<int> pair_types;
  pair_types.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      pair_types.push_back(chem::pair_type_index(atom_types[static_cast<std::size_t>(i)],
                                                 atom_types[static_cast<std::size_t>(j)]));
    }
  }

  Tensor features = gaussian_pair_features(p, dist, pair_types);  // [N² × D]
  Tensor bias_all = linear(p.pair_head, features);                // [N² × heads]

  PairRep pair;
  for (int head = 0; head < p.config.heads; ++head) {
    pair.head_channels.push_back(num::reshape(num::select_column(bias_all, head), {n, n}));
  }

  Tensor h = num::gather_rows(p.atom_embed, atom_types);
  for (const auto& layer : p.layers) {
    auto [h_next, pair_next] = unimol_layer(layer, p.config, h, pair);
    h = std::move(h_next);
    pair = std::move(pair_next);
  }
  return num::mean_pool(h);
}

}  // namespace

Tensor encode_conformation(const UniMolEncoderParams& p, const chem::Conformation& c) {
  c.validate();
  return encode_structure(p, c.atom_types, c.coords);
}

Tensor encode_pocket(const UniMolEncoderParams& p, const chem::PocketStructure& pocket) {
  pocket.validate();
  return encode_structure(p, pocket.atom_types, pocket.coords);
}

}  // namespace bindcore::enc
