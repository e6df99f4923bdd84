#include "bindcore/enc/linear.hpp"

#include <cmath>

namespace bindcore::enc {

using num::Tensor;

Tensor init_weight(int in, int out, num::Rng& rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  std::vector<double> w(static_cast<std::size_t>(in) * out);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  return Tensor::variable({in, out}, std::move(w));
}

Tensor init_embedding(int rows, int cols, num::Rng& rng, double scale) {
  std::vector<double> e(static_cast<std::size_t>(rows) * cols);
  for (auto& v : e) v = scale * rng.normal();
  return Tensor::variable({rows, cols}, std::move(e));
}

LinearParams init_linear(int in, int out, num::Rng& rng, double weight_scale) {
  Tensor w = init_weight(in, out, rng);
  if (weight_scale != 1.0) {
    for (double& v : w.raw_data()) v *= weight_scale;
  }
  return {std::move(w),
          Tensor::variable({out}, std::vector<double>(static_cast<std::size_t>(out), 0.0))};
}

Tensor linear(const LinearParams& p, const Tensor& x) {
  return num::add_rowvec(num::matmul(x, p.w), p.b);
}

LayerNormParams init_layer_norm(int d) {
  return {Tensor::variable({d}, std::vector<double>(static_cast<std::size_t>(d), 1.0)),
          Tensor::variable({d}, std::vector<double>(static_cast<std::size_t>(d), 0.0))};
}

Tensor layer_norm(const LayerNormParams& p, const Tensor& x) {
  return num::layer_norm_rows(x, p.gain, p.bias);
}

void register_linear(num::ParamSet& set, const std::string& prefix, LinearParams& p) {
  set.add(prefix + ".w", p.w);
  set.add(prefix + ".b", p.b);
}

void register_layer_norm(num::ParamSet& set, const std::string& prefix, LayerNormParams& p) {
  set.add(prefix + ".gain", p.gain);
  set.add(prefix + ".bias", p.bias);
}

}  // namespace bindcore::enc
