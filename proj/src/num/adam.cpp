#include "bindcore/num/adam.hpp"

#include <cmath>

#include "bindcore/common/error.hpp"

namespace bindcore::num {

Tensor ParamSet::add(std::string name, Tensor t) {
  if (!t.requires_grad()) {
    throw ContractError("ParamSet::add: '" + name + "' does not require grad");
  }
  for (const auto& [n, _] : entries) {
    if (n == name) throw ContractError("ParamSet::add: duplicate name '" + name + "'");
  }
  entries.emplace_back(std::move(name), t);
  return entries.back().second;
}

void ParamSet::merge(const ParamSet& other, const std::string& prefix) {
  for (const auto& [n, t] : other.entries) entries.emplace_back(prefix + n, t);
}

std::int64_t ParamSet::total_size() const {
  std::int64_t n = 0;
  for (const auto& [_, t] : entries) n += t.size();
  return n;
}

const Tensor* ParamSet::find(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return &t;
  }
  return nullptr;
}

AdamState::AdamState(AdamConfig cfg) : cfg_(cfg) {}

void AdamState::step(ParamSet& params, MissingGrad policy) {
  const std::size_t n = params.entries.size();
  if (m_.empty()) {
    m_.resize(n);
    v_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto sz = static_cast<std::size_t>(params.entries[i].second.size());
      m_[i].assign(sz, 0.0);
      v_[i].assign(sz, 0.0);
    }
  }
  if (m_.size() != n) {
    throw ContractError("AdamState::step: parameter set size changed");
  }

  if (policy == MissingGrad::Error) {
    for (const auto& [name, t] : params.entries) {
      if (!t.grad_populated()) {
        throw ContractError("adam_step: parameter '" + name + "' has no populated gradient");
      }
    }
  }

  t_ += 1;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  for (std::size_t i = 0; i < n; ++i) {
    auto& [name, t] = params.entries[i];
    if (!t.grad_populated()) continue;  // MissingGrad::Skip
    const auto& g = t.grad();
    auto& theta = t.raw_data();
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.size() != g.size()) {
      throw ContractError("AdamState::step: moment shape mismatch for '" + name + "'");
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      theta[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    t.zero_grad();
  }
}

void AdamState::restore(std::int64_t t, std::vector<std::vector<double>> m,
                        std::vector<std::vector<double>> v) {
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

void adam_step(ParamSet& params, AdamState& state, MissingGrad policy) {
  state.step(params, policy);
}

}  // namespace bindcore::num
