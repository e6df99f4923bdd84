#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bindcore/num/tensor.hpp"

namespace bindcore::num {

// Ordered, named collection of trainable tensors. Order is the serialization
// and optimizer-slot order, so registration must be deterministic.
struct ParamSet {
  std::vector<std::pair<std::string, Tensor>> entries;

  Tensor add(std::string name, Tensor t);
  void merge(const ParamSet& other, const std::string& prefix);
  std::int64_t total_size() const;
  const Tensor* find(const std::string& name) const;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class MissingGrad {
  Error,  // every parameter must have a populated grad
  Skip,   // parameters the loss never reached keep their value and moments
};

// Bias-corrected Adam. Moment buffers are slot-aligned with the ParamSet the
// state was first stepped with; grads are zeroed after each step.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {});

  void step(ParamSet& params, MissingGrad policy = MissingGrad::Error);

  std::int64_t step_count() const { return t_; }
  AdamConfig& config() { return cfg_; }
  const AdamConfig& config() const { return cfg_; }

  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void restore(std::int64_t t, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

void adam_step(ParamSet& params, AdamState& state,
               MissingGrad policy = MissingGrad::Error);

}  // namespace bindcore::num
