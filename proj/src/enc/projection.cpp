#include "bindcore/enc/projection.hpp"

#include "bindcore/common/error.hpp"

namespace bindcore::enc {

using num::Tensor;

ProjectionHead ProjectionHead::init(int in, int out, num::Rng& rng) {
  return {init_weight(in, out, rng)};
}

void ProjectionHead::register_params(num::ParamSet& set, const std::string& prefix) {
  set.add(prefix + ".w", w);
}

Tensor project(const ProjectionHead& head, const Tensor& e) {
  if (e.rank() != 1) {
    throw DimensionError("project: expected a vector, got " + num::shape_str(e.shape()));
  }
  if (e.dim(0) != head.w.dim(0)) {
    throw DimensionError("project: input width " + std::to_string(e.dim(0)) +
                         " does not match head " + num::shape_str(head.w.shape()));
  }
  Tensor row = num::matmul(num::reshape(e, {1, e.dim(0)}), head.w);
  return num::reshape(num::l2_normalize(row), {head.w.dim(1)});
}

Tensor project_rows(const ProjectionHead& head, const Tensor& e) {
  if (e.rank() != 2 || e.dim(1) != head.w.dim(0)) {
    throw DimensionError("project_rows: input " + num::shape_str(e.shape()) +
                         " does not match head " + num::shape_str(head.w.shape()));
  }
  return num::l2_normalize(num::matmul(e, head.w));
}

}  // namespace bindcore::enc
