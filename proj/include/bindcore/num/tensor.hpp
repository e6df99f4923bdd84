#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bindcore::num {

using Shape = std::vector<int>;

std::int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Forward-value finiteness guard. On by default in debug builds; tests turn it
// on explicitly, the trainer leaves it alone.
void set_finite_checks(bool on);
bool finite_checks_enabled();

namespace detail {

struct Storage {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  bool leaf = true;
  bool grad_seen = false;  // backward reached this leaf since the last reset
  std::vector<double> grad;
  std::int64_t node_id = -1;  // id on the tape that recorded it, -1 off-tape
};

using StoragePtr = std::shared_ptr<Storage>;

struct OpRecord {
  const char* name;
  std::vector<StoragePtr> inputs;
  StoragePtr output;
  std::function<void(const OpRecord&)> pull;  // accumulate grads into inputs
};

}  // namespace detail

// Dense row-major f64 tensor. Values are immutable once an operation has
// produced them; raw_data() exists for initialization and the optimizer only.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from_data(Shape shape, std::vector<double> data);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  // Grad-tracked leaf (a trainable parameter).
  static Tensor variable(Shape shape, std::vector<double> data);

  bool defined() const { return static_cast<bool>(s_); }
  const Shape& shape() const;
  int rank() const;
  int dim(int axis) const;
  std::int64_t size() const;

  const std::vector<double>& values() const;
  double at(std::int64_t i) const;
  double item() const;  // single-element tensors only

  bool requires_grad() const;
  bool is_leaf() const;
  bool grad_populated() const;
  const std::vector<double>& grad() const;  // zeros until backward touches it
  void zero_grad();

  std::int64_t node_id() const;

  std::vector<double>& raw_data();
  detail::StoragePtr storage() const { return s_; }

  Tensor detached() const;  // same values, no grad tracking
  Tensor clone() const;     // deep copy (fresh storage, same flags)

 private:
  explicit Tensor(detail::StoragePtr s) : s_(std::move(s)) {}
  detail::StoragePtr s_;

  friend class Tape;
  friend Tensor finish_op(const char* name, std::vector<Tensor> inputs,
                          Shape out_shape, std::vector<double> out_data,
                          std::function<void(const detail::OpRecord&)> pull);
};

// Define-by-run recording of one forward computation. Ops land on the active
// tape (see TapeScope) whenever any input requires grad; recording order is
// the topological order used by backward.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Seeds d(loss)/d(loss) = 1 and walks the recorded ops in reverse, visiting
  // each node once. Leaf grads accumulate across calls; op-output grads are
  // scratch and reset on every call.
  void backward(const Tensor& loss);

  std::size_t op_count() const { return ops_.size(); }

  void record(detail::OpRecord op);

  static Tape* active();

 private:
  std::vector<detail::OpRecord> ops_;
  std::int64_t next_node_id_ = 0;
};

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

// ---- differentiable primitives ------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& x, const Tensor& s);  // s is rank-0
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor reciprocal(const Tensor& x);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor sum(const Tensor& x);  // rank-0
Tensor mean_pool(const Tensor& x);
Tensor mean_pool(const Tensor& x, const std::vector<bool>& mask);

Tensor softmax_rows(const Tensor& x);
Tensor logsumexp_rows(const Tensor& x);  // [M×N] -> [M]
Tensor take_diag(const Tensor& x);       // [B×B] -> [B]
Tensor l2_normalize(const Tensor& x);    // last axis; 1-D or 2-D

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor reshape(const Tensor& x, Shape shape);
Tensor select_column(const Tensor& m, int col);  // [R×C] -> [R]

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
Tensor scatter_sum(const Tensor& messages, const std::vector<int>& dst,
                   int n_rows);

Tensor outer_sub(const Tensor& x, const Tensor& y);       // [N],[K] -> [N×K]
Tensor colwise_scale(const Tensor& m, const Tensor& s);   // [N×K],[K]
Tensor add_rowvec(const Tensor& m, const Tensor& b);      // [N×K],[K]
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);

}  // namespace bindcore::num
