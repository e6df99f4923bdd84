#include "bindcore/num/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "bindcore/common/error.hpp"

namespace bindcore::num {

namespace {

#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif

thread_local Tape* g_active_tape = nullptr;

void check_finite(const char* op, const std::vector<double>& v) {
  if (!g_finite_checks.load(std::memory_order_relaxed)) return;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ContractError(std::string(op) + ": non-finite value in forward output");
    }
  }
}

const Shape& shape_of(const Tensor& t) { return t.shape(); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (shape_of(a) != shape_of(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& t, int rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " tensor, got shape " + shape_str(t.shape()));
  }
}

std::vector<double>& grad_buf(detail::Storage& s) {
  const auto n = static_cast<std::size_t>(numel(s.shape));
  if (s.grad.size() != n) s.grad.assign(n, 0.0);
  if (s.leaf) s.grad_seen = true;
  return s.grad;
}

}  // namespace

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

void set_finite_checks(bool on) { g_finite_checks.store(on); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
  for (int d : shape) {
    if (d < 0) throw DimensionError("Tensor: negative dimension in " + shape_str(shape));
  }
  if (numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw DimensionError("Tensor: shape " + shape_str(shape) + " wants " +
                         std::to_string(numel(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  auto s = std::make_shared<detail::Storage>();
  s->shape = std::move(shape);
  s->data = std::move(data);
  return Tensor(std::move(s));
}

Tensor Tensor::zeros(Shape shape) {
  auto n = numel(shape);
  return from_data(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
  auto n = numel(shape);
  return from_data(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value));
}

Tensor Tensor::scalar(double value) { return from_data({}, {value}); }

Tensor Tensor::variable(Shape shape, std::vector<double> data) {
  Tensor t = from_data(std::move(shape), std::move(data));
  t.s_->requires_grad = true;
  return t;
}

const Shape& Tensor::shape() const { return s_->shape; }
int Tensor::rank() const { return static_cast<int>(s_->shape.size()); }

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    throw DimensionError("Tensor::dim: axis " + std::to_string(axis) +
                         " out of range for " + shape_str(s_->shape));
  }
  return s_->shape[axis];
}

std::int64_t Tensor::size() const { return numel(s_->shape); }

const std::vector<double>& Tensor::values() const { return s_->data; }

double Tensor::at(std::int64_t i) const { return s_->data.at(static_cast<std::size_t>(i)); }

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("Tensor::item: tensor has " + std::to_string(size()) + " elements");
  }
  return s_->data[0];
}

bool Tensor::requires_grad() const { return s_->requires_grad; }
bool Tensor::is_leaf() const { return s_->leaf; }
bool Tensor::grad_populated() const { return s_->grad_seen; }

const std::vector<double>& Tensor::grad() const {
  const auto n = static_cast<std::size_t>(size());
  if (s_->grad.size() != n) s_->grad.assign(n, 0.0);
  return s_->grad;
}

void Tensor::zero_grad() {
  std::fill(s_->grad.begin(), s_->grad.end(), 0.0);
  s_->grad_seen = false;
}

std::int64_t Tensor::node_id() const { return s_->node_id; }

std::vector<double>& Tensor::raw_data() { return s_->data; }

Tensor Tensor::detached() const {
  return from_data(s_->shape, s_->data);
}

Tensor Tensor::clone() const {
  Tensor t = from_data(s_->shape, s_->data);
  t.s_->requires_grad = s_->requires_grad;
  return t;
}

// ---- Tape -----------------------------------------------------------------

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = prev_; }

void Tape::record(detail::OpRecord op) {
  op.output->node_id = next_node_id_++;
  ops_.push_back(std::move(op));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar tensor");
  }
  detail::Storage* target = loss.storage().get();
  bool produced_here = false;
  for (const auto& op : ops_) {
    if (op.output.get() == target) {
      produced_here = true;
      break;
    }
  }
  if (!produced_here) {
    throw ContractError("backward: loss was not produced on this tape");
  }

  // Op outputs are scratch: reset every pass so repeated backward calls only
  // accumulate into leaves.
  for (auto& op : ops_) {
    op.output->grad.assign(static_cast<std::size_t>(numel(op.output->shape)), 0.0);
  }
  target->grad[0] = 1.0;

  std::unordered_set<detail::Storage*> reachable;
  reachable.insert(target);
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    if (!reachable.contains(it->output.get())) continue;
    it->pull(*it);
    for (const auto& in : it->inputs) {
      if (in->requires_grad) reachable.insert(in.get());
    }
  }
}

// ---- op plumbing ------------------------------------------------------------

Tensor finish_op(const char* name, std::vector<Tensor> inputs, Shape out_shape,
                 std::vector<double> out_data,
                 std::function<void(const detail::OpRecord&)> pull) {
  check_finite(name, out_data);
  Tensor out = Tensor::from_data(std::move(out_shape), std::move(out_data));
  Tape* tape = Tape::active();
  if (tape != nullptr) {
    bool any_grad = false;
    for (const auto& in : inputs) any_grad = any_grad || in.requires_grad();
    if (any_grad) {
      out.s_->requires_grad = true;
      out.s_->leaf = false;
      detail::OpRecord rec;
      rec.name = name;
      rec.inputs.reserve(inputs.size());
      for (auto& in : inputs) rec.inputs.push_back(in.storage());
      rec.output = out.storage();
      rec.pull = std::move(pull);
      tape->record(std::move(rec));
    }
  }
  return out;
}

namespace {

using detail::OpRecord;

Tensor elementwise2(const char* name, const Tensor& a, const Tensor& b,
                    double (*fwd)(double, double),
                    void (*bwd)(double a, double b, double g, double& da, double& db)) {
  require_same_shape(name, a, b);
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i], bv[i]);
  return finish_op(name, {a, b}, a.shape(), std::move(out), [bwd](const OpRecord& op) {
    auto& A = *op.inputs[0];
    auto& B = *op.inputs[1];
    const auto& g = op.output->grad;
    const bool need_a = A.requires_grad;
    const bool need_b = B.requires_grad;
    std::vector<double>* da = need_a ? &grad_buf(A) : nullptr;
    std::vector<double>* db = need_b ? &grad_buf(B) : nullptr;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double ga = 0.0, gb = 0.0;
      bwd(A.data[i], B.data[i], g[i], ga, gb);
      if (da) (*da)[i] += ga;
      if (db) (*db)[i] += gb;
    }
  });
}

Tensor elementwise1(const char* name, const Tensor& x, double (*fwd)(double),
                    double (*dfdx)(double x, double y)) {
  const auto& xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return finish_op(name, {x}, x.shape(), std::move(out), [dfdx](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const auto& g = op.output->grad;
    const auto& y = op.output->data;
    auto& dx = grad_buf(X);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * dfdx(X.data[i], y[i]);
  });
}

}  // namespace

// ---- arithmetic -------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise2(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double g, double& da, double& db) {
        da = g;
        db = g;
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise2(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double g, double& da, double& db) {
        da = g;
        db = -g;
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise2(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double g, double& da, double& db) {
        da = g * y;
        db = g * x;
      });
}

Tensor scale(const Tensor& a, double s) {
  const auto& av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * s;
  return finish_op("scale", {a}, a.shape(), std::move(out), [s](const OpRecord& op) {
    auto& A = *op.inputs[0];
    if (!A.requires_grad) return;
    const auto& g = op.output->grad;
    auto& da = grad_buf(A);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * s;
  });
}

Tensor mul_scalar(const Tensor& x, const Tensor& s) {
  if (s.size() != 1) {
    throw DimensionError("mul_scalar: scale must be a single element, got " +
                         shape_str(s.shape()));
  }
  const double sv = s.values()[0];
  const auto& xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * sv;
  return finish_op("mul_scalar", {x, s}, x.shape(), std::move(out), [](const OpRecord& op) {
    auto& X = *op.inputs[0];
    auto& S = *op.inputs[1];
    const auto& g = op.output->grad;
    const double sv = S.data[0];
    if (X.requires_grad) {
      auto& dx = grad_buf(X);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * sv;
    }
    if (S.requires_grad) {
      auto& ds = grad_buf(S);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * X.data[i];
      ds[0] += acc;
    }
  });
}

Tensor relu(const Tensor& x) {
  return elementwise1(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& x) {
  return elementwise1(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values()) {
    if (v <= 0.0) throw DegenerateInputError("log: non-positive input");
  }
  return elementwise1(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor reciprocal(const Tensor& x) {
  for (double v : x.values()) {
    if (v == 0.0) throw DegenerateInputError("reciprocal: zero input");
  }
  return elementwise1(
      "reciprocal", x, [](double v) { return 1.0 / v; },
      [](double, double y) { return -y * y; });
}

// ---- linear algebra ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
  const auto& av = a.values();
  const auto& bv = b.values();
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = av[static_cast<std::size_t>(i) * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + static_cast<std::size_t>(p) * n;
      double* orow = out.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return finish_op("matmul", {a, b}, {m, n}, std::move(out), [m, k, n](const OpRecord& op) {
    auto& A = *op.inputs[0];
    auto& B = *op.inputs[1];
    const auto& g = op.output->grad;
    if (A.requires_grad) {
      auto& da = grad_buf(A);  // dA += g · Bᵀ, stride-1 inner loop
      for (int i = 0; i < m; ++i) {
        const double* grow = g.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
          const double* brow = B.data.data() + static_cast<std::size_t>(p) * n;
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          da[static_cast<std::size_t>(i) * k + p] += acc;
        }
      }
    }
    if (B.requires_grad) {
      auto& db = grad_buf(B);  // dB += Aᵀ · g
      for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
          const double aip = A.data[static_cast<std::size_t>(i) * k + p];
          if (aip == 0.0) continue;
          const double* grow = g.data() + static_cast<std::size_t>(i) * n;
          double* dbrow = db.data() + static_cast<std::size_t>(p) * n;
          for (int j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const int r = a.dim(0), c = a.dim(1);
  const auto& av = a.values();
  std::vector<double> out(av.size());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<std::size_t>(j) * r + i] = av[static_cast<std::size_t>(i) * c + j];
  return finish_op("transpose", {a}, {c, r}, std::move(out), [r, c](const OpRecord& op) {
    auto& A = *op.inputs[0];
    if (!A.requires_grad) return;
    const auto& g = op.output->grad;
    auto& da = grad_buf(A);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        da[static_cast<std::size_t>(i) * c + j] += g[static_cast<std::size_t>(j) * r + i];
  });
}

// ---- reductions ---------------------------------------------------------------

Tensor sum(const Tensor& x) {
  const auto& xv = x.values();
  double acc = std::accumulate(xv.begin(), xv.end(), 0.0);
  return finish_op("sum", {x}, {}, {acc}, [](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const double g = op.output->grad[0];
    auto& dx = grad_buf(X);
    for (auto& v : dx) v += g;
  });
}

Tensor mean_pool(const Tensor& x) {
  return mean_pool(x, std::vector<bool>(static_cast<std::size_t>(x.dim(0)), true));
}

Tensor mean_pool(const Tensor& x, const std::vector<bool>& mask) {
  require_rank("mean_pool", x, 2);
  const int n = x.dim(0), d = x.dim(1);
  if (static_cast<int>(mask.size()) != n) {
    throw DimensionError("mean_pool: mask length " + std::to_string(mask.size()) +
                         " does not match " + std::to_string(n) + " rows");
  }
  int kept = static_cast<int>(std::count(mask.begin(), mask.end(), true));
  if (kept == 0) throw ContractError("mean_pool: every row is masked out (empty pool)");
  const auto& xv = x.values();
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += xv[static_cast<std::size_t>(i) * d + j];
  }
  for (auto& v : out) v /= kept;
  return finish_op("mean_pool", {x}, {d}, std::move(out), [n, d, kept, mask](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const auto& g = op.output->grad;
    auto& dx = grad_buf(X);
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < d; ++j)
        dx[static_cast<std::size_t>(i) * d + j] += g[static_cast<std::size_t>(j)] / kept;
    }
  });
}

// ---- row-wise nonlinearities ---------------------------------------------------

Tensor softmax_rows(const Tensor& x) {
  require_rank("softmax_rows", x, 2);
  const int m = x.dim(0), n = x.dim(1);
  if (n == 0) throw DimensionError("softmax_rows: empty rows");
  const auto& xv = x.values();
  std::vector<double> out(xv.size());
  for (int i = 0; i < m; ++i) {
    const double* row = xv.data() + static_cast<std::size_t>(i) * n;
    double* orow = out.data() + static_cast<std::size_t>(i) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      z += orow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] /= z;
  }
  return finish_op("softmax_rows", {x}, x.shape(), std::move(out), [m, n](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const auto& g = op.output->grad;
    const auto& y = op.output->data;
    auto& dx = grad_buf(X);
    for (int i = 0; i < m; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += g[base + j] * y[base + j];
      for (int j = 0; j < n; ++j) dx[base + j] += y[base + j] * (g[base + j] - dot);
    }
  });
}

Tensor logsumexp_rows(const Tensor& x) {
  require_rank("logsumexp_rows", x, 2);
  const int m = x.dim(0), n = x.dim(1);
  if (n == 0) throw DimensionError("logsumexp_rows: empty rows");
  const auto& xv = x.values();
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double* row = xv.data() + static_cast<std::size_t>(i) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp(row[j] - mx);
    out[static_cast<std::size_t>(i)] = mx + std::log(z);
  }
  return finish_op("logsumexp_rows", {x}, {m}, std::move(out), [m, n](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const auto& g = op.output->grad;
    const auto& lse = op.output->data;
    auto& dx = grad_buf(X);
    for (int i = 0; i < m; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j)
        dx[base + j] += g[static_cast<std::size_t>(i)] *
                        std::exp(X.data[base + j] - lse[static_cast<std::size_t>(i)]);
    }
  });
}

Tensor take_diag(const Tensor& x) {
  require_rank("take_diag", x, 2);
  const int b = x.dim(0);
  if (x.dim(1) != b) {
    throw DimensionError("take_diag: matrix must be square, got " + shape_str(x.shape()));
  }
  const auto& xv = x.values();
  std::vector<double> out(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) out[static_cast<std::size_t>(i)] = xv[static_cast<std::size_t>(i) * b + i];
  return finish_op("take_diag", {x}, {b}, std::move(out), [b](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const auto& g = op.output->grad;
    auto& dx = grad_buf(X);
    for (int i = 0; i < b; ++i) dx[static_cast<std::size_t>(i) * b + i] += g[static_cast<std::size_t>(i)];
  });
}

Tensor l2_normalize(const Tensor& x) {
  constexpr double kEps = 1e-12;
  if (x.rank() != 1 && x.rank() != 2) {
    throw DimensionError("l2_normalize: expected rank 1 or 2, got " + shape_str(x.shape()));
  }
  const int rows = x.rank() == 2 ? x.dim(0) : 1;
  const int d = x.rank() == 2 ? x.dim(1) : x.dim(0);
  const auto& xv = x.values();
  std::vector<double> out(xv.size());
  std::vector<double> norms(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    const double* row = xv.data() + static_cast<std::size_t>(i) * d;
    double sq = 0.0;
    for (int j = 0; j < d; ++j) sq += row[j] * row[j];
    double norm = std::sqrt(sq);
    if (norm <= kEps) {
      throw DegenerateInputError("l2_normalize: slice " + std::to_string(i) +
                                 " has near-zero norm");
    }
    norms[static_cast<std::size_t>(i)] = norm;
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(i) * d + j] = row[j] / norm;
  }
  return finish_op("l2_normalize", {x}, x.shape(), std::move(out),
                   [rows, d, norms](const OpRecord& op) {
                     auto& X = *op.inputs[0];
                     if (!X.requires_grad) return;
                     const auto& g = op.output->grad;
                     const auto& y = op.output->data;
                     auto& dx = grad_buf(X);
                     for (int i = 0; i < rows; ++i) {
                       const std::size_t base = static_cast<std::size_t>(i) * d;
                       double dot = 0.0;
                       for (int j = 0; j < d; ++j) dot += g[base + j] * y[base + j];
                       const double inv = 1.0 / norms[static_cast<std::size_t>(i)];
                       for (int j = 0; j < d; ++j)
                         dx[base + j] += (g[base + j] - y[base + j] * dot) * inv;
                     }
                   });
}

// ---- structure ops --------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ContractError("concat: no tensors given");
  const int rank = parts[0].rank();
  if (rank != 1 && rank != 2) {
    throw DimensionError("concat: only rank 1 or 2 supported");
  }
  if (axis < 0 || axis >= rank) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range");
  }
  for (const auto& p : parts) {
    if (p.rank() != rank) throw DimensionError("concat: mixed ranks");
    for (int a = 0; a < rank; ++a) {
      if (a != axis && p.dim(a) != parts[0].dim(a)) {
        throw DimensionError("concat: shape mismatch " + shape_str(p.shape()) + " vs " +
                             shape_str(parts[0].shape()));
      }
    }
  }

  Shape out_shape = parts[0].shape();
  int total = 0;
  for (const auto& p : parts) total += p.dim(axis);
  out_shape[static_cast<std::size_t>(axis)] = total;

  std::vector<double> out(static_cast<std::size_t>(numel(out_shape)));
  std::vector<int> offsets;  // per part, offset along axis
  {
    int off = 0;
    for (const auto& p : parts) {
      offsets.push_back(off);
      off += p.dim(axis);
    }
  }

  const int out_cols = rank == 2 ? out_shape[1] : total;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const auto& p = parts[pi];
    const auto& pv = p.values();
    if (rank == 1 || axis == 0) {
      const std::size_t row_off = static_cast<std::size_t>(offsets[pi]) *
                                  (rank == 2 ? static_cast<std::size_t>(out_cols) : 1);
      std::copy(pv.begin(), pv.end(), out.begin() + static_cast<std::ptrdiff_t>(row_off));
    } else {  // rank 2, axis 1
      const int r = p.dim(0), c = p.dim(1);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          out[static_cast<std::size_t>(i) * out_cols + offsets[pi] + j] =
              pv[static_cast<std::size_t>(i) * c + j];
    }
  }

  std::vector<Tensor> inputs = parts;
  return finish_op("concat", std::move(inputs), out_shape, std::move(out),
                   [axis, rank, offsets, out_cols](const OpRecord& op) {
                     const auto& g = op.output->grad;
                     for (std::size_t pi = 0; pi < op.inputs.size(); ++pi) {
                       auto& P = *op.inputs[pi];
                       if (!P.requires_grad) continue;
                       auto& dp = grad_buf(P);
                       if (rank == 1 || axis == 0) {
                         const std::size_t row_off =
                             static_cast<std::size_t>(offsets[pi]) *
                             (rank == 2 ? static_cast<std::size_t>(out_cols) : 1);
                         for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g[row_off + i];
                       } else {
                         const int r = P.shape[0], c = P.shape[1];
                         for (int i = 0; i < r; ++i)
                           for (int j = 0; j < c; ++j)
                             dp[static_cast<std::size_t>(i) * c + j] +=
                                 g[static_cast<std::size_t>(i) * out_cols + offsets[pi] + j];
                       }
                     }
                   });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                         shape_str(shape));
  }
  return finish_op("reshape", {x}, std::move(shape), x.values(), [](const OpRecord& op) {
    auto& X = *op.inputs[0];
    if (!X.requires_grad) return;
    const auto& g = op.output->grad;
    auto& dx = grad_buf(X);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
  });
}

Tensor select_column(const Tensor& m, int col) {
  require_rank("select_column", m, 2);
  const int r = m.dim(0), c = m.dim(1);
  if (col < 0 || col >= c) {
    throw DimensionError("select_column: column " + std::to_string(col) +
                         " out of range for " + shape_str(m.shape()));
  }
  const auto& mv = m.values();
  std::vector<double> out(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) out[static_cast<std::size_t>(i)] = mv[static_cast<std::size_t>(i) * c + col];
  return finish_op("select_column", {m}, {r}, std::move(out), [r, c, col](const OpRecord& op) {
    auto& M = *op.inputs[0];
    if (!M.requires_grad) return;
    const auto& g = op.output->grad;
    auto& dm = grad_buf(M);
    for (int i = 0; i < r; ++i) dm[static_cast<std::size_t>(i) * c + col] += g[static_cast<std::size_t>(i)];
  });
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
  require_rank("gather_rows", table, 2);
  const int v = table.dim(0), h = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= v) {
      throw ContractError("gather_rows: id " + std::to_string(id) + " out of range [0, " +
                          std::to_string(v) + ")");
    }
  }
  const int n = static_cast<int>(ids.size());
  const auto& tv = table.values();
  std::vector<double> out(static_cast<std::size_t>(n) * h);
  for (int i = 0; i < n; ++i)
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) * h, h,
                out.data() + static_cast<std::size_t>(i) * h);
  return finish_op("gather_rows", {table}, {n, h}, std::move(out), [ids, h](const OpRecord& op) {
    auto& T = *op.inputs[0];
    if (!T.requires_grad) return;
    const auto& g = op.output->grad;
    auto& dt = grad_buf(T);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t src = i * static_cast<std::size_t>(h);
      const std::size_t dst = static_cast<std::size_t>(ids[i]) * h;
      for (int j = 0; j < h; ++j) dt[dst + j] += g[src + j];
    }
  });
}

Tensor scatter_sum(const Tensor& messages, const std::vector<int>& dst, int n_rows) {
  require_rank("scatter_sum", messages, 2);
  const int m = messages.dim(0), h = messages.dim(1);
  if (static_cast<int>(dst.size()) != m) {
    throw DimensionError("scatter_sum: " + std::to_string(dst.size()) + " indices for " +
                         std::to_string(m) + " messages");
  }
  for (int d : dst) {
    if (d < 0 || d >= n_rows) {
      throw ContractError("scatter_sum: destination " + std::to_string(d) +
                          " out of range [0, " + std::to_string(n_rows) + ")");
    }
  }
  const auto& mv = messages.values();
  std::vector<double> out(static_cast<std::size_t>(n_rows) * h, 0.0);
  for (int i = 0; i < m; ++i) {
    const std::size_t src = static_cast<std::size_t>(i) * h;
    const std::size_t to = static_cast<std::size_t>(dst[static_cast<std::size_t>(i)]) * h;
    for (int j = 0; j < h; ++j) out[to + j] += mv[src + j];
  }
  return finish_op("scatter_sum", {messages}, {n_rows, h}, std::move(out),
                   [dst, h](const OpRecord& op) {
                     auto& M = *op.inputs[0];
                     if (!M.requires_grad) return;
                     const auto& g = op.output->grad;
                     auto& dm = grad_buf(M);
                     for (std::size_t i = 0; i < dst.size(); ++i) {
                       const std::size_t src = static_cast<std::size_t>(dst[i]) * h;
                       const std::size_t to = i * static_cast<std::size_t>(h);
                       for (int j = 0; j < h; ++j) dm[to + j] += g[src + j];
                     }
                   });
}

Tensor outer_sub(const Tensor& x, const Tensor& y) {
  require_rank("outer_sub", x, 1);
  require_rank("outer_sub", y, 1);
  const int n = x.dim(0), k = y.dim(0);
  const auto& xv = x.values();
  const auto& yv = y.values();
  std::vector<double> out(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      out[static_cast<std::size_t>(i) * k + j] = xv[static_cast<std::size_t>(i)] - yv[static_cast<std::size_t>(j)];
  return finish_op("outer_sub", {x, y}, {n, k}, std::move(out), [n, k](const OpRecord& op) {
    auto& X = *op.inputs[0];
    auto& Y = *op.inputs[1];
    const auto& g = op.output->grad;
    if (X.requires_grad) {
      auto& dx = grad_buf(X);
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += g[static_cast<std::size_t>(i) * k + j];
        dx[static_cast<std::size_t>(i)] += acc;
      }
    }
    if (Y.requires_grad) {
      auto& dy = grad_buf(Y);
      for (int j = 0; j < k; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += g[static_cast<std::size_t>(i) * k + j];
        dy[static_cast<std::size_t>(j)] -= acc;
      }
    }
  });
}

Tensor colwise_scale(const Tensor& m, const Tensor& s) {
  require_rank("colwise_scale", m, 2);
  require_rank("colwise_scale", s, 1);
  const int r = m.dim(0), c = m.dim(1);
  if (s.dim(0) != c) {
    throw DimensionError("colwise_scale: " + shape_str(m.shape()) + " vs scale " +
                         shape_str(s.shape()));
  }
  const auto& mv = m.values();
  const auto& sv = s.values();
  std::vector<double> out(mv.size());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<std::size_t>(i) * c + j] =
          mv[static_cast<std::size_t>(i) * c + j] * sv[static_cast<std::size_t>(j)];
  return finish_op("colwise_scale", {m, s}, m.shape(), std::move(out), [r, c](const OpRecord& op) {
    auto& M = *op.inputs[0];
    auto& S = *op.inputs[1];
    const auto& g = op.output->grad;
    if (M.requires_grad) {
      auto& dm = grad_buf(M);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          dm[static_cast<std::size_t>(i) * c + j] +=
              g[static_cast<std::size_t>(i) * c + j] * S.data[static_cast<std::size_t>(j)];
    }
    if (S.requires_grad) {
      auto& ds = grad_buf(S);
      for (int j = 0; j < c; ++j) {
        double acc = 0.0;
        for (int i = 0; i < r; ++i)
          acc += g[static_cast<std::size_t>(i) * c + j] * M.data[static_cast<std::size_t>(i) * c + j];
        ds[static_cast<std::size_t>(j)] += acc;
      }
    }
  });
}

Tensor add_rowvec(const Tensor& m, const Tensor& b) {
  require_rank("add_rowvec", m, 2);
  require_rank("add_rowvec", b, 1);
  const int r = m.dim(0), c = m.dim(1);
  if (b.dim(0) != c) {
    throw DimensionError("add_rowvec: " + shape_str(m.shape()) + " vs bias " +
                         shape_str(b.shape()));
  }
  const auto& mv = m.values();
  const auto& bv = b.values();
  std::vector<double> out(mv.size());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<std::size_t>(i) * c + j] =
          mv[static_cast<std::size_t>(i) * c + j] + bv[static_cast<std::size_t>(j)];
  return finish_op("add_rowvec", {m, b}, m.shape(), std::move(out), [r, c](const OpRecord& op) {
    auto& M = *op.inputs[0];
    auto& B = *op.inputs[1];
    const auto& g = op.output->grad;
    if (M.requires_grad) {
      auto& dm = grad_buf(M);
      for (std::size_t i = 0; i < g.size(); ++i) dm[i] += g[i];
    }
    if (B.requires_grad) {
      auto& db = grad_buf(B);
      for (int j = 0; j < c; ++j) {
        double acc = 0.0;
        for (int i = 0; i < r; ++i) acc += g[static_cast<std::size_t>(i) * c + j];
        db[static_cast<std::size_t>(j)] += acc;
      }
    }
  });
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require_rank("layer_norm_rows", x, 2);
  require_rank("layer_norm_rows", gain, 1);
  require_rank("layer_norm_rows", bias, 1);
  const int r = x.dim(0), d = x.dim(1);
  if (gain.dim(0) != d || bias.dim(0) != d) {
    throw DimensionError("layer_norm_rows: gain/bias width mismatch for " +
                         shape_str(x.shape()));
  }
  const auto& xv = x.values();
  const auto& gv = gain.values();
  const auto& bv = bias.values();
  std::vector<double> out(xv.size());
  std::vector<double> inv_std(static_cast<std::size_t>(r));
  std::vector<double> xhat(xv.size());
  for (int i = 0; i < r; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += xv[base + j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double cjj = xv[base + j] - mean;
      var += cjj * cjj;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(i)] = is;
    for (int j = 0; j < d; ++j) {
      xhat[base + j] = (xv[base + j] - mean) * is;
      out[base + j] = xhat[base + j] * gv[static_cast<std::size_t>(j)] + bv[static_cast<std::size_t>(j)];
    }
  }
  return finish_op(
      "layer_norm_rows", {x, gain, bias}, x.shape(), std::move(out),
      [r, d, inv_std, xhat](const OpRecord& op) {
        auto& X = *op.inputs[0];
        auto& G = *op.inputs[1];
        auto& B = *op.inputs[2];
        const auto& g = op.output->grad;
        if (G.requires_grad) {
          auto& dg = grad_buf(G);
          for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < r; ++i)
              acc += g[static_cast<std::size_t>(i) * d + j] * xhat[static_cast<std::size_t>(i) * d + j];
            dg[static_cast<std::size_t>(j)] += acc;
          }
        }
        if (B.requires_grad) {
          auto& db = grad_buf(B);
          for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int i = 0; i < r; ++i) acc += g[static_cast<std::size_t>(i) * d + j];
            db[static_cast<std::size_t>(j)] += acc;
          }
        }
        if (X.requires_grad) {
          auto& dx = grad_buf(X);
          for (int i = 0; i < r; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * d;
            double mean_gh = 0.0, mean_ghx = 0.0;
            for (int j = 0; j < d; ++j) {
              const double gh = g[base + j] * G.data[static_cast<std::size_t>(j)];
              mean_gh += gh;
              mean_ghx += gh * xhat[base + j];
            }
            mean_gh /= d;
            mean_ghx /= d;
            const double is = inv_std[static_cast<std::size_t>(i)];
            for (int j = 0; j < d; ++j) {
              const double gh = g[base + j] * G.data[static_cast<std::size_t>(j)];
              dx[base + j] += is * (gh - mean_gh - xhat[base + j] * mean_ghx);
            }
          }
        }
      });
}

}  // namespace bindcore::num
