// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Heavy criteria (desk-scale training, the ablation grid) run real
// training, so the full suite takes several minutes.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "bindcore/align/checkpoint.hpp"
#include "bindcore/align/loss.hpp"
#include "bindcore/align/trainer.hpp"
#include "bindcore/chem/elements.hpp"
#include "bindcore/chem/synthetic.hpp"
#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"
#include "bindcore/eval/ablation.hpp"
#include "bindcore/eval/retrieval.hpp"
#include "bindcore/eval/zero_shot.hpp"

namespace fs = std::filesystem;
using namespace bindcore;
using num::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& line) { g_notes.push_back(line); }

void report(int criterion, const std::string& what, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- rng utils

std::vector<double> random_values(num::Rng& rng, std::int64_t n, double lo = -1.0,
                                  double hi = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

Tensor random_tensor(num::Rng& rng, num::Shape shape, double lo = -1.0, double hi = 1.0) {
  return Tensor::from_data(shape, random_values(rng, num::numel(shape), lo, hi));
}

Tensor random_variable(num::Rng& rng, num::Shape shape, double lo = -1.0, double hi = 1.0) {
  return Tensor::variable(shape, random_values(rng, num::numel(shape), lo, hi));
}

double rel_error(double ad, double fd) {
  const double mag = std::max(std::abs(ad), std::abs(fd));
  if (mag <= 1e-7) return 0.0;
  return std::abs(ad - fd) / std::max(1.0, mag);
}

// Central finite differences over every element of every input.
double fd_worst_error(std::vector<Tensor*> inputs, const std::function<Tensor()>& forward) {
  num::Tape tape;
  {
    num::TapeScope scope(tape);
    tape.backward(forward());
  }
  double worst = 0.0;
  for (Tensor* in : inputs) {
    const auto grad = in->grad();
    auto& data = in->raw_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + 1e-5;
      const double up = forward().item();
      data[i] = saved - 1e-5;
      const double down = forward().item();
      data[i] = saved;
      worst = std::max(worst, rel_error(grad[i], (up - down) / 2e-5));
    }
    in->zero_grad();
  }
  return worst;
}

std::vector<int> iota_perm(num::Rng& rng, int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

std::array<std::array<double, 3>, 3> random_rotation(num::Rng& rng, bool reflect) {
  // Gram-Schmidt on Gaussian columns, then fix the determinant sign.
  std::array<std::array<double, 3>, 3> q{};
  for (int col = 0; col < 3; ++col) {
    std::array<double, 3> v{rng.normal(), rng.normal(), rng.normal()};
    for (int prev = 0; prev < col; ++prev) {
      double dot = 0.0;
      for (int i = 0; i < 3; ++i) dot += v[i] * q[i][prev];
      for (int i = 0; i < 3; ++i) v[i] -= dot * q[i][prev];
    }
    double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (int i = 0; i < 3; ++i) q[i][col] = v[i] / norm;
  }
  const double det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
                     q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
                     q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  if ((det < 0.0) != reflect) {
    for (int i = 0; i < 3; ++i) q[i][0] = -q[i][0];
  }
  return q;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

chem::Conformation random_conf(num::Rng& rng, int n) {
  chem::Conformation c;
  for (int i = 0; i < n; ++i) {
    c.atom_types.push_back(rng.uniform_int(chem::kNumAtomTypes));
    c.coords.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)});
  }
  return c;
}

// ------------------------------------------------------------ criterion 1

bool criterion_gradients() {
  const auto start = Clock::now();
  double worst_primitive = 0.0;

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    num::Rng rng(seed);
    Tensor a = random_variable(rng, {3, 4});
    Tensor b = random_variable(rng, {3, 4});
    Tensor w34 = random_tensor(rng, {3, 4});
    auto ws = [&](Tensor out) { return num::sum(num::mul(out, w34)); };

    worst_primitive = std::max(worst_primitive, fd_worst_error({&a, &b}, [&] { return ws(num::add(a, b)); }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a, &b}, [&] { return ws(num::sub(a, b)); }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a, &b}, [&] { return ws(num::mul(a, b)); }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] { return ws(num::scale(a, -0.7)); }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] { return ws(num::exp(a)); }));

    Tensor s = Tensor::variable({}, {rng.uniform(0.5, 1.5)});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a, &s}, [&] { return ws(num::mul_scalar(a, s)); }));

    Tensor pos = random_variable(rng, {3, 4}, 0.3, 3.0);
    worst_primitive = std::max(worst_primitive, fd_worst_error({&pos}, [&] { return ws(num::log(pos)); }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&pos}, [&] { return ws(num::reciprocal(pos)); }));

    Tensor off = Tensor::variable({3, 4}, [&] {
      auto v = random_values(rng, 12, 0.1, 1.0);
      for (auto& x : v) {
        if (rng.uniform() < 0.5) x = -x;
      }
      return v;
    }());
    worst_primitive = std::max(worst_primitive, fd_worst_error({&off}, [&] { return ws(num::relu(off)); }));

    Tensor m = random_variable(rng, {3, 4});
    Tensor n42 = random_variable(rng, {4, 2});
    Tensor w32 = random_tensor(rng, {3, 2});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&m, &n42}, [&] {
      return num::sum(num::mul(num::matmul(m, n42), w32));
    }));
    Tensor w43 = random_tensor(rng, {4, 3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&m}, [&] {
      return num::sum(num::mul(num::transpose(m), w43));
    }));

    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] { return num::sum(a); }));
    Tensor w4 = random_tensor(rng, {4});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] {
      return num::sum(num::mul(num::mean_pool(a, {true, false, true}), w4));
    }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] {
      return ws(num::softmax_rows(a));
    }));
    Tensor w3 = random_tensor(rng, {3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] {
      return num::sum(num::mul(num::logsumexp_rows(a), w3));
    }));
    Tensor sq = random_variable(rng, {3, 3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&sq}, [&] {
      return num::sum(num::mul(num::take_diag(sq), w3));
    }));

    Tensor far = Tensor::variable({3, 4}, [&] {
      auto v = random_values(rng, 12, 0.3, 1.0);
      for (auto& x : v) {
        if (rng.uniform() < 0.5) x = -x;
      }
      return v;
    }());
    worst_primitive = std::max(worst_primitive, fd_worst_error({&far}, [&] {
      return ws(num::l2_normalize(far));
    }));

    Tensor w64 = random_tensor(rng, {6, 4});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a, &b}, [&] {
      return num::sum(num::mul(num::concat({a, b}, 0), w64));
    }));
    Tensor w26 = random_tensor(rng, {2, 6});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] {
      return num::sum(num::mul(num::reshape(a, {2, 6}), w26));
    }));
    worst_primitive = std::max(worst_primitive, fd_worst_error({&a}, [&] {
      return num::sum(num::mul(num::select_column(a, 2), w3));
    }));

    Tensor table = random_variable(rng, {5, 3});
    std::vector<int> ids{rng.uniform_int(5), rng.uniform_int(5), rng.uniform_int(5),
                         rng.uniform_int(5)};
    Tensor w43b = random_tensor(rng, {4, 3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&table}, [&] {
      return num::sum(num::mul(num::gather_rows(table, ids), w43b));
    }));
    Tensor msgs = random_variable(rng, {4, 3});
    std::vector<int> dst{rng.uniform_int(3), rng.uniform_int(3), rng.uniform_int(3),
                         rng.uniform_int(3)};
    Tensor w33 = random_tensor(rng, {3, 3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&msgs}, [&] {
      return num::sum(num::mul(num::scatter_sum(msgs, dst, 3), w33));
    }));

    Tensor x4 = random_variable(rng, {4});
    Tensor y3 = random_variable(rng, {3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&x4, &y3}, [&] {
      return num::sum(num::mul(num::outer_sub(x4, y3), w43b));
    }));
    Tensor cols = random_variable(rng, {3}, 0.5, 2.0);
    Tensor m43 = random_variable(rng, {4, 3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&m43, &cols}, [&] {
      return num::sum(num::mul(num::colwise_scale(m43, cols), w43b));
    }));
    Tensor bias = random_variable(rng, {3});
    worst_primitive = std::max(worst_primitive, fd_worst_error({&m43, &bias}, [&] {
      return num::sum(num::mul(num::add_rowvec(m43, bias), w43b));
    }));
    Tensor gain = random_variable(rng, {3}, 0.7, 1.3);
    worst_primitive = std::max(worst_primitive, fd_worst_error({&m43, &gain, &bias}, [&] {
      return num::sum(num::mul(num::layer_norm_rows(m43, gain, bias), w43b));
    }));
  }

  // end-to-end: sampled parameter entries through encoder + projection
  double worst_encoder = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    num::Rng rng(seed ^ 0xacce97);

    auto sample_params = [&](num::ParamSet& params, const std::function<Tensor()>& forward) {
      num::Tape tape;
      {
        num::TapeScope scope(tape);
        tape.backward(forward());
      }
      for (int pick = 0; pick < 5; ++pick) {
        auto& [name, t] = params.entries[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(params.entries.size())))];
        const auto i = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(t.size())));
        const double ad = t.grad()[i];
        auto& data = t.raw_data();
        const double saved = data[i];
        data[i] = saved + 1e-5;
        const double up = forward().item();
        data[i] = saved - 1e-5;
        const double down = forward().item();
        data[i] = saved;
        worst_encoder = std::max(worst_encoder, rel_error(ad, (up - down) / 2e-5));
      }
      for (auto& [name, t] : params.entries) t.zero_grad();
    };

    {
      enc::TextEncoderConfig cfg;
      cfg.vocab_size = 12;
      cfg.hidden = 16;
      cfg.layers = 2;
      cfg.max_len = 16;
      auto p = enc::TextEncoderParams::init(cfg, rng);
      auto head = enc::ProjectionHead::init(16, 8, rng);
      num::ParamSet params;
      p.register_params(params, "t");
      head.register_params(params, "h");
      chem::TokenSequence seq{{rng.uniform_int(12), rng.uniform_int(12), rng.uniform_int(12),
                               rng.uniform_int(12)},
                              ""};
      sample_params(params, [&] { return num::sum(enc::project(head, enc::encode_text(p, seq))); });
    }
    {
      auto p = enc::GraphEncoderParams::init({16, 2}, rng);
      auto head = enc::ProjectionHead::init(16, 8, rng);
      num::ParamSet params;
      p.register_params(params, "g");
      head.register_params(params, "h");
      chem::MoleculeGraph g;
      const int n = 3 + rng.uniform_int(4);
      for (int i = 0; i < n; ++i) g.atom_types.push_back(rng.uniform_int(chem::kNumAtomTypes));
      for (int i = 1; i < n; ++i) g.bonds.push_back({rng.uniform_int(i), i, 1 + rng.uniform_int(4)});
      sample_params(params, [&] { return num::sum(enc::project(head, enc::encode_graph(p, g))); });
    }
    for (bool pocket_side : {false, true}) {
      enc::UniMolConfig cfg;
      cfg.hidden = 8;
      cfg.layers = 2;
      cfg.heads = 2;
      auto p = enc::UniMolEncoderParams::init(cfg, rng);
      auto head = enc::ProjectionHead::init(8, 8, rng);
      num::ParamSet params;
      p.register_params(params, "u");
      head.register_params(params, "h");
      chem::Conformation c = random_conf(rng, 3 + rng.uniform_int(3));
      chem::PocketStructure pk{c.atom_types, c.coords, ""};
      sample_params(params, [&] {
        Tensor e = pocket_side ? enc::encode_pocket(p, pk) : enc::encode_conformation(p, c);
        return num::sum(enc::project(head, e));
      });
    }
  }

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "primitive max rel err " << worst_primitive << ", encoder max rel err "
         << worst_encoder << ", " << elapsed << " s";
  const bool ok = worst_primitive < 1e-6 && worst_encoder < 1e-4 && elapsed < 60.0;
  report(1, "gradient suite (finite differences, 100 seeded trials)", ok, detail.str());
  return ok;
}

// ------------------------------------------------------------ criterion 2

bool criterion_invariances() {
  num::Rng rng(0x14a);
  enc::UniMolConfig ucfg;
  ucfg.hidden = 16;
  ucfg.layers = 2;
  ucfg.heads = 2;
  auto gin = enc::GraphEncoderParams::init({16, 2}, rng);
  auto uni = enc::UniMolEncoderParams::init(ucfg, rng);
  auto head = enc::ProjectionHead::init(16, 16, rng);

  double worst_perm = 0.0, worst_e3 = 0.0, worst_atom_perm = 0.0, worst_norm = 0.0,
         worst_rot = 0.0;

  for (int trial = 0; trial < 50; ++trial) {
    {  // graph node permutation
      chem::MoleculeGraph g;
      const int n = 2 + rng.uniform_int(7);
      for (int i = 0; i < n; ++i) g.atom_types.push_back(rng.uniform_int(chem::kNumAtomTypes));
      for (int i = 1; i < n; ++i) g.bonds.push_back({rng.uniform_int(i), i, 1 + rng.uniform_int(4)});
      const auto base = enc::encode_graph(gin, g).values();
      const auto perm = iota_perm(rng, n);
      chem::MoleculeGraph pg;
      pg.atom_types.resize(g.atom_types.size());
      for (std::size_t i = 0; i < perm.size(); ++i) {
        pg.atom_types[static_cast<std::size_t>(perm[i])] = g.atom_types[i];
      }
      for (const auto& bnd : g.bonds) {
        pg.bonds.push_back({perm[static_cast<std::size_t>(bnd.i)],
                            perm[static_cast<std::size_t>(bnd.j)], bnd.order});
      }
      worst_perm = std::max(worst_perm, max_abs_diff(base, enc::encode_graph(gin, pg).values()));
    }
    {  // E(3) on the 3D encoder, reflections included
      chem::Conformation c = random_conf(rng, 3 + rng.uniform_int(6));
      const auto base = enc::encode_conformation(uni, c).values();
      const auto rot = random_rotation(rng, rng.uniform() < 0.5);
      const std::array<double, 3> shift{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      chem::Conformation moved = c;
      for (auto& p : moved.coords) {
        const auto v = p;
        for (int i = 0; i < 3; ++i) {
          p[static_cast<std::size_t>(i)] = shift[static_cast<std::size_t>(i)];
          for (int j = 0; j < 3; ++j) {
            p[static_cast<std::size_t>(i)] +=
                rot[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
          }
        }
      }
      worst_e3 = std::max(worst_e3, max_abs_diff(base, enc::encode_conformation(uni, moved).values()));

      // atom relabeling
      const auto perm = iota_perm(rng, c.num_atoms());
      chem::Conformation pc;
      pc.atom_types.resize(c.atom_types.size());
      pc.coords.resize(c.coords.size());
      for (std::size_t i = 0; i < perm.size(); ++i) {
        pc.atom_types[static_cast<std::size_t>(perm[i])] = c.atom_types[i];
        pc.coords[static_cast<std::size_t>(perm[i])] = c.coords[i];
      }
      worst_atom_perm =
          std::max(worst_atom_perm, max_abs_diff(base, enc::encode_conformation(uni, pc).values()));
    }
    {  // projection norm
      Tensor x = random_tensor(rng, {16}, -2.0, 2.0);
      const auto y = enc::project(head, x).values();
      double sq = 0.0;
      for (double v : y) sq += v * v;
      worst_norm = std::max(worst_norm, std::abs(std::sqrt(sq) - 1.0));
    }
    {  // InfoNCE joint rotation
      const int b = 6, d = 8;
      Tensor x = num::l2_normalize(random_tensor(rng, {b, d}));
      Tensor y = num::l2_normalize(random_tensor(rng, {b, d}));
      const double base = align::info_nce(x, y, 1.0).item();
      // rotation = orthogonal d×d via Gram-Schmidt
      std::vector<double> q(static_cast<std::size_t>(d) * d);
      for (int col = 0; col < d; ++col) {
        std::vector<double> v(static_cast<std::size_t>(d));
        for (auto& e : v) e = rng.normal();
        for (int prev = 0; prev < col; ++prev) {
          double dot = 0.0;
          for (int i = 0; i < d; ++i) dot += v[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i) * d + prev];
          for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] -= dot * q[static_cast<std::size_t>(i) * d + prev];
        }
        double norm = 0.0;
        for (double e : v) norm += e * e;
        norm = std::sqrt(norm);
        for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i) * d + col] = v[static_cast<std::size_t>(i)] / norm;
      }
      auto rotate = [&](const Tensor& t) {
        std::vector<double> out(static_cast<std::size_t>(b) * d, 0.0);
        for (int i = 0; i < b; ++i) {
          for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
              out[static_cast<std::size_t>(i) * d + j] +=
                  t.at(i * d + k) * q[static_cast<std::size_t>(k) * d + j];
            }
          }
        }
        return Tensor::from_data({b, d}, out);
      };
      worst_rot = std::max(worst_rot, std::abs(align::info_nce(rotate(x), rotate(y), 1.0).item() - base));
    }
  }

  std::ostringstream detail;
  detail << "graph perm " << worst_perm << ", E(3) " << worst_e3 << ", atom perm "
         << worst_atom_perm << ", head norm dev " << worst_norm << ", loss rotation dev "
         << worst_rot;
  const bool ok = worst_perm < 1e-9 && worst_e3 < 1e-8 && worst_atom_perm < 1e-9 &&
                  worst_norm < 1e-6 && worst_rot < 1e-9;
  report(2, "invariance suite (50 trials each)", ok, detail.str());
  return ok;
}

// ------------------------------------------------------------ criterion 3

bool criterion_closed_form() {
  std::vector<double> row = {1, 0, 0, 0};
  std::vector<double> data;
  for (int i = 0; i < 4; ++i) data.insert(data.end(), row.begin(), row.end());
  Tensor same = Tensor::from_data({4, 4}, data);
  const double uniform = align::info_nce(same, same, 1.0).item();

  Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  const double diag_tau1 = align::info_nce(eye, eye, 1.0).item();
  const double diag_tau_half = align::info_nce(eye, eye, 0.5).item();

  const double e_uniform = std::abs(uniform - std::log(4.0));
  const double e1 = std::abs(diag_tau1 - std::log(1.0 + std::exp(-1.0)));
  const double e2 = std::abs(diag_tau_half - std::log(1.0 + std::exp(-2.0)));

  std::ostringstream detail;
  detail << "ln4 dev " << e_uniform << ", ln(1+e^-1) dev " << e1 << ", ln(1+e^-2) dev " << e2;
  const bool ok = e_uniform < 1e-9 && e1 < 1e-9 && e2 < 1e-9 && diag_tau_half < diag_tau1;
  report(3, "closed-form contrastive loss values", ok, detail.str());
  return ok;
}

// ------------------------------------------------------------ criterion 4

align::ModelConfig desk_model(const chem::DataStore& data) {
  return align::ModelConfig::desk_scale(data.vocab());
}

bool criterion_overfit() {
  const auto start = Clock::now();
  chem::SyntheticConfig scfg;
  scfg.n_samples = 16;
  scfg.latent_dim = 8;
  scfg.noise_sigma = 0.05;
  scfg.seed = 404;
  auto ds = chem::generate_synthetic_m4(scfg);
  auto data = chem::DataStore::from_synthetic(ds);

  bool all_ok = true;
  std::ostringstream detail;
  for (chem::PairKind kind : {chem::PairKind::LanguageGraph, chem::PairKind::ConformationProtein}) {
    auto model = align::JointModel::init(desk_model(data), 405);
    align::AlignmentConfig cfg;
    cfg.batch_size = 4;
    const auto pretrain = data.manifest(kind).filter(chem::Split::Pretrain);
    std::vector<align::BatchItem> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({kind, pretrain.entries[static_cast<std::size_t>(i)]});
    for (int step = 0; step < 500; ++step) align::train_step(model, data, batch, cfg);

    // in-batch R@1 on the training batch itself, both directions
    const auto [left_mod, right_mod] = pair_modalities(kind);
    std::vector<Tensor> lrows, rrows;
    for (const auto& item : batch) {
      lrows.push_back(num::reshape(model.embed_record(left_mod, data, item.entry.left), {1, 64}));
      rrows.push_back(num::reshape(model.embed_record(right_mod, data, item.entry.right), {1, 64}));
    }
    auto sim = eval::similarity_matrix(num::concat(lrows, 0), num::concat(rrows, 0));
    const double fwd = eval::recall_at_k(sim, 1);
    auto sim_rev = eval::similarity_matrix(num::concat(rrows, 0), num::concat(lrows, 0));
    const double rev = eval::recall_at_k(sim_rev, 1);
    detail << chem::pair_kind_name(kind) << " " << fwd << "/" << rev << "% ";
    all_ok = all_ok && fwd == 100.0 && rev == 100.0;
  }

  const double elapsed = seconds_since(start);
  detail << elapsed << " s";
  const bool ok = all_ok && elapsed < 30.0;
  report(4, "overfit sanity (4-sample batch, 500 steps, R@1 = 100%)", ok, detail.str());
  return ok;
}

// ------------------------------------------------------------ criterion 5

struct DeskRun {
  chem::SyntheticDataset dataset;
  chem::DataStore data;
  align::JointModel model;
  align::TrainResult result;
  double elapsed = 0.0;
};

DeskRun run_desk_scale() {
  const auto start = Clock::now();
  chem::SyntheticConfig scfg;
  scfg.n_samples = 2000;
  scfg.latent_dim = 8;
  scfg.noise_sigma = 0.05;
  scfg.seed = 1;
  auto dataset = chem::generate_synthetic_m4(scfg);
  auto data = chem::DataStore::from_synthetic(dataset);

  auto model = align::JointModel::init(align::ModelConfig::desk_scale(data.vocab()), 1);
  align::AlignmentConfig cfg;  // defaults: lr 1e-3, B 16, tau 1, 100 epochs, patience 10
  const fs::path run_dir = fs::temp_directory_path() / "bindcore-accept-desk";
  fs::remove_all(run_dir);
  auto result = align::train(model, data, cfg, run_dir);

  // evaluate the checkpoint the run blesses, not the post-early-stop state
  auto best = align::load_checkpoint(run_dir / "best.ckpt");
  fs::remove_all(run_dir);
  DeskRun run{std::move(dataset), std::move(data), std::move(best), std::move(result),
              seconds_since(start)};
  return run;
}

bool criterion_desk_scale(const DeskRun& run) {
  bool ok = run.elapsed < 1800.0;
  std::ostringstream detail;
  detail.precision(4);

  eval::RetrievalOptions options;
  options.mode = eval::RetrievalMode::InBatch;
  options.batch_size = 64;
  options.split = chem::Split::Test;
  options.ks = {1};
  for (chem::PairKind kind : chem::kAllPairKinds) {
    for (bool query_left : {true, false}) {
      options.query_left = query_left;
      const auto report_k = eval::evaluate_retrieval(run.model, run.data, kind, options);
      const double r1 = report_k.recall_at.at(1);
      detail << report_k.direction << " " << r1 << "% ";
      ok = ok && r1 >= 90.0;
    }
  }

  // validation curves end above where they started
  for (chem::PairKind kind : chem::kAllPairKinds) {
    double first = -1.0, last = 0.0;
    for (const auto& rec : run.result.log) {
      if (rec.kind != kind) continue;
      if (first < 0.0) first = rec.val_recall_at_1;
      last = rec.val_recall_at_1;
    }
    ok = ok && last > first;
  }

  detail << "epochs " << run.result.epochs_run << ", " << run.elapsed << " s";
  report(5, "desk-scale alignment (n=2000, all four pairs, in-batch 64 R@1 >= 90%)", ok,
         detail.str());

  // zero-shot classification against the full test-name pool
  {
    const auto test_split =
        run.data.manifest(chem::PairKind::LanguageGraph).filter(chem::Split::Test);
    std::vector<std::string> names;
    for (const auto& e : test_split.entries) names.push_back(run.data.text(e.left).raw_text);
    int hits = 0;
    for (std::size_t i = 0; i < test_split.entries.size(); ++i) {
      const auto probs = eval::zero_shot_classify(
          run.model, run.data.graph(test_split.entries[i].right), names, 1.0);
      hits += static_cast<std::size_t>(std::distance(
                  probs.begin(), std::max_element(probs.begin(), probs.end()))) == i;
    }
    const double acc = static_cast<double>(hits) / static_cast<double>(names.size());
    const double chance = 1.0 / static_cast<double>(names.size());
    std::ostringstream zs;
    zs << "accuracy " << 100.0 * acc << "% vs chance " << 100.0 * chance << "%";
    note(std::string("zero-shot classification on the trained model: ") + zs.str() +
         (acc > 10.0 * chance ? " (>10x chance)" : " (below 10x chance!)"));
    ok = ok && acc > 10.0 * chance;
  }
  return ok;
}

// ------------------------------------------------------- criteria 6 and 7

bool criteria_emergence_and_chance(const chem::DataStore& data) {
  align::AlignmentConfig base;
  base.max_epochs = 15;
  base.seed = 21;

  const std::vector<eval::AblationRowSpec> grid = {
      {"language-graph", {chem::PairKind::LanguageGraph}},
      {"language-conformation", {chem::PairKind::LanguageConformation}},
      {"graph-conformation", {chem::PairKind::GraphConformation}},
      {"language-graph+language-conformation",
       {chem::PairKind::LanguageGraph, chem::PairKind::LanguageConformation}},
      {"language-graph+graph-conformation",
       {chem::PairKind::LanguageGraph, chem::PairKind::GraphConformation}},
      {"language-conformation+graph-conformation",
       {chem::PairKind::LanguageConformation, chem::PairKind::GraphConformation}},
      {"all-pairs",
       {chem::PairKind::LanguageGraph, chem::PairKind::LanguageConformation,
        chem::PairKind::GraphConformation, chem::PairKind::ConformationProtein}},
  };
  const auto model_cfg = align::ModelConfig::desk_scale(data.vocab());
  const auto rows = eval::ablation_run(data, grid, model_cfg, base);
  for (const auto& row : rows) {
    note("ablation " + row.label + ": L2G " + std::to_string(row.l2g_recall_at_1) + "%, L2C " +
         std::to_string(row.l2c_recall_at_1) + "%");
  }

  const int n_test = static_cast<int>(
      data.manifest(chem::PairKind::LanguageConformation).filter(chem::Split::Test).entries.size());
  const double chance = 100.0 / n_test;

  // --- criterion 6: emergence ------------------------------------------------
  // retrain the emergent configuration with the grid's per-row stream to get
  // the model itself for the permutation test
  align::JointModel emergent = align::JointModel::init(model_cfg, base.seed);
  {
    align::AlignmentConfig cfg = base;
    cfg.active_pairs = {chem::PairKind::LanguageGraph, chem::PairKind::GraphConformation};
    cfg.seed = num::Rng(base.seed).split("ablation").split(4).seed();
    align::train(emergent, data, cfg);
  }
  const auto stats = eval::emergence_test(emergent, data, chem::PairKind::LanguageConformation,
                                          chem::Split::Test, 10000, 33);

  const double emergent_l2c = rows[4].l2c_recall_at_1;
  const double direct_l2c = rows[6].l2c_recall_at_1;  // all-pairs has direct L-C pairs
  double best_l2g = 0.0, best_l2c = 0.0;
  for (const auto& row : rows) {
    best_l2g = std::max(best_l2g, row.l2g_recall_at_1);
    best_l2c = std::max(best_l2c, row.l2c_recall_at_1);
  }
  const bool emergent_above_chance = emergent_l2c >= 10.0 * chance;
  const bool permutation_ok = stats.p_value < 0.01 && stats.margin > 0.0;
  const bool direct_beats_emergent = direct_l2c + 1e-9 >= emergent_l2c;
  const bool all_pairs_first =
      rows[6].l2g_recall_at_1 + 1e-9 >= best_l2g && rows[6].l2c_recall_at_1 + 1e-9 >= best_l2c;

  {
    std::ostringstream detail;
    detail << "emergent L2C " << emergent_l2c << "% vs chance " << chance << "%, margin "
           << stats.margin << ", p " << stats.p_value << ", all-pairs L2G/L2C "
           << rows[6].l2g_recall_at_1 << "/" << rows[6].l2c_recall_at_1;
    report(6, "emergent alignment via the shared graph modality",
           emergent_above_chance && permutation_ok && direct_beats_emergent && all_pairs_first,
           detail.str());
  }

  // --- criterion 7: untouched directions stay at chance ------------------------
  const double gc_l2g = rows[2].l2g_recall_at_1;
  const double gc_l2c = rows[2].l2c_recall_at_1;
  const double p = 1.0 / n_test;
  const double se = 100.0 * std::sqrt(p * (1.0 - p) / n_test);
  const bool chance_ok = std::abs(gc_l2g - chance) <= 3.0 * se && std::abs(gc_l2c - chance) <= 3.0 * se;
  {
    std::ostringstream detail;
    detail << "graph-conformation only: L2G " << gc_l2g << "%, L2C " << gc_l2c << "%, chance "
           << chance << "% +- " << 3.0 * se;
    report(7, "chance-level sanity for untrained directions", chance_ok, detail.str());
  }

  return emergent_above_chance && permutation_ok && direct_beats_emergent && all_pairs_first &&
         chance_ok;
}

// ------------------------------------------------------------ criterion 8

bool criterion_cli_determinism() {
  const char* bin = std::getenv("BINDCORE_BIN");
  if (bin == nullptr) {
    report(8, "seeded runs produce bit-identical artifacts", false,
           "BINDCORE_BIN not set; cannot drive the CLI");
    return false;
  }
  const fs::path root = fs::temp_directory_path() / "bindcore-accept-determinism";
  fs::remove_all(root);
  fs::create_directories(root);

  const std::string data_dir = (root / "data").string();
  auto shell = [&](const std::string& args) {
    const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  bool ok = shell("synth --out " + data_dir + " --n 120 --latent-dim 4 --seed 8") == 0;
  const std::string train_args = " --embed-dim 16 --batch-size 8 --max-epochs 2 --seed 8";
  ok = ok && shell("train --data " + data_dir + " --run-dir " + (root / "a").string() + train_args) == 0;
  ok = ok && shell("train --data " + data_dir + " --run-dir " + (root / "b").string() + train_args) == 0;

  std::string detail = "two cmd_train runs";
  if (ok) {
    const bool metrics_same =
        read_text_file(root / "a" / "metrics.jsonl") == read_text_file(root / "b" / "metrics.jsonl");
    const bool best_same =
        read_text_file(root / "a" / "best.ckpt") == read_text_file(root / "b" / "best.ckpt");
    const bool last_same =
        read_text_file(root / "a" / "last.ckpt") == read_text_file(root / "b" / "last.ckpt");
    ok = metrics_same && best_same && last_same;
    detail += metrics_same ? ", metrics identical" : ", metrics differ";
    detail += best_same && last_same ? ", checkpoints identical" : ", checkpoints differ";
  } else {
    detail += " failed to execute";
  }
  fs::remove_all(root);
  report(8, "seeded cmd_train runs produce bit-identical metrics and parameters", ok, detail);
  return ok;
}

// ------------------------------------------------------------ criterion 9

bool criterion_manifest_conformance() {
  const fs::path root = fs::temp_directory_path() / "bindcore-accept-manifest";
  fs::remove_all(root);
  fs::create_directories(root);

  std::vector<chem::PairManifest> manifests;
  for (const auto& ref : chem::kM4ReferenceCounts) {
    std::ostringstream out;
    long serial = 0;
    for (int s = 0; s < 3; ++s) {
      const char* split = s == 0 ? "pretrain" : s == 1 ? "validation" : "test";
      for (std::int64_t i = 0; i < ref.counts[static_cast<std::size_t>(s)]; ++i) {
        out << "{\"pair_kind\":\"" << chem::pair_kind_name(ref.kind) << "\",\"left\":\"l/"
            << serial << "\",\"right\":\"r/" << serial << "\",\"split\":\"" << split << "\"}\n";
        ++serial;
      }
    }
    const fs::path path = root / (chem::pair_kind_name(ref.kind) + ".jsonl");
    write_text_file(path, out.str());
    manifests.push_back(chem::parse_manifest(path));
  }

  const auto full = chem::check_m4_counts(manifests);
  bool ok = full.complete;

  // a mismatch is reported, never fatal
  manifests[0].entries.pop_back();
  const auto off = chem::check_m4_counts(manifests);
  ok = ok && !off.complete && !off.checks[0].matches && off.checks[1].matches;

  std::ostringstream detail;
  detail << (full.complete ? "reference counts validate" : "reference counts rejected")
         << "; mismatch " << (off.complete ? "missed" : "reported non-fatally");
  report(9, "manifest conformance at reference corpus counts", ok, detail.str());
  fs::remove_all(root);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  num::set_finite_checks(true);

  auto want = [&](int criterion) { return only == 0 || only == criterion; };

  if (want(1)) criterion_gradients();
  if (want(2)) criterion_invariances();
  if (want(3)) criterion_closed_form();
  if (want(4)) criterion_overfit();

  if (want(5) || want(6) || want(7)) {
    // one dataset serves the desk-scale run and the ablation grid
    if (want(5)) {
      DeskRun run = run_desk_scale();
      criterion_desk_scale(run);
      if (want(6) || want(7)) criteria_emergence_and_chance(run.data);
    } else {
      chem::SyntheticConfig scfg;
      scfg.n_samples = 2000;
      scfg.latent_dim = 8;
      scfg.noise_sigma = 0.05;
      scfg.seed = 1;
      auto dataset = chem::generate_synthetic_m4(scfg);
      auto data = chem::DataStore::from_synthetic(dataset);
      criteria_emergence_and_chance(data);
    }
  }

  if (want(8)) criterion_cli_determinism();
  if (want(9)) criterion_manifest_conformance();

  for (const auto& line : g_notes) std::cout << "[note] " << line << std::endl;
  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(g_failures) + " criterion(s) failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
