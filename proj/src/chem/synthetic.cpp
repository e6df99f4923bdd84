#include "bindcore/chem/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bindcore/chem/elements.hpp"
#include "bindcore/chem/parse.hpp"
#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"
#include "bindcore/num/rng.hpp"

namespace bindcore::chem {

namespace {

constexpr int kMaxLatentDim = 8;
constexpr int kBucketTypeBase = 8;        // graph bucket marker types 8..15
constexpr int kConformationCenterType = 12;
constexpr int kPocketCenterType = 13;

// Eight well-spread unit directions (normalized cube corners), one per
// latent dimension.
std::array<double, 3> direction(int k) {
  static const double s = 1.0 / std::sqrt(3.0);
  static const std::array<std::array<double, 3>, 8> dirs = {{
      {s, s, s}, {s, s, -s}, {s, -s, s}, {s, -s, -s},
      {-s, s, s}, {-s, s, -s}, {-s, -s, s}, {-s, -s, -s},
  }};
  return dirs[static_cast<std::size_t>(k)];
}

// Uniform random rotation derived from the latent bytes, so identical latents
// give identical embeddings in space.
std::array<std::array<double, 3>, 3> rotation_from_latent(std::span<const double> z,
                                                          std::uint64_t salt) {
  const std::uint64_t h =
      num::hash_bytes(z.data(), z.size_bytes(), 0x5eedf00d ^ salt);
  num::Rng rng(h);
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double two_pi = 2.0 * 3.14159265358979323846;
  const double qx = std::sqrt(1.0 - u1) * std::sin(two_pi * u2);
  const double qy = std::sqrt(1.0 - u1) * std::cos(two_pi * u2);
  const double qz = std::sqrt(u1) * std::sin(two_pi * u3);
  const double qw = std::sqrt(u1) * std::cos(two_pi * u3);
  return {{
      {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)},
      {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)},
      {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)},
  }};
}

std::array<double, 3> rotate(const std::array<std::array<double, 3>, 3>& r,
                             const std::array<double, 3>& v) {
  return {r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
          r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
          r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2]};
}

void check_latent_dim(std::span<const double> z) {
  if (z.size() < 2 || z.size() > kMaxLatentDim) {
    throw ConfigError("latent_dim must be in [2, " + std::to_string(kMaxLatentDim) +
                      "], got " + std::to_string(z.size()));
  }
}

std::string sample_ref(const char* dir, const std::string& id, const char* ext) {
  return std::string(dir) + "/" + id + ext;
}

}  // namespace

int latent_bucket(double v) {
  double c = std::clamp(v, -1.0, 1.0);
  int b = static_cast<int>(std::floor((c + 1.0) * 0.5 * kLatentBuckets));
  return std::clamp(b, 0, kLatentBuckets - 1);
}

std::string render_text(std::span<const double> z) {
  check_latent_dim(z);
  // Coarse and fine tokens per dimension: the coarse vocabulary is four times
  // denser across samples, which speeds up contrastive learning, while the
  // fine token carries the full bucket resolution. The prefix wording varies
  // so the signature tokens appear at several offsets and the encoder cannot
  // entangle token identity with absolute position.
  static const std::array<const char*, 4> prefixes = {
      "signature",
      "molecule with signature",
      "a compound carrying signature",
      "the molecule has the signature",
  };
  const std::uint64_t h = num::hash_bytes(z.data(), z.size_bytes(), 0x7e47);
  std::ostringstream out;
  out << prefixes[static_cast<std::size_t>(h % prefixes.size())];
  char buf[48];
  for (std::size_t k = 0; k < z.size(); ++k) {
    const int bucket = latent_bucket(z[k]);
    std::snprintf(buf, sizeof(buf), " d%uc%d d%ub%02d", static_cast<unsigned>(k), bucket / 4,
                  static_cast<unsigned>(k), bucket);
    out << buf;
  }
  return out.str();
}

// One motif per latent dimension: the anchor atom type names the dimension,
// the partner type carries three bucket bits, chain-vs-ring carries the
// fourth. Rings use aromatic bonds, chains single bonds.
MoleculeGraph render_graph(std::span<const double> z) {
  check_latent_dim(z);
  MoleculeGraph g;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const int q = latent_bucket(z[k]);
    const bool ring = q >= kLatentBuckets / 2;
    const int partner = kBucketTypeBase + (q % (kLatentBuckets / 2));
    const int base = g.num_atoms();
    if (ring) {
      g.atom_types.insert(g.atom_types.end(), {static_cast<int>(k), partner, partner});
      g.bonds.push_back({base, base + 1, 4});
      g.bonds.push_back({base + 1, base + 2, 4});
      g.bonds.push_back({base + 2, base, 4});
    } else {
      g.atom_types.insert(g.atom_types.end(), {static_cast<int>(k), partner});
      g.bonds.push_back({base, base + 1, 1});
    }
  }
  g.validate();
  return g;
}

// Star of typed atoms around a center: the distance of atom k from the center
// encodes z_k on [2, 4] Å. All geometry information lives in the distance
// signature, so a random rigid placement loses nothing.
Conformation render_conformation(std::span<const double> z) {
  check_latent_dim(z);
  const auto rot = rotation_from_latent(z, 0xc0f0);
  Conformation c;
  c.atom_types.push_back(kConformationCenterType);
  c.coords.push_back({0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double r = 2.25 + 0.5 * (std::clamp(z[k], -1.5, 1.5) + 1.0);
    const auto u = direction(static_cast<int>(k));
    c.atom_types.push_back(static_cast<int>(k));
    c.coords.push_back(rotate(rot, {r * u[0], r * u[1], r * u[2]}));
  }
  c.validate();
  return c;
}

// Complementary radial signature: radius grows where the conformation's
// shrinks, like a cavity fitting the molecule.
PocketStructure render_pocket(std::span<const double> z) {
  check_latent_dim(z);
  const auto rot = rotation_from_latent(z, 0x90c7e7);
  PocketStructure p;
  p.atom_types.push_back(kPocketCenterType);
  p.coords.push_back({0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double r = 2.25 + 0.5 * (1.0 - std::clamp(z[k], -1.5, 1.5));
    const auto u = direction(static_cast<int>(k));
    p.atom_types.push_back(static_cast<int>(k));
    p.coords.push_back(rotate(rot, {r * u[0], r * u[1], r * u[2]}));
  }
  p.validate();
  return p;
}

const PairManifest& SyntheticDataset::manifest(PairKind kind) const {
  for (const auto& m : manifests) {
    if (m.kind == kind) return m;
  }
  throw ContractError("SyntheticDataset: no manifest for " + pair_kind_name(kind));
}

SyntheticDataset generate_synthetic_m4(const SyntheticConfig& config) {
  if (config.n_samples < 2) {
    throw ConfigError("generate_synthetic_m4: n_samples must be >= 2 (got " +
                      std::to_string(config.n_samples) + ")");
  }
  if (config.latent_dim < 2 || config.latent_dim > kMaxLatentDim) {
    throw ConfigError("generate_synthetic_m4: latent_dim must be in [2, " +
                      std::to_string(kMaxLatentDim) + "]");
  }
  if (config.noise_sigma < 0.0) {
    throw ConfigError("generate_synthetic_m4: noise_sigma must be >= 0");
  }

  num::Rng master(config.seed);

  SyntheticDataset ds;
  ds.config = config;
  ds.samples.resize(static_cast<std::size_t>(config.n_samples));

  // 80/10/10 split over a seeded permutation; all four pair kinds share the
  // per-sample split so no latent leaks across splits.
  std::vector<int> order(static_cast<std::size_t>(config.n_samples));
  std::iota(order.begin(), order.end(), 0);
  {
    num::Rng split_rng = master.split("splits");
    split_rng.shuffle(order);
  }
  const int n_pretrain = config.n_samples * 8 / 10;
  const int n_val = config.n_samples / 10;
  for (int pos = 0; pos < config.n_samples; ++pos) {
    Split s = pos < n_pretrain              ? Split::Pretrain
              : pos < n_pretrain + n_val    ? Split::Validation
                                            : Split::Test;
    ds.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])].split = s;
  }

  num::Rng latent_rng = master.split("latents");
  num::Rng noise_rng = master.split("noise");
  for (int i = 0; i < config.n_samples; ++i) {
    auto& sample = ds.samples[static_cast<std::size_t>(i)];
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", i);
    sample.id = buf;

    sample.latent.resize(static_cast<std::size_t>(config.latent_dim));
    for (auto& v : sample.latent) v = latent_rng.uniform(-1.0, 1.0);

    for (int m = 0; m < 4; ++m) {
      auto& zm = sample.rendered_latents[static_cast<std::size_t>(m)];
      zm = sample.latent;
      for (auto& v : zm) v += config.noise_sigma * noise_rng.normal();
    }

    sample.text = render_text(sample.rendered_latents[0]);
    sample.graph = render_graph(sample.rendered_latents[1]);
    sample.graph.molecule_id = sample.id;
    sample.conformation = render_conformation(sample.rendered_latents[2]);
    sample.conformation.molecule_id = sample.id;
    sample.pocket = render_pocket(sample.rendered_latents[3]);
    sample.pocket.pocket_id = sample.id;
  }

  for (PairKind kind : kAllPairKinds) {
    PairManifest m;
    m.kind = kind;
    const auto [left_mod, right_mod] = pair_modalities(kind);
    auto ref_of = [](Modality mod, const std::string& id) {
      switch (mod) {
        case Modality::Language: return sample_ref("texts", id, ".txt");
        case Modality::Graph: return sample_ref("graphs", id, ".sdf");
        case Modality::Conformation: return sample_ref("conformations", id, ".xyz");
        case Modality::Pocket: return sample_ref("pockets", id, ".xyz");
      }
      throw ContractError("bad modality");
    };
    for (const auto& sample : ds.samples) {
      m.entries.push_back({ref_of(left_mod, sample.id), ref_of(right_mod, sample.id), sample.split});
    }
    m.validate();
    ds.manifests.push_back(std::move(m));
  }
  return ds;
}

void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  for (const char* sub : {"texts", "graphs", "conformations", "pockets"}) {
    fs::create_directories(dir / sub);
  }
  for (const auto& sample : dataset.samples) {
    write_text_file(dir / "texts" / (sample.id + ".txt"), sample.text + "\n");
    write_text_file(dir / "graphs" / (sample.id + ".sdf"), write_sdf(sample.graph));
    write_text_file(dir / "conformations" / (sample.id + ".xyz"), write_xyz(sample.conformation));
    write_text_file(dir / "pockets" / (sample.id + ".xyz"), write_pocket_xyz(sample.pocket));
  }
  for (const auto& m : dataset.manifests) {
    write_text_file(dir / (pair_kind_name(m.kind) + ".jsonl"), write_manifest(m));
  }
  nlohmann::json prov;
  prov["generator"] = "bindcore-synth-v1";
  prov["seed"] = dataset.config.seed;
  prov["n_samples"] = dataset.config.n_samples;
  prov["latent_dim"] = dataset.config.latent_dim;
  prov["noise_sigma"] = dataset.config.noise_sigma;
  write_text_file(dir / "provenance.json", prov.dump(2) + "\n");
}

}  // namespace bindcore::chem
