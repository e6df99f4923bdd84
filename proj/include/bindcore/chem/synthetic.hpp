#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bindcore/chem/manifest.hpp"
#include "bindcore/chem/types.hpp"

namespace bindcore::chem {

// Four-modality dataset grown from one latent vector per sample. Every
// rendering is a pure function of the (optionally noised) latent, so a fixed
// seed reproduces the dataset bit for bit.
struct SyntheticConfig {
  int n_samples = 2000;
  int latent_dim = 8;        // 2..8; each component marks its own atom type
  double noise_sigma = 0.05; // per-modality additive latent noise
  std::uint64_t seed = 1;
};

struct SyntheticSample {
  std::string id;
  std::vector<double> latent;
  Split split = Split::Pretrain;
  std::string text;
  MoleculeGraph graph;
  Conformation conformation;
  PocketStructure pocket;
  // Noised latents per modality (language, graph, conformation, pocket);
  // the retrieval ceiling oracle works on these.
  std::array<std::vector<double>, 4> rendered_latents;
};

struct SyntheticDataset {
  SyntheticConfig config;
  std::vector<SyntheticSample> samples;
  std::vector<PairManifest> manifests;  // one per kind, order of kAllPairKinds

  const PairManifest& manifest(PairKind kind) const;
};

inline constexpr int kLatentBuckets = 16;

int latent_bucket(double v);  // clamp to [-1, 1], quantize into kLatentBuckets

// Deterministic injective renderings of one latent vector.
std::string render_text(std::span<const double> z);
MoleculeGraph render_graph(std::span<const double> z);
Conformation render_conformation(std::span<const double> z);
PocketStructure render_pocket(std::span<const double> z);

SyntheticDataset generate_synthetic_m4(const SyntheticConfig& config);

// Lays out texts/, graphs/, conformations/, pockets/, the four .jsonl
// manifests and provenance.json under dir.
void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace bindcore::chem
