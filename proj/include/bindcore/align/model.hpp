#pragma once

#include <cstdint>
#include <string>

#include "bindcore/chem/datastore.hpp"
#include "bindcore/chem/manifest.hpp"
#include "bindcore/chem/tokenizer.hpp"
#include "bindcore/enc/gin_encoder.hpp"
#include "bindcore/enc/projection.hpp"
#include "bindcore/enc/text_encoder.hpp"
#include "bindcore/enc/unimol_encoder.hpp"
#include "bindcore/num/adam.hpp"

namespace bindcore::align {

struct ModelConfig {
  int embed_dim = 64;  // shared projection width D
  enc::TextEncoderConfig text;
  enc::GraphEncoderConfig graph;
  enc::UniMolConfig conformation;
  enc::UniMolConfig pocket;
  chem::Vocabulary vocab;
  bool learnable_temperature = false;

  static ModelConfig desk_scale(chem::Vocabulary vocab);
};

// The four encoders, their projection heads, and one optimizer state per
// encoder+head group. Move-only: parameter tensors share storage.
struct JointModel {
  ModelConfig config;
  std::uint64_t seed = 0;

  enc::TextEncoderParams text;
  enc::GraphEncoderParams graph;
  enc::UniMolEncoderParams conformation;
  enc::UniMolEncoderParams pocket;

  enc::ProjectionHead head_text;
  enc::ProjectionHead head_graph;
  enc::ProjectionHead head_conformation;
  enc::ProjectionHead head_pocket;

  num::Tensor log_tau;  // used only when learnable_temperature

  // Each set holds one encoder's parameters plus its head; the shared set
  // holds loss-level parameters (log_tau) and is stepped on every batch.
  num::ParamSet params_text, params_graph, params_conformation, params_pocket, params_shared;
  num::AdamState adam_text, adam_graph, adam_conformation, adam_pocket, adam_shared;

  JointModel() = default;
  JointModel(const JointModel&) = delete;
  JointModel& operator=(const JointModel&) = delete;
  JointModel(JointModel&&) = default;
  JointModel& operator=(JointModel&&) = default;

  static JointModel init(ModelConfig config, std::uint64_t seed);

  // Encode + project one record into the shared space, [D].
  num::Tensor embed_text(const chem::TokenSequence& seq) const;
  num::Tensor embed_graph(const chem::MoleculeGraph& g) const;
  num::Tensor embed_conformation(const chem::Conformation& c) const;
  num::Tensor embed_pocket(const chem::PocketStructure& p) const;
  num::Tensor embed_record(chem::Modality modality, const chem::DataStore& data,
                           const std::string& ref) const;

  num::ParamSet& params_for(chem::Modality modality);
  num::AdamState& adam_for(chem::Modality modality);

  // Keeps kernel widths positive after optimizer steps.
  void clamp_kernel_sigmas(double floor = 1e-3);
};

}  // namespace bindcore::align
