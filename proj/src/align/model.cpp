#include "bindcore/align/model.hpp"

#include <algorithm>

#include "bindcore/common/error.hpp"

namespace bindcore::align {

using num::Tensor;

ModelConfig ModelConfig::desk_scale(chem::Vocabulary vocab) {
  ModelConfig cfg;
  cfg.embed_dim = 64;
  cfg.text.vocab_size = vocab.size();
  cfg.text.hidden = 64;
  cfg.text.layers = 2;
  cfg.text.max_len = 128;
  cfg.graph.hidden = 64;
  cfg.graph.layers = 2;
  cfg.conformation.hidden = 64;
  cfg.conformation.layers = 2;
  cfg.conformation.heads = 4;
  cfg.pocket = cfg.conformation;
  cfg.vocab = std::move(vocab);
  return cfg;
}

JointModel JointModel::init(ModelConfig config, std::uint64_t seed) {
  if (config.text.vocab_size != config.vocab.size()) {
    config.text.vocab_size = config.vocab.size();
  }
  JointModel m;
  m.seed = seed;

  num::Rng rng(seed);
  num::Rng rng_text = rng.split("text");
  num::Rng rng_graph = rng.split("graph");
  num::Rng rng_conf = rng.split("conformation");
  num::Rng rng_pocket = rng.split("pocket");
  num::Rng rng_heads = rng.split("heads");

  m.text = enc::TextEncoderParams::init(config.text, rng_text);
  m.graph = enc::GraphEncoderParams::init(config.graph, rng_graph);
  m.conformation = enc::UniMolEncoderParams::init(config.conformation, rng_conf);
  m.pocket = enc::UniMolEncoderParams::init(config.pocket, rng_pocket);

  m.head_text = enc::ProjectionHead::init(config.text.hidden, config.embed_dim, rng_heads);
  m.head_graph = enc::ProjectionHead::init(config.graph.hidden, config.embed_dim, rng_heads);
  m.head_conformation =
      enc::ProjectionHead::init(config.conformation.hidden, config.embed_dim, rng_heads);
  m.head_pocket = enc::ProjectionHead::init(config.pocket.hidden, config.embed_dim, rng_heads);

  m.text.register_params(m.params_text, "text");
  m.head_text.register_params(m.params_text, "head_text");
  m.graph.register_params(m.params_graph, "graph");
  m.head_graph.register_params(m.params_graph, "head_graph");
  m.conformation.register_params(m.params_conformation, "conformation");
  m.head_conformation.register_params(m.params_conformation, "head_conformation");
  m.pocket.register_params(m.params_pocket, "pocket");
  m.head_pocket.register_params(m.params_pocket, "head_pocket");

  if (config.learnable_temperature) {
    m.log_tau = Tensor::variable({}, {0.0});
    m.params_shared.add("log_tau", m.log_tau);
  }

  m.config = std::move(config);
  return m;
}

Tensor JointModel::embed_text(const chem::TokenSequence& seq) const {
  return enc::project(head_text, enc::encode_text(text, seq));
}

Tensor JointModel::embed_graph(const chem::MoleculeGraph& g) const {
  return enc::project(head_graph, enc::encode_graph(graph, g));
}

Tensor JointModel::embed_conformation(const chem::Conformation& c) const {
  return enc::project(head_conformation, enc::encode_conformation(conformation, c));
}

Tensor JointModel::embed_pocket(const chem::PocketStructure& p) const {
  return enc::project(head_pocket, enc::encode_pocket(pocket, p));
}

Tensor JointModel::embed_record(chem::Modality modality, const chem::DataStore& data,
                                const std::string& ref) const {
  switch (modality) {
    case chem::Modality::Language: return embed_text(data.text(ref));
    case chem::Modality::Graph: return embed_graph(data.graph(ref));
    case chem::Modality::Conformation: return embed_conformation(data.conformation(ref));
    case chem::Modality::Pocket: return embed_pocket(data.pocket(ref));
  }
  throw ContractError("embed_record: bad modality");
}

num::ParamSet& JointModel::params_for(chem::Modality modality) {
  switch (modality) {
    case chem::Modality::Language: return params_text;
    case chem::Modality::Graph: return params_graph;
    case chem::Modality::Conformation: return params_conformation;
    case chem::Modality::Pocket: return params_pocket;
  }
  throw ContractError("params_for: bad modality");
}

num::AdamState& JointModel::adam_for(chem::Modality modality) {
  switch (modality) {
    case chem::Modality::Language: return adam_text;
    case chem::Modality::Graph: return adam_graph;
    case chem::Modality::Conformation: return adam_conformation;
    case chem::Modality::Pocket: return adam_pocket;
  }
  throw ContractError("adam_for: bad modality");
}

void JointModel::clamp_kernel_sigmas(double floor) {
  for (enc::UniMolEncoderParams* p : {&conformation, &pocket}) {
    for (double& s : p->kernel_sigma.raw_data()) s = std::max(s, floor);
  }
}

}  // namespace bindcore::align
