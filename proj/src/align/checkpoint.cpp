#include "bindcore/align/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"

namespace bindcore::align {

using json = nlohmann::json;

namespace {

json dump_unimol_config(const enc::UniMolConfig& c) {
  return json{{"hidden", c.hidden}, {"layers", c.layers},   {"heads", c.heads},
              {"mu_max", c.mu_max}, {"residual", c.residual}, {"pre_norm", c.pre_norm}};
}

enc::UniMolConfig load_unimol_config(const json& j) {
  enc::UniMolConfig c;
  c.hidden = j.at("hidden").get<int>();
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.mu_max = j.at("mu_max").get<double>();
  c.residual = j.at("residual").get<bool>();
  c.pre_norm = j.at("pre_norm").get<bool>();
  return c;
}

json dump_params(const num::ParamSet& set) {
  json blocks = json::array();
  for (const auto& [name, t] : set.entries) {
    blocks.push_back(json{{"name", name}, {"shape", t.shape()}, {"data", t.values()}});
  }
  return blocks;
}

void load_params(const json& blocks, num::ParamSet& set) {
  if (blocks.size() != set.entries.size()) {
    throw DataError("checkpoint: expected " + std::to_string(set.entries.size()) +
                    " parameter blocks, found " + std::to_string(blocks.size()));
  }
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    auto& [name, t] = set.entries[i];
    const json& block = blocks[i];
    if (block.at("name").get<std::string>() != name) {
      throw DataError("checkpoint: parameter block '" + block.at("name").get<std::string>() +
                      "' does not match expected '" + name + "'");
    }
    const auto shape = block.at("shape").get<num::Shape>();
    if (shape != t.shape()) {
      throw DataError("checkpoint: shape mismatch for '" + name + "'");
    }
    auto data = block.at("data").get<std::vector<double>>();
    if (data.size() != t.values().size()) {
      throw DataError("checkpoint: data size mismatch for '" + name + "'");
    }
    t.raw_data() = std::move(data);
  }
}

json dump_adam(const num::AdamState& state) {
  return json{{"t", state.step_count()},
              {"m", state.first_moments()},
              {"v", state.second_moments()}};
}

void load_adam(const json& j, num::AdamState& state) {
  state.restore(j.at("t").get<std::int64_t>(),
                j.at("m").get<std::vector<std::vector<double>>>(),
                j.at("v").get<std::vector<std::vector<double>>>());
}

}  // namespace

std::string serialize_checkpoint(const JointModel& model) {
  json j;
  j["format_version"] = kCheckpointVersion;
  j["seed"] = model.seed;

  json cfg;
  cfg["embed_dim"] = model.config.embed_dim;
  cfg["learnable_temperature"] = model.config.learnable_temperature;
  cfg["text"] = json{{"vocab_size", model.config.text.vocab_size},
                     {"hidden", model.config.text.hidden},
                     {"layers", model.config.text.layers},
                     {"max_len", model.config.text.max_len}};
  cfg["graph"] = json{{"hidden", model.config.graph.hidden},
                      {"layers", model.config.graph.layers}};
  cfg["conformation"] = dump_unimol_config(model.config.conformation);
  cfg["pocket"] = dump_unimol_config(model.config.pocket);
  cfg["vocab"] = model.config.vocab.tokens();
  j["config"] = cfg;

  j["params"] = json{{"text", dump_params(model.params_text)},
                     {"graph", dump_params(model.params_graph)},
                     {"conformation", dump_params(model.params_conformation)},
                     {"pocket", dump_params(model.params_pocket)},
                     {"shared", dump_params(model.params_shared)}};
  j["adam"] = json{{"text", dump_adam(model.adam_text)},
                   {"graph", dump_adam(model.adam_graph)},
                   {"conformation", dump_adam(model.adam_conformation)},
                   {"pocket", dump_adam(model.adam_pocket)},
                   {"shared", dump_adam(model.adam_shared)}};
  return j.dump();
}

JointModel deserialize_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("checkpoint: not valid JSON: ") + e.what());
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw DataError("checkpoint: missing format_version");
  }
  const int version = j["format_version"].get<int>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported format_version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }

  try {
    const json& cfg = j.at("config");
    ModelConfig config;
    config.embed_dim = cfg.at("embed_dim").get<int>();
    config.learnable_temperature = cfg.at("learnable_temperature").get<bool>();
    config.text.vocab_size = cfg.at("text").at("vocab_size").get<int>();
    config.text.hidden = cfg.at("text").at("hidden").get<int>();
    config.text.layers = cfg.at("text").at("layers").get<int>();
    config.text.max_len = cfg.at("text").at("max_len").get<int>();
    config.graph.hidden = cfg.at("graph").at("hidden").get<int>();
    config.graph.layers = cfg.at("graph").at("layers").get<int>();
    config.conformation = load_unimol_config(cfg.at("conformation"));
    config.pocket = load_unimol_config(cfg.at("pocket"));
    config.vocab = chem::Vocabulary::from_tokens(cfg.at("vocab").get<std::vector<std::string>>());

    JointModel model = JointModel::init(std::move(config), j.at("seed").get<std::uint64_t>());
    load_params(j.at("params").at("text"), model.params_text);
    load_params(j.at("params").at("graph"), model.params_graph);
    load_params(j.at("params").at("conformation"), model.params_conformation);
    load_params(j.at("params").at("pocket"), model.params_pocket);
    load_params(j.at("params").at("shared"), model.params_shared);
    load_adam(j.at("adam").at("text"), model.adam_text);
    load_adam(j.at("adam").at("graph"), model.adam_graph);
    load_adam(j.at("adam").at("conformation"), model.adam_conformation);
    load_adam(j.at("adam").at("pocket"), model.adam_pocket);
    load_adam(j.at("adam").at("shared"), model.adam_shared);
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: malformed envelope: ") + e.what());
  }
}

void save_checkpoint(const JointModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_checkpoint(model));
}

JointModel load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_text_file(path));
}

}  // namespace bindcore::align
