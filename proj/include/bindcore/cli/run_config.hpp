#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bindcore/align/trainer.hpp"

namespace bindcore::cli {

using TomlValue = std::variant<bool, std::int64_t, double, std::string>;

// Flat TOML subset: `key = value` lines, # comments, quoted strings, integers,
// floats, booleans.
std::map<std::string, TomlValue> parse_toml(const std::string& text,
                                            const std::string& source_name);
std::string dump_toml(const std::map<std::string, TomlValue>& table);

// Fully resolved run parameters. Precedence: flags > config file > defaults;
// the resolved copy is written into the run directory.
struct RunConfig {
  std::uint64_t seed = 1;
  double temperature = 1.0;
  int batch_size = 16;
  int max_epochs = 100;
  double lr = 1e-3;
  int patience = 10;
  int embed_dim = 64;
  int text_layers = 2;
  int graph_layers = 2;
  int unimol_layers = 2;
  int heads = 4;
  int max_text_len = 128;
  int vocab_min_freq = 2;
  bool learnable_temperature = false;

  void apply_file(const std::map<std::string, TomlValue>& table);
  std::map<std::string, TomlValue> to_table() const;

  align::AlignmentConfig alignment(const std::vector<chem::PairKind>& pairs) const;
  align::ModelConfig model(chem::Vocabulary vocab) const;
};

}  // namespace bindcore::cli
