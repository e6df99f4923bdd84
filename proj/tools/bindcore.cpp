// bindcore: synthesize four-modality datasets, train the shared embedding
// space, and evaluate retrieval, zero-shot classification, and ablations.

#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bindcore/align/checkpoint.hpp"
#include "bindcore/align/trainer.hpp"
#include "bindcore/chem/parse.hpp"
#include "bindcore/chem/synthetic.hpp"
#include "bindcore/cli/run_config.hpp"
#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"
#include "bindcore/eval/ablation.hpp"
#include "bindcore/eval/retrieval.hpp"
#include "bindcore/eval/zero_shot.hpp"

namespace fs = std::filesystem;
using namespace bindcore;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitContract = 4;

struct CommonTrainFlags {
  std::string config_file;
  std::optional<std::int64_t> seed;
  std::optional<int> batch_size;
  std::optional<int> max_epochs;
  std::optional<double> lr;
  std::optional<double> temperature;
  std::optional<int> patience;
  std::optional<int> embed_dim;
};

void add_train_flags(CLI::App* cmd, CommonTrainFlags& flags) {
  cmd->add_option("--config", flags.config_file, "TOML config file (flags override file values)");
  cmd->add_option("--seed", flags.seed, "RNG seed");
  cmd->add_option("--batch-size", flags.batch_size, "contrastive batch size");
  cmd->add_option("--max-epochs", flags.max_epochs, "maximum training epochs");
  cmd->add_option("--lr", flags.lr, "Adam learning rate");
  cmd->add_option("--temperature", flags.temperature, "contrastive temperature");
  cmd->add_option("--patience", flags.patience, "early-stop patience in epochs");
  cmd->add_option("--embed-dim", flags.embed_dim, "shared embedding width");
}

cli::RunConfig resolve_config(const CommonTrainFlags& flags) {
  cli::RunConfig cfg;
  if (!flags.config_file.empty()) {
    cfg.apply_file(cli::parse_toml(read_text_file(flags.config_file), flags.config_file));
  }
  if (flags.seed) cfg.seed = static_cast<std::uint64_t>(*flags.seed);
  if (flags.batch_size) cfg.batch_size = *flags.batch_size;
  if (flags.max_epochs) cfg.max_epochs = *flags.max_epochs;
  if (flags.lr) cfg.lr = *flags.lr;
  if (flags.temperature) cfg.temperature = *flags.temperature;
  if (flags.patience) cfg.patience = *flags.patience;
  if (flags.embed_dim) cfg.embed_dim = *flags.embed_dim;
  return cfg;
}

std::vector<chem::PairKind> parse_pairs(const std::vector<std::string>& names) {
  if (names.empty()) {
    return {chem::kAllPairKinds.begin(), chem::kAllPairKinds.end()};
  }
  std::vector<chem::PairKind> kinds;
  for (const auto& name : names) {
    try {
      kinds.push_back(chem::pair_kind_from_name(name));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }
  return kinds;
}

fs::path default_run_dir(std::uint64_t seed) {
  const char* root = std::getenv("BINDCORE_RUN_ROOT");
  return fs::path(root != nullptr ? root : "runs") / ("run-" + std::to_string(seed));
}

void write_run_meta(const fs::path& run_dir, const std::string& command) {
  nlohmann::json meta;
  meta["command"] = command;
  meta["created_unix"] = static_cast<std::int64_t>(std::time(nullptr));
  write_text_file(run_dir / "meta.json", meta.dump(2) + "\n");
}

// ---- synth -------------------------------------------------------------

int cmd_synth(const std::string& out_dir, int n, int latent_dim, double noise,
              std::uint64_t seed) {
  chem::SyntheticConfig cfg;
  cfg.n_samples = n;
  cfg.latent_dim = latent_dim;
  cfg.noise_sigma = noise;
  cfg.seed = seed;
  const chem::SyntheticDataset ds = chem::generate_synthetic_m4(cfg);
  chem::write_dataset(ds, out_dir);
  std::cout << "wrote " << ds.samples.size() << " samples and " << ds.manifests.size()
            << " manifests to " << out_dir << "\n";
  return kExitOk;
}

// ---- train -------------------------------------------------------------

int cmd_train(const std::string& data_dir, const std::vector<std::string>& pair_names,
              const CommonTrainFlags& flags, std::string run_dir_arg, bool overwrite) {
  const cli::RunConfig cfg = resolve_config(flags);
  const auto pairs = parse_pairs(pair_names);

  fs::path run_dir = run_dir_arg.empty() ? default_run_dir(cfg.seed) : fs::path(run_dir_arg);
  if (fs::exists(run_dir / "metrics.jsonl") || fs::exists(run_dir / "last.ckpt")) {
    if (!overwrite) {
      throw ConfigError("run directory " + run_dir.string() +
                        " already holds a run; pass --overwrite to replace it");
    }
  }
  fs::create_directories(run_dir);

  chem::DataStore data = chem::DataStore::load(data_dir, pairs, cfg.vocab_min_freq);
  align::JointModel model = align::JointModel::init(cfg.model(data.vocab()), cfg.seed);

  write_text_file(run_dir / "config.toml", cli::dump_toml(cfg.to_table()));
  write_text_file(run_dir / "vocab.txt", data.vocab().serialize());
  write_run_meta(run_dir, "train");

  const align::TrainResult result = align::train(model, data, cfg.alignment(pairs), run_dir);
  std::cout << "trained " << result.epochs_run << " epochs; best mean validation R@1 "
            << result.best_val << "% at epoch " << result.best_epoch << "\n"
            << "checkpoints: " << (run_dir / "best.ckpt").string() << ", "
            << (run_dir / "last.ckpt").string() << "\n";
  return kExitOk;
}

// ---- eval --------------------------------------------------------------

struct Direction {
  chem::PairKind kind;
  bool query_left;
};

Direction direction_from_flag(const std::string& name) {
  if (name == "g2l") return {chem::PairKind::LanguageGraph, false};
  if (name == "l2g") return {chem::PairKind::LanguageGraph, true};
  if (name == "c2l") return {chem::PairKind::LanguageConformation, false};
  if (name == "l2c") return {chem::PairKind::LanguageConformation, true};
  if (name == "c2p") return {chem::PairKind::ConformationProtein, true};
  if (name == "p2c") return {chem::PairKind::ConformationProtein, false};
  throw ConfigError("unknown direction '" + name + "' (use g2l,l2g,c2l,l2c,c2p,p2c)");
}

int cmd_eval(const std::string& ckpt, const std::string& data_dir, const std::string& direction,
             const std::string& mode, const std::string& split) {
  const Direction dir = direction_from_flag(direction);

  align::JointModel model = align::load_checkpoint(ckpt);
  chem::DataStore data =
      chem::DataStore::load_with_vocab(data_dir, {dir.kind}, model.config.vocab);

  eval::RetrievalOptions options;
  if (mode == "batch") options.mode = eval::RetrievalMode::InBatch;
  else if (mode == "full") options.mode = eval::RetrievalMode::FullSet;
  else throw ConfigError("unknown mode '" + mode + "' (use batch or full)");
  options.split = chem::split_from_name(split);
  options.query_left = dir.query_left;

  const eval::RetrievalReport report = eval::evaluate_retrieval(model, data, dir.kind, options);
  const std::string json = report.to_json();
  std::cout << json << "\n";

  const fs::path out = fs::path(ckpt).parent_path() /
                       ("eval_" + direction + "_" + mode + "_" + split + ".json");
  write_text_file(out, json + "\n");
  return kExitOk;
}

// ---- ablate ------------------------------------------------------------

std::vector<eval::AblationRowSpec> parse_grid(const std::string& text) {
  std::vector<eval::AblationRowSpec> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    eval::AblationRowSpec row;
    row.label = line;
    std::istringstream parts(line);
    std::string name;
    while (std::getline(parts, name, '+')) {
      try {
        row.pairs.push_back(chem::pair_kind_from_name(name));
      } catch (const DataError& e) {
        throw ConfigError(std::string("grid line '") + line + "': " + e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("ablation grid is empty");
  return rows;
}

int cmd_ablate(const std::string& data_dir, const std::string& grid_file,
               const std::string& out_csv, const CommonTrainFlags& flags) {
  const cli::RunConfig cfg = resolve_config(flags);
  const auto rows = parse_grid(read_text_file(grid_file));

  std::vector<chem::PairKind> kinds{chem::kAllPairKinds.begin(), chem::kAllPairKinds.end()};
  chem::DataStore data = chem::DataStore::load(data_dir, kinds, cfg.vocab_min_freq);

  const auto results =
      eval::ablation_run(data, rows, cfg.model(data.vocab()), cfg.alignment(kinds));
  const std::string csv = eval::ablation_csv(results);
  write_text_file(out_csv, csv);
  std::cout << csv;
  return kExitOk;
}

// ---- embed -------------------------------------------------------------

int cmd_embed(const std::string& ckpt, const std::string& input, const std::string& modality) {
  align::JointModel model = align::load_checkpoint(ckpt);
  const std::string text = read_text_file(input);

  num::Tensor embedding;
  if (modality == "language") {
    std::string raw = text;
    while (!raw.empty() && (raw.back() == '\n' || raw.back() == '\r')) raw.pop_back();
    embedding = model.embed_text(chem::tokenize(model.config.vocab, raw));
  } else if (modality == "graph") {
    embedding = model.embed_graph(chem::parse_sdf_subset(text));
  } else if (modality == "conformation") {
    embedding = model.embed_conformation(chem::parse_xyz(text));
  } else if (modality == "pocket") {
    embedding = model.embed_pocket(chem::parse_pocket_xyz(text));
  } else {
    throw ConfigError("unknown modality '" + modality +
                      "' (use language, graph, conformation, pocket)");
  }

  nlohmann::json j;
  j["modality"] = modality;
  j["dim"] = embedding.dim(0);
  j["embedding"] = embedding.values();
  std::cout << j.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bindcore: multi-modal contrastive alignment for molecules"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic four-modality dataset");
  std::string synth_out = "data";
  int synth_n = 2000;
  int synth_latent = 8;
  double synth_noise = 0.05;
  std::int64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--n", synth_n, "number of samples");
  synth->add_option("--latent-dim", synth_latent, "latent dimensionality (2..8)");
  synth->add_option("--noise", synth_noise, "per-modality latent noise sigma");
  synth->add_option("--seed", synth_seed, "generator seed");

  // train
  auto* train = app.add_subcommand("train", "train the joint embedding space");
  std::string train_data;
  std::vector<std::string> train_pairs;
  std::string train_run_dir;
  bool train_overwrite = false;
  CommonTrainFlags train_flags;
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--pairs", train_pairs, "active pair kinds (default: all four)")
      ->delimiter(',');
  train->add_option("--run-dir", train_run_dir, "run directory (default: $BINDCORE_RUN_ROOT)");
  train->add_flag("--overwrite", train_overwrite, "replace an existing run directory");
  add_train_flags(train, train_flags);

  // eval
  auto* evalc = app.add_subcommand("eval", "evaluate cross-modal retrieval");
  std::string eval_ckpt, eval_data, eval_direction, eval_mode = "full", eval_split = "test";
  evalc->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  evalc->add_option("--data", eval_data, "dataset directory")->required();
  evalc->add_option("--direction", eval_direction, "g2l,l2g,c2l,l2c,c2p,p2c")->required();
  evalc->add_option("--mode", eval_mode, "batch or full");
  evalc->add_option("--split", eval_split, "validation or test");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train one model per pair-kind configuration");
  std::string ablate_data, ablate_grid, ablate_out;
  CommonTrainFlags ablate_flags;
  ablate->add_option("--data", ablate_data, "dataset directory")->required();
  ablate->add_option("--grid", ablate_grid, "grid file, one configuration per line")->required();
  ablate->add_option("--out", ablate_out, "output CSV path")->required();
  add_train_flags(ablate, ablate_flags);

  // embed
  auto* embed = app.add_subcommand("embed", "embed one record into the shared space");
  std::string embed_ckpt, embed_input, embed_modality;
  embed->add_option("--ckpt", embed_ckpt, "checkpoint file")->required();
  embed->add_option("--input", embed_input, "record file (.txt/.sdf/.xyz)")->required();
  embed->add_option("--modality", embed_modality, "language, graph, conformation, pocket")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(synth_out, synth_n, synth_latent, synth_noise,
                       static_cast<std::uint64_t>(synth_seed));
    }
    if (train->parsed()) {
      return cmd_train(train_data, train_pairs, train_flags, train_run_dir, train_overwrite);
    }
    if (evalc->parsed()) {
      return cmd_eval(eval_ckpt, eval_data, eval_direction, eval_mode, eval_split);
    }
    if (ablate->parsed()) {
      return cmd_ablate(ablate_data, ablate_grid, ablate_out, ablate_flags);
    }
    if (embed->parsed()) {
      return cmd_embed(embed_ckpt, embed_input, embed_modality);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ContractError& e) {
    std::cerr << "internal contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitUsage;
}
