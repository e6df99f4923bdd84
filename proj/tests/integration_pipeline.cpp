#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "bindcore/align/checkpoint.hpp"
#include "bindcore/chem/datastore.hpp"
#include "bindcore/common/io.hpp"
#include "bindcore/eval/zero_shot.hpp"
#include "bindcore/num/rng.hpp"

namespace fs = std::filesystem;
using namespace bindcore;
using json = nlohmann::json;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

std::string cli_path() {
  const char* bin = std::getenv("BINDCORE_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "BINDCORE_BIN must point at the CLI binary");
  return bin;
}

CommandResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
    result.output.append(buf, n);
    if (n < sizeof(buf)) break;
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("bindcore-it-" + std::to_string(num::Rng(std::random_device{}()).next_u64() % 100000));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// One tree hash over relative paths and file bytes.
std::uint64_t tree_hash(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0;
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, root).string();
    h = num::hash_combine(h, num::hash_bytes(rel.data(), rel.size()));
    const std::string bytes = read_text_file(f);
    h = num::hash_combine(h, num::hash_bytes(bytes.data(), bytes.size()));
  }
  return h;
}

const std::string kTrainArgs =
    " --batch-size 16 --max-epochs 60 --patience 15 --seed 5";

}  // namespace

TEST_CASE("pipeline: synth, train, eval, embed, ablate through the CLI") {
  const fs::path root = scratch_dir();
  const fs::path data = root / "data";

  // --- synth: deterministic tree, usage errors ---------------------------
  auto synth = run_cli("synth --out " + data.string() + " --n 400 --latent-dim 4 --seed 3");
  REQUIRE_MESSAGE(synth.exit_code == 0, synth.output);
  for (const char* m :
       {"language-graph.jsonl", "language-conformation.jsonl", "graph-conformation.jsonl",
        "conformation-protein.jsonl"}) {
    CHECK(fs::exists(data / m));
  }

  const fs::path data2 = root / "data2";
  auto synth2 = run_cli("synth --out " + data2.string() + " --n 400 --latent-dim 4 --seed 3");
  REQUIRE(synth2.exit_code == 0);
  CHECK(tree_hash(data) == tree_hash(data2));

  auto synth_bad = run_cli("synth --out " + (root / "bad").string() + " --n 1");
  CHECK(synth_bad.exit_code == 2);

  // --- train: one pair kind ----------------------------------------------
  const fs::path run = root / "run-lg";
  auto train = run_cli("train --data " + data.string() + " --pairs language-graph --run-dir " +
                       run.string() + kTrainArgs);
  REQUIRE_MESSAGE(train.exit_code == 0, train.output);
  CHECK(fs::exists(run / "best.ckpt"));
  CHECK(fs::exists(run / "last.ckpt"));
  CHECK(fs::exists(run / "metrics.jsonl"));
  CHECK(fs::exists(run / "config.toml"));
  CHECK(fs::exists(run / "vocab.txt"));

  // rerun refuses without --overwrite
  auto again = run_cli("train --data " + data.string() + " --pairs language-graph --run-dir " +
                       run.string() + kTrainArgs);
  CHECK(again.exit_code == 2);
  auto forced = run_cli("train --data " + data.string() + " --pairs language-graph --run-dir " +
                        run.string() + " --overwrite" + kTrainArgs);
  CHECK(forced.exit_code == 0);

  // --- metrics: validation recall improves and ends high ------------------
  double best_val = -1.0;
  int best_epoch = 0;
  double first_val = -1.0;
  {
    std::istringstream in(read_text_file(run / "metrics.jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      CHECK(rec.contains("epoch"));
      CHECK(rec.contains("pair_kind"));
      CHECK(rec.contains("loss"));
      const double v = rec["val_recall_at_1"].get<double>();
      if (first_val < 0.0) first_val = v;
      if (v > best_val) {
        best_val = v;
        best_epoch = rec["epoch"].get<int>();
      }
    }
  }
  CHECK(best_val >= first_val);
  CHECK(best_val > 70.0);  // 40 validation candidates, chance 2.5%
  (void)best_epoch;

  // --- eval reproduces the logged best validation number -------------------
  auto eval_l2g = run_cli("eval --ckpt " + (run / "best.ckpt").string() + " --data " +
                          data.string() + " --direction l2g --mode full --split validation");
  REQUIRE_MESSAGE(eval_l2g.exit_code == 0, eval_l2g.output);
  auto eval_g2l = run_cli("eval --ckpt " + (run / "best.ckpt").string() + " --data " +
                          data.string() + " --direction g2l --mode full --split validation");
  REQUIRE(eval_g2l.exit_code == 0);
  const double l2g = json::parse(eval_l2g.output)["recall"]["1"].get<double>();
  const double g2l = json::parse(eval_g2l.output)["recall"]["1"].get<double>();
  CHECK(std::abs(0.5 * (l2g + g2l) - best_val) < 1e-9);
  CHECK(json::parse(eval_l2g.output)["mode"] == "full");
  CHECK(fs::exists(run / "eval_l2g_full_validation.json"));

  auto eval_bad = run_cli("eval --ckpt " + (run / "best.ckpt").string() + " --data " +
                          data.string() + " --direction x2y");
  CHECK(eval_bad.exit_code == 2);

  const fs::path corrupt = root / "corrupt.ckpt";
  write_text_file(corrupt, "{\"format_version\": 99}");
  auto eval_corrupt = run_cli("eval --ckpt " + corrupt.string() + " --data " + data.string() +
                              " --direction l2g");
  CHECK(eval_corrupt.exit_code == 3);

  // --- embed ---------------------------------------------------------------
  const auto manifest = chem::parse_manifest(data / "language-graph.jsonl");
  const std::string graph_ref = manifest.entries.front().right;
  auto embed = run_cli("embed --ckpt " + (run / "best.ckpt").string() + " --input " +
                       (data / graph_ref).string() + " --modality graph");
  REQUIRE_MESSAGE(embed.exit_code == 0, embed.output);
  const json e = json::parse(embed.output);
  CHECK(e["dim"].get<int>() == 64);
  double norm_sq = 0.0;
  for (double v : e["embedding"].get<std::vector<double>>()) norm_sq += v * v;
  CHECK(std::abs(std::sqrt(norm_sq) - 1.0) < 1e-6);

  auto embed_bad = run_cli("embed --ckpt " + (run / "best.ckpt").string() + " --input " +
                           (data / graph_ref).string() + " --modality conformation");
  CHECK(embed_bad.exit_code == 3);  // sdf fed to the xyz parser

  // --- zero-shot classification on the trained checkpoint -------------------
  {
    align::JointModel model = align::load_checkpoint(run / "best.ckpt");
    chem::DataStore store = chem::DataStore::load_with_vocab(
        data, {chem::PairKind::LanguageGraph}, model.config.vocab);
    const auto test_split =
        store.manifest(chem::PairKind::LanguageGraph).filter(chem::Split::Test);
    std::vector<std::string> names;
    for (const auto& entry : test_split.entries) {
      names.push_back(store.text(entry.left).raw_text);
    }
    int hits = 0;
    for (std::size_t i = 0; i < test_split.entries.size(); ++i) {
      const auto probs =
          eval::zero_shot_classify(model, store.graph(test_split.entries[i].right), names, 1.0);
      const auto top = static_cast<std::size_t>(
          std::distance(probs.begin(), std::max_element(probs.begin(), probs.end())));
      hits += top == i;
    }
    const double accuracy = static_cast<double>(hits) / static_cast<double>(names.size());
    const double chance = 1.0 / static_cast<double>(names.size());
    CHECK(accuracy > 10.0 * chance);
  }

  // --- omitted --pairs trains all four kinds ---------------------------------
  {
    const fs::path run_all = root / "run-all";
    auto all = run_cli("train --data " + data.string() + " --run-dir " + run_all.string() +
                       " --batch-size 16 --max-epochs 1 --seed 2");
    REQUIRE_MESSAGE(all.exit_code == 0, all.output);
    const std::string metrics = read_text_file(run_all / "metrics.jsonl");
    for (const char* kind : {"language-graph", "language-conformation", "graph-conformation",
                             "conformation-protein"}) {
      CHECK(metrics.find(kind) != std::string::npos);
    }
  }

  // --- determinism: identical seeded runs, identical artifacts --------------
  const fs::path run_a = root / "det-a";
  const fs::path run_b = root / "det-b";
  const std::string det_args = " --embed-dim 16 --batch-size 8 --max-epochs 2 --seed 17";
  auto det_a = run_cli("train --data " + data.string() + " --pairs conformation-protein --run-dir " +
                       run_a.string() + det_args);
  auto det_b = run_cli("train --data " + data.string() + " --pairs conformation-protein --run-dir " +
                       run_b.string() + det_args);
  REQUIRE(det_a.exit_code == 0);
  REQUIRE(det_b.exit_code == 0);
  CHECK(read_text_file(run_a / "metrics.jsonl") == read_text_file(run_b / "metrics.jsonl"));
  CHECK(read_text_file(run_a / "best.ckpt") == read_text_file(run_b / "best.ckpt"));
  CHECK(read_text_file(run_a / "last.ckpt") == read_text_file(run_b / "last.ckpt"));

  // --- ablate: tiny two-row grid --------------------------------------------
  const fs::path grid = root / "grid.txt";
  write_text_file(grid,
                  "language-graph\n"
                  "language-graph+graph-conformation\n");
  const fs::path csv = root / "ablation.csv";
  auto ablate = run_cli("ablate --data " + data.string() + " --grid " + grid.string() + " --out " +
                        csv.string() + " --embed-dim 16 --batch-size 16 --max-epochs 2 --seed 9");
  REQUIRE_MESSAGE(ablate.exit_code == 0, ablate.output);
  const std::string csv_text = read_text_file(csv);
  CHECK(csv_text.find("config,l2g_recall_at_1,l2c_recall_at_1,seed") == 0);
  CHECK(csv_text.find("language-graph+graph-conformation") != std::string::npos);
  // rows come out in input order, each recording the base seed
  const auto first_row = csv_text.find("\"language-graph\"");
  const auto second_row = csv_text.find("\"language-graph+graph-conformation\"");
  CHECK(first_row < second_row);
  CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 3);
  CHECK(csv_text.find(",9\n") != std::string::npos);

  const fs::path empty_grid = root / "empty.txt";
  write_text_file(empty_grid, "# nothing\n");
  auto ablate_bad = run_cli("ablate --data " + data.string() + " --grid " + empty_grid.string() +
                            " --out " + csv.string());
  CHECK(ablate_bad.exit_code == 2);

  // --- usage errors ----------------------------------------------------------
  auto no_sub = run_cli("");
  CHECK(no_sub.exit_code == 2);
  auto missing_manifest = run_cli("train --data " + (root / "nowhere").string() + " --run-dir " +
                                  (root / "r").string() + kTrainArgs);
  CHECK(missing_manifest.exit_code == 3);

  fs::remove_all(root);
}
