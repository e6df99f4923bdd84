#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "bindcore/align/checkpoint.hpp"
#include "bindcore/align/trainer.hpp"
#include "bindcore/chem/synthetic.hpp"
#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"
#include "testutil.hpp"

using namespace bindcore;

namespace {

align::JointModel make_model(std::uint64_t seed) {
  chem::Vocabulary vocab = chem::Vocabulary::build({"alpha beta alpha beta", "gamma gamma"}, 2);
  align::ModelConfig cfg = align::ModelConfig::desk_scale(vocab);
  cfg.embed_dim = 16;
  cfg.text.hidden = 16;
  cfg.text.layers = 1;
  cfg.graph.hidden = 16;
  cfg.graph.layers = 1;
  cfg.conformation.hidden = 16;
  cfg.conformation.layers = 1;
  cfg.conformation.heads = 2;
  cfg.pocket = cfg.conformation;
  return align::JointModel::init(cfg, seed);
}

}  // namespace

TEST_CASE("checkpoint round-trips losslessly") {
  align::JointModel model = make_model(21);
  const std::string blob = align::serialize_checkpoint(model);
  align::JointModel back = align::deserialize_checkpoint(blob);
  CHECK(align::serialize_checkpoint(back) == blob);
  CHECK(back.seed == model.seed);
  CHECK(back.config.vocab.size() == model.config.vocab.size());

  // embeddings agree bit for bit after the round trip
  chem::TokenSequence seq{{1, 0, 1}, "alpha x alpha"};
  CHECK(model.embed_text(seq).values() == back.embed_text(seq).values());
}

TEST_CASE("checkpoint: unknown version and garbage are rejected") {
  align::JointModel model = make_model(22);
  std::string blob = align::serialize_checkpoint(model);
  nlohmann::json j = nlohmann::json::parse(blob);
  j["format_version"] = 999;
  CHECK_THROWS_WITH_AS(align::deserialize_checkpoint(j.dump()), doctest::Contains("999"),
                       DataError);

  CHECK_THROWS_AS(align::deserialize_checkpoint("not json at all"), DataError);
  CHECK_THROWS_AS(align::deserialize_checkpoint("{\"format_version\":1}"), DataError);
}

TEST_CASE("checkpoint: file save/load") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "bindcore-ckpt-test.json";
  align::JointModel model = make_model(23);
  align::save_checkpoint(model, path);
  align::JointModel back = align::load_checkpoint(path);
  CHECK(align::serialize_checkpoint(back) == align::serialize_checkpoint(model));
  fs::remove(path);
}

TEST_CASE("checkpoint preserves optimizer state across a training pause") {
  chem::SyntheticConfig data_cfg;
  data_cfg.n_samples = 24;
  data_cfg.latent_dim = 3;
  data_cfg.seed = 2;
  auto ds = chem::generate_synthetic_m4(data_cfg);
  auto data = chem::DataStore::from_synthetic(ds);

  align::ModelConfig cfg = align::ModelConfig::desk_scale(data.vocab());
  cfg.embed_dim = 16;
  cfg.text.hidden = 16;
  cfg.text.layers = 1;
  cfg.graph.hidden = 16;
  cfg.graph.layers = 1;
  cfg.conformation.hidden = 16;
  cfg.conformation.layers = 1;
  cfg.conformation.heads = 2;
  cfg.pocket = cfg.conformation;
  align::JointModel model = align::JointModel::init(cfg, 31);

  align::AlignmentConfig tcfg;
  tcfg.batch_size = 4;
  const auto pretrain = data.manifest(chem::PairKind::LanguageGraph).filter(chem::Split::Pretrain);
  std::vector<align::BatchItem> batch;
  for (int i = 0; i < 4; ++i) {
    batch.push_back({chem::PairKind::LanguageGraph, pretrain.entries[static_cast<std::size_t>(i)]});
  }
  align::train_step(model, data, batch, tcfg);
  CHECK(model.adam_text.step_count() == 1);

  align::JointModel resumed = align::deserialize_checkpoint(align::serialize_checkpoint(model));
  CHECK(resumed.adam_text.step_count() == 1);

  // one more step from both copies lands on identical parameters
  align::train_step(model, data, batch, tcfg);
  align::train_step(resumed, data, batch, tcfg);
  CHECK(align::serialize_checkpoint(model) == align::serialize_checkpoint(resumed));
}
