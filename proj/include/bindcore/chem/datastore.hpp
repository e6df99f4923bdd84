#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "bindcore/chem/manifest.hpp"
#include "bindcore/chem/synthetic.hpp"
#include "bindcore/chem/tokenizer.hpp"
#include "bindcore/chem/types.hpp"

namespace bindcore::chem {

// Immutable record repository behind the trainer and the evaluator: manifests
// plus every referenced record, with texts tokenized against a vocabulary
// built from the pretrain split.
class DataStore {
 public:
  static DataStore load(const std::filesystem::path& dir, const std::vector<PairKind>& kinds,
                        int vocab_min_freq = 2);
  static DataStore from_synthetic(const SyntheticDataset& dataset, int vocab_min_freq = 2);
  // Reuse a fixed vocabulary (evaluation against a trained checkpoint).
  static DataStore load_with_vocab(const std::filesystem::path& dir,
                                   const std::vector<PairKind>& kinds, Vocabulary vocab);
  static DataStore from_synthetic_with_vocab(const SyntheticDataset& dataset, Vocabulary vocab);

  bool has_kind(PairKind kind) const;
  const PairManifest& manifest(PairKind kind) const;
  std::vector<PairKind> kinds() const;

  const Vocabulary& vocab() const { return vocab_; }

  const TokenSequence& text(const std::string& ref) const;
  const MoleculeGraph& graph(const std::string& ref) const;
  const Conformation& conformation(const std::string& ref) const;
  const PocketStructure& pocket(const std::string& ref) const;

 private:
  std::vector<PairManifest> manifests_;
  Vocabulary vocab_;
  std::unordered_map<std::string, std::string> raw_texts_;
  std::unordered_map<std::string, TokenSequence> texts_;
  std::unordered_map<std::string, MoleculeGraph> graphs_;
  std::unordered_map<std::string, Conformation> conformations_;
  std::unordered_map<std::string, PocketStructure> pockets_;

  void tokenize_all();
  std::vector<std::string> pretrain_text_corpus() const;
};

}  // namespace bindcore::chem
