#include "bindcore/chem/datastore.hpp"

#include <set>

#include "bindcore/chem/parse.hpp"
#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"

namespace bindcore::chem {

namespace {

std::string strip_trailing_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

DataStore DataStore::load_with_vocab(const std::filesystem::path& dir,
                                     const std::vector<PairKind>& kinds, Vocabulary vocab) {
  DataStore ds;
  for (PairKind kind : kinds) {
    const auto path = dir / (pair_kind_name(kind) + ".jsonl");
    if (!std::filesystem::exists(path)) {
      throw DataError("missing manifest " + path.string());
    }
    PairManifest m = parse_manifest(path);
    if (m.kind != kind) {
      throw DataError("manifest " + path.string() + " declares kind " + pair_kind_name(m.kind));
    }
    ds.manifests_.push_back(std::move(m));
  }

  for (const auto& m : ds.manifests_) {
    const auto [left_mod, right_mod] = pair_modalities(m.kind);
    for (const auto& e : m.entries) {
      for (const auto& [ref, mod] :
           {std::pair{e.left, left_mod}, std::pair{e.right, right_mod}}) {
        const auto path = dir / ref;
        switch (mod) {
          case Modality::Language:
            if (!ds.raw_texts_.contains(ref)) {
              ds.raw_texts_[ref] = strip_trailing_newline(read_text_file(path));
            }
            break;
          case Modality::Graph:
            if (!ds.graphs_.contains(ref)) ds.graphs_[ref] = parse_sdf_subset(read_text_file(path));
            break;
          case Modality::Conformation:
            if (!ds.conformations_.contains(ref)) ds.conformations_[ref] = parse_xyz(read_text_file(path));
            break;
          case Modality::Pocket:
            if (!ds.pockets_.contains(ref)) ds.pockets_[ref] = parse_pocket_xyz(read_text_file(path));
            break;
        }
      }
    }
  }

  ds.vocab_ = std::move(vocab);
  ds.tokenize_all();
  return ds;
}

DataStore DataStore::load(const std::filesystem::path& dir, const std::vector<PairKind>& kinds,
                          int vocab_min_freq) {
  DataStore ds = load_with_vocab(dir, kinds, Vocabulary());
  ds.vocab_ = Vocabulary::build(ds.pretrain_text_corpus(), vocab_min_freq);
  ds.tokenize_all();
  return ds;
}

DataStore DataStore::from_synthetic_with_vocab(const SyntheticDataset& dataset, Vocabulary vocab) {
  DataStore ds;
  ds.manifests_ = dataset.manifests;
  for (const auto& sample : dataset.samples) {
    ds.raw_texts_["texts/" + sample.id + ".txt"] = sample.text;
    ds.graphs_["graphs/" + sample.id + ".sdf"] = sample.graph;
    ds.conformations_["conformations/" + sample.id + ".xyz"] = sample.conformation;
    ds.pockets_["pockets/" + sample.id + ".xyz"] = sample.pocket;
  }
  ds.vocab_ = std::move(vocab);
  ds.tokenize_all();
  return ds;
}

DataStore DataStore::from_synthetic(const SyntheticDataset& dataset, int vocab_min_freq) {
  DataStore ds = from_synthetic_with_vocab(dataset, Vocabulary());
  ds.vocab_ = Vocabulary::build(ds.pretrain_text_corpus(), vocab_min_freq);
  ds.tokenize_all();
  return ds;
}

std::vector<std::string> DataStore::pretrain_text_corpus() const {
  std::set<std::string> refs;  // ordered for determinism
  for (const auto& m : manifests_) {
    const auto [left_mod, right_mod] = pair_modalities(m.kind);
    for (const auto& e : m.entries) {
      if (e.split != Split::Pretrain) continue;
      if (left_mod == Modality::Language) refs.insert(e.left);
      if (right_mod == Modality::Language) refs.insert(e.right);
    }
  }
  std::vector<std::string> corpus;
  corpus.reserve(refs.size());
  for (const auto& ref : refs) corpus.push_back(raw_texts_.at(ref));
  return corpus;
}

void DataStore::tokenize_all() {
  texts_.clear();
  for (const auto& [ref, raw] : raw_texts_) texts_[ref] = tokenize(vocab_, raw);
}

bool DataStore::has_kind(PairKind kind) const {
  for (const auto& m : manifests_) {
    if (m.kind == kind) return true;
  }
  return false;
}

const PairManifest& DataStore::manifest(PairKind kind) const {
  for (const auto& m : manifests_) {
    if (m.kind == kind) return m;
  }
  throw DataError("DataStore: no manifest loaded for " + pair_kind_name(kind));
}

std::vector<PairKind> DataStore::kinds() const {
  std::vector<PairKind> out;
  for (const auto& m : manifests_) out.push_back(m.kind);
  return out;
}

const TokenSequence& DataStore::text(const std::string& ref) const {
  auto it = texts_.find(ref);
  if (it == texts_.end()) throw DataError("DataStore: no text record '" + ref + "'");
  return it->second;
}

const MoleculeGraph& DataStore::graph(const std::string& ref) const {
  auto it = graphs_.find(ref);
  if (it == graphs_.end()) throw DataError("DataStore: no graph record '" + ref + "'");
  return it->second;
}

const Conformation& DataStore::conformation(const std::string& ref) const {
  auto it = conformations_.find(ref);
  if (it == conformations_.end()) throw DataError("DataStore: no conformation record '" + ref + "'");
  return it->second;
}

const PocketStructure& DataStore::pocket(const std::string& ref) const {
  auto it = pockets_.find(ref);
  if (it == pockets_.end()) throw DataError("DataStore: no pocket record '" + ref + "'");
  return it->second;
}

}  // namespace bindcore::chem
