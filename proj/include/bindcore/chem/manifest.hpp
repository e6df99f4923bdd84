#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bindcore::chem {

enum class PairKind {
  LanguageGraph,
  LanguageConformation,
  GraphConformation,
  ConformationProtein,
};

enum class Modality { Language, Graph, Conformation, Pocket };

enum class Split { Pretrain, Validation, Test };

inline constexpr std::array<PairKind, 4> kAllPairKinds = {
    PairKind::LanguageGraph,
    PairKind::LanguageConformation,
    PairKind::GraphConformation,
    PairKind::ConformationProtein,
};

const std::string& pair_kind_name(PairKind kind);
PairKind pair_kind_from_name(const std::string& name);  // throws DataError
std::pair<Modality, Modality> pair_modalities(PairKind kind);

const std::string& split_name(Split split);
Split split_from_name(const std::string& name);  // throws DataError

struct PairEntry {
  std::string left;
  std::string right;
  Split split = Split::Pretrain;

  bool operator==(const PairEntry&) const = default;
};

// Typed list of cross-modal sample pairs with split labels. Entries keep file
// order; splits are disjoint by (left, right).
struct PairManifest {
  PairKind kind = PairKind::LanguageGraph;
  std::vector<PairEntry> entries;

  std::array<std::int64_t, 3> split_counts() const;
  PairManifest filter(Split split) const;
  void validate() const;  // schema-level invariants only
};

// Newline-delimited JSON with fields pair_kind, left, right, split. All
// records in one file must share one pair_kind.
PairManifest parse_manifest(const std::filesystem::path& path);
PairManifest parse_manifest_text(const std::string& jsonl, const std::string& source_name);
std::string write_manifest(const PairManifest& manifest);

// Checks that every ref points to an existing file under base_dir.
void verify_refs(const PairManifest& manifest, const std::filesystem::path& base_dir);

// Reference corpus statistics for a complete four-modality dataset
// (pretrain / validation / test per pair kind).
struct CorpusCounts {
  PairKind kind;
  std::array<std::int64_t, 3> counts;
};

extern const std::array<CorpusCounts, 4> kM4ReferenceCounts;

struct CountsCheck {
  PairKind kind;
  std::array<std::int64_t, 3> expected;
  std::array<std::int64_t, 3> actual;
  bool matches;
};

struct M4CountsReport {
  std::vector<CountsCheck> checks;
  bool complete = false;  // every kind present with exact reference counts
  std::string summary() const;
};

// Non-fatal conformance check: mismatches are reported, never thrown.
M4CountsReport check_m4_counts(const std::vector<PairManifest>& manifests);

}  // namespace bindcore::chem
