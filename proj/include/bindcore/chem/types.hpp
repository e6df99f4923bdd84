#pragma once

#include <array>
#include <string>
#include <vector>

#include "bindcore/num/tensor.hpp"

namespace bindcore::chem {

struct Bond {
  int i = 0;
  int j = 0;
  int order = 1;  // 1, 2, 3, 4 = aromatic

  bool operator==(const Bond&) const = default;
};

// 2D molecular topology: typed atoms, typed bonds.
struct MoleculeGraph {
  std::vector<int> atom_types;
  std::vector<Bond> bonds;
  std::string molecule_id;

  int num_atoms() const { return static_cast<int>(atom_types.size()); }
  void validate() const;

  bool operator==(const MoleculeGraph&) const = default;
};

// Typed atoms with 3D coordinates in Ångströms.
struct Conformation {
  std::vector<int> atom_types;
  std::vector<std::array<double, 3>> coords;
  std::string molecule_id;

  int num_atoms() const { return static_cast<int>(atom_types.size()); }
  void validate() const;

  bool operator==(const Conformation&) const = default;
};

// Same shape as Conformation; a distinct type because it feeds the protein
// pocket encoder.
struct PocketStructure {
  std::vector<int> atom_types;
  std::vector<std::array<double, 3>> coords;
  std::string pocket_id;

  int num_atoms() const { return static_cast<int>(atom_types.size()); }
  void validate() const;

  bool operator==(const PocketStructure&) const = default;
};

struct TokenSequence {
  std::vector<int> token_ids;
  std::string raw_text;

  bool operator==(const TokenSequence&) const = default;
};

// Symmetric Euclidean distance matrix, zero diagonal. Constant with respect
// to training (coordinates are data, not parameters).
num::Tensor pairwise_distances(const Conformation& c);
num::Tensor pairwise_distances(const std::vector<std::array<double, 3>>& coords);

}  // namespace bindcore::chem
