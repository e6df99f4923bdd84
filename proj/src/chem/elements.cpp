#include "bindcore/chem/elements.hpp"

#include <array>

#include "bindcore/common/error.hpp"

namespace bindcore::chem {

namespace {

constexpr std::array<std::string_view, kNumElements> kSymbols = {
    "H", "B", "C", "N", "O", "F", "Na", "Mg", "Si", "P", "S", "Cl", "K", "Ca", "Br", "I",
};

}  // namespace

int atom_type_from_symbol(std::string_view symbol) {
  for (int i = 0; i < kNumElements; ++i) {
    if (kSymbols[static_cast<std::size_t>(i)] == symbol) return i;
  }
  return kUnknownAtomType;
}

std::string atom_symbol(int atom_type) {
  if (atom_type == kUnknownAtomType) return "X";
  if (atom_type < 0 || atom_type >= kNumAtomTypes) {
    throw ContractError("atom_symbol: type " + std::to_string(atom_type) + " out of range");
  }
  return std::string(kSymbols[static_cast<std::size_t>(atom_type)]);
}

int pair_type_index(int type_a, int type_b) {
  if (type_a < 0 || type_a >= kNumAtomTypes || type_b < 0 || type_b >= kNumAtomTypes) {
    throw ContractError("pair_type_index: atom type out of range");
  }
  const int lo = type_a < type_b ? type_a : type_b;
  const int hi = type_a < type_b ? type_b : type_a;
  return lo * kNumAtomTypes + hi;
}

}  // namespace bindcore::chem
