#pragma once

#include <string>
#include <string_view>

namespace bindcore::chem {

// Atom-type universe: the 16 elements most common in drug-like molecules plus
// a reserved unknown slot. Type IDs index every embedding table in the
// encoders, so the ordering is frozen.
inline constexpr int kNumElements = 16;
inline constexpr int kUnknownAtomType = kNumElements;
inline constexpr int kNumAtomTypes = kNumElements + 1;

int atom_type_from_symbol(std::string_view symbol);  // unknown -> kUnknownAtomType
std::string atom_symbol(int atom_type);

// Canonical unordered-pair index: min(a,b)*T + max(a,b).
inline constexpr int kNumPairTypes = kNumAtomTypes * kNumAtomTypes;
int pair_type_index(int type_a, int type_b);

}  // namespace bindcore::chem
