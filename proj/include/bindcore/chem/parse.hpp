#pragma once

#include <string>

#include "bindcore/chem/types.hpp"

namespace bindcore::chem {

// V2000 molfile subset: three header lines, counts line, atom block (element
// symbols; coordinates ignored), bond block, "M  END". One record per file.
MoleculeGraph parse_sdf_subset(const std::string& text);
std::string write_sdf(const MoleculeGraph& graph);

// Standard XYZ: count line, comment line, "symbol x y z" rows.
Conformation parse_xyz(const std::string& text);
std::string write_xyz(const Conformation& conf);

PocketStructure parse_pocket_xyz(const std::string& text);
std::string write_pocket_xyz(const PocketStructure& pocket);

}  // namespace bindcore::chem
