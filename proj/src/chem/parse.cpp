#include "bindcore/chem/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "bindcore/chem/elements.hpp"
#include "bindcore/common/error.hpp"

namespace bindcore::chem {

namespace {

[[noreturn]] void fail(const char* what, int line_no, const std::string& detail) {
  throw ParseError(std::string(what) + " at line " + std::to_string(line_no) + ": " + detail);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int_field(std::string_view field, const char* what, int line_no) {
  std::string_view t = trimmed(field);
  int value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    fail(what, line_no, "expected an integer, got '" + std::string(field) + "'");
  }
  return value;
}

double parse_double_field(std::string_view field, const char* what, int line_no) {
  std::string t(trimmed(field));
  if (t.empty()) fail(what, line_no, "expected a number, got empty field");
  char* end = nullptr;
  double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(value)) {
    fail(what, line_no, "expected a number, got '" + t + "'");
  }
  return value;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

}  // namespace

void MoleculeGraph::validate() const {
  if (atom_types.empty()) throw ContractError("MoleculeGraph: no atoms");
  std::set<std::pair<int, int>> seen;
  for (const Bond& b : bonds) {
    if (b.i < 0 || b.i >= num_atoms() || b.j < 0 || b.j >= num_atoms()) {
      throw ContractError("MoleculeGraph: bond endpoint out of range");
    }
    if (b.i == b.j) throw ContractError("MoleculeGraph: self-bond on atom " + std::to_string(b.i));
    if (b.order < 1 || b.order > 4) {
      throw ContractError("MoleculeGraph: bond order " + std::to_string(b.order));
    }
    auto key = std::minmax(b.i, b.j);
    if (!seen.insert(key).second) {
      throw ContractError("MoleculeGraph: duplicate bond " + std::to_string(b.i) + "-" +
                          std::to_string(b.j));
    }
  }
}

void Conformation::validate() const {
  if (atom_types.empty()) throw ContractError("Conformation: no atoms");
  if (coords.size() != atom_types.size()) {
    throw ContractError("Conformation: coordinate rows do not match atom count");
  }
  for (const auto& xyz : coords) {
    for (double v : xyz) {
      if (!std::isfinite(v)) throw ContractError("Conformation: non-finite coordinate");
    }
  }
}

void PocketStructure::validate() const {
  Conformation c{atom_types, coords, pocket_id};
  c.validate();
}

num::Tensor pairwise_distances(const std::vector<std::array<double, 3>>& coords) {
  const int n = static_cast<int>(coords.size());
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = coords[i][0] - coords[j][0];
      const double dy = coords[i][1] - coords[j][1];
      const double dz = coords[i][2] - coords[j][2];
      const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
      d[static_cast<std::size_t>(i) * n + j] = dist;
      d[static_cast<std::size_t>(j) * n + i] = dist;
    }
  }
  return num::Tensor::from_data({n, n}, std::move(d));
}

num::Tensor pairwise_distances(const Conformation& c) {
  c.validate();
  return pairwise_distances(c.coords);
}

// ---- molfile ---------------------------------------------------------------

MoleculeGraph parse_sdf_subset(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.size() < 4) throw ParseError("molfile: fewer than 4 lines");

  const std::string& counts = lines[3];
  const int counts_line_no = 4;
  if (counts.size() < 6 || counts.find("V2000") == std::string::npos) {
    fail("molfile counts line", counts_line_no, "missing V2000 tag in '" + counts + "'");
  }
  const int n_atoms = parse_int_field(std::string_view(counts).substr(0, 3),
                                      "molfile counts line", counts_line_no);
  const int n_bonds = parse_int_field(std::string_view(counts).substr(3, 3),
                                      "molfile counts line", counts_line_no);
  if (n_atoms < 1) fail("molfile counts line", counts_line_no, "atom count must be >= 1");
  if (n_bonds < 0) fail("molfile counts line", counts_line_no, "negative bond count");

  MoleculeGraph g;
  g.molecule_id = std::string(trimmed(lines[0]));

  for (int a = 0; a < n_atoms; ++a) {
    const std::size_t idx = 4 + static_cast<std::size_t>(a);
    const int line_no = static_cast<int>(idx) + 1;
    if (idx >= lines.size()) fail("molfile atom block", line_no, "truncated");
    auto fields = split_fields(lines[idx]);
    if (fields.size() < 4) fail("molfile atom block", line_no, "expected 'x y z symbol'");
    parse_double_field(fields[0], "molfile atom block", line_no);
    parse_double_field(fields[1], "molfile atom block", line_no);
    parse_double_field(fields[2], "molfile atom block", line_no);
    g.atom_types.push_back(atom_type_from_symbol(fields[3]));
  }

  for (int b = 0; b < n_bonds; ++b) {
    const std::size_t idx = 4 + static_cast<std::size_t>(n_atoms) + static_cast<std::size_t>(b);
    const int line_no = static_cast<int>(idx) + 1;
    if (idx >= lines.size()) fail("molfile bond block", line_no, "truncated");
    const std::string& line = lines[idx];
    if (line.size() < 9) fail("molfile bond block", line_no, "short bond line '" + line + "'");
    const int ai = parse_int_field(std::string_view(line).substr(0, 3), "molfile bond block", line_no);
    const int aj = parse_int_field(std::string_view(line).substr(3, 3), "molfile bond block", line_no);
    const int order = parse_int_field(std::string_view(line).substr(6, 3), "molfile bond block", line_no);
    if (ai < 1 || ai > n_atoms || aj < 1 || aj > n_atoms) {
      fail("molfile bond block", line_no,
           "bond atom index out of range 1.." + std::to_string(n_atoms));
    }
    if (ai == aj) fail("molfile bond block", line_no, "self-bond");
    if (order < 1 || order > 4) {
      fail("molfile bond block", line_no, "bond order " + std::to_string(order));
    }
    g.bonds.push_back({ai - 1, aj - 1, order});
  }

  g.validate();
  return g;
}

std::string write_sdf(const MoleculeGraph& graph) {
  graph.validate();
  std::ostringstream out;
  out << graph.molecule_id << "\n\n\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n",
                graph.num_atoms(), static_cast<int>(graph.bonds.size()));
  out << buf;
  for (int type : graph.atom_types) {
    std::snprintf(buf, sizeof(buf), "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0\n", 0.0, 0.0,
                  0.0, atom_symbol(type).c_str());
    out << buf;
  }
  for (const Bond& b : graph.bonds) {
    std::snprintf(buf, sizeof(buf), "%3d%3d%3d  0\n", b.i + 1, b.j + 1, b.order);
    out << buf;
  }
  out << "M  END\n$$$$\n";
  return out.str();
}

// ---- xyz --------------------------------------------------------------------

Conformation parse_xyz(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("xyz: empty input");
  const int n_atoms = parse_int_field(lines[0], "xyz count line", 1);
  if (n_atoms < 1) fail("xyz count line", 1, "atom count must be >= 1");

  Conformation c;
  if (lines.size() >= 2) c.molecule_id = std::string(trimmed(lines[1]));

  for (int a = 0; a < n_atoms; ++a) {
    const std::size_t idx = 2 + static_cast<std::size_t>(a);
    const int line_no = static_cast<int>(idx) + 1;
    if (idx >= lines.size() || trimmed(lines[idx]).empty()) {
      fail("xyz atom block", line_no,
           "expected " + std::to_string(n_atoms) + " atom rows, file ends early");
    }
    auto fields = split_fields(lines[idx]);
    if (fields.size() != 4) fail("xyz atom block", line_no, "expected 'symbol x y z'");
    c.atom_types.push_back(atom_type_from_symbol(fields[0]));
    c.coords.push_back({parse_double_field(fields[1], "xyz atom block", line_no),
                        parse_double_field(fields[2], "xyz atom block", line_no),
                        parse_double_field(fields[3], "xyz atom block", line_no)});
  }
  c.validate();
  return c;
}

std::string write_xyz(const Conformation& conf) {
  conf.validate();
  std::ostringstream out;
  out << conf.num_atoms() << "\n" << conf.molecule_id << "\n";
  char buf[160];
  for (int a = 0; a < conf.num_atoms(); ++a) {
    std::snprintf(buf, sizeof(buf), "%-3s %.6f %.6f %.6f\n",
                  atom_symbol(conf.atom_types[static_cast<std::size_t>(a)]).c_str(),
                  conf.coords[static_cast<std::size_t>(a)][0],
                  conf.coords[static_cast<std::size_t>(a)][1],
                  conf.coords[static_cast<std::size_t>(a)][2]);
    out << buf;
  }
  return out.str();
}

PocketStructure parse_pocket_xyz(const std::string& text) {
  Conformation c = parse_xyz(text);
  return PocketStructure{std::move(c.atom_types), std::move(c.coords), std::move(c.molecule_id)};
}

std::string write_pocket_xyz(const PocketStructure& pocket) {
  return write_xyz(Conformation{pocket.atom_types, pocket.coords, pocket.pocket_id});
}

}  // namespace bindcore::chem
