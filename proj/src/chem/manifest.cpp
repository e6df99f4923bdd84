#include "bindcore/chem/manifest.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bindcore/common/error.hpp"
#include "bindcore/common/io.hpp"

namespace bindcore::chem {

using json = nlohmann::json;

namespace {

const std::array<std::string, 4> kKindNames = {
    "language-graph",
    "language-conformation",
    "graph-conformation",
    "conformation-protein",
};

const std::array<std::string, 3> kSplitNames = {"pretrain", "validation", "test"};

}  // namespace

const std::string& pair_kind_name(PairKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

PairKind pair_kind_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<PairKind>(i);
  }
  throw DataError("unknown pair_kind '" + name + "'");
}

std::pair<Modality, Modality> pair_modalities(PairKind kind) {
  switch (kind) {
    case PairKind::LanguageGraph: return {Modality::Language, Modality::Graph};
    case PairKind::LanguageConformation: return {Modality::Language, Modality::Conformation};
    case PairKind::GraphConformation: return {Modality::Graph, Modality::Conformation};
    case PairKind::ConformationProtein: return {Modality::Conformation, Modality::Pocket};
  }
  throw ContractError("pair_modalities: bad kind");
}

const std::string& split_name(Split split) {
  return kSplitNames[static_cast<std::size_t>(split)];
}

Split split_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
    if (kSplitNames[i] == name) return static_cast<Split>(i);
  }
  throw DataError("unknown split '" + name + "'");
}

std::array<std::int64_t, 3> PairManifest::split_counts() const {
  std::array<std::int64_t, 3> counts{0, 0, 0};
  for (const auto& e : entries) counts[static_cast<std::size_t>(e.split)] += 1;
  return counts;
}

PairManifest PairManifest::filter(Split split) const {
  PairManifest out;
  out.kind = kind;
  for (const auto& e : entries) {
    if (e.split == split) out.entries.push_back(e);
  }
  return out;
}

void PairManifest::validate() const {
  std::unordered_set<std::string> exact;
  std::unordered_map<std::string, Split> pair_split;
  std::vector<std::string> offenders;
  for (const auto& e : entries) {
    const std::string pair_key = e.left + "\x1f" + e.right;
    const std::string full_key = pair_key + "\x1f" + split_name(e.split);
    if (!exact.insert(full_key).second) {
      offenders.push_back("duplicate (" + e.left + ", " + e.right + ", " + split_name(e.split) + ")");
    } else {
      auto [it, inserted] = pair_split.emplace(pair_key, e.split);
      if (!inserted && it->second != e.split) {
        offenders.push_back("pair (" + e.left + ", " + e.right + ") appears in splits " +
                            split_name(it->second) + " and " + split_name(e.split));
      }
    }
    if (offenders.size() >= 10) break;
  }
  if (!offenders.empty()) {
    std::string msg = "manifest validation failed for " + pair_kind_name(kind) + ":";
    for (const auto& o : offenders) msg += "\n  " + o;
    throw DataError(msg);
  }
}

PairManifest parse_manifest_text(const std::string& jsonl, const std::string& source_name) {
  PairManifest manifest;
  bool kind_set = false;

  std::istringstream in(jsonl);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
    for (const char* field : {"pair_kind", "left", "right", "split"}) {
      if (!rec.contains(field) || !rec[field].is_string()) {
        throw ParseError(source_name + ":" + std::to_string(line_no) + ": missing string field '" +
                         field + "'");
      }
    }
    PairKind kind;
    Split split;
    try {
      kind = pair_kind_from_name(rec["pair_kind"].get<std::string>());
      split = split_from_name(rec["split"].get<std::string>());
    } catch (const DataError& e) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!kind_set) {
      manifest.kind = kind;
      kind_set = true;
    } else if (kind != manifest.kind) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": mixed pair kinds (" +
                      pair_kind_name(manifest.kind) + " vs " + pair_kind_name(kind) + ")");
    }
    manifest.entries.push_back(
        {rec["left"].get<std::string>(), rec["right"].get<std::string>(), split});
  }
  if (!kind_set) throw DataError(source_name + ": empty manifest");
  manifest.validate();
  return manifest;
}

PairManifest parse_manifest(const std::filesystem::path& path) {
  return parse_manifest_text(read_text_file(path), path.string());
}

std::string write_manifest(const PairManifest& manifest) {
  std::ostringstream out;
  for (const auto& e : manifest.entries) {
    json rec;
    rec["pair_kind"] = pair_kind_name(manifest.kind);
    rec["left"] = e.left;
    rec["right"] = e.right;
    rec["split"] = split_name(e.split);
    out << rec.dump() << '\n';
  }
  return out.str();
}

void verify_refs(const PairManifest& manifest, const std::filesystem::path& base_dir) {
  std::vector<std::string> dangling;
  std::unordered_set<std::string> checked;
  for (const auto& e : manifest.entries) {
    for (const std::string& ref : {e.left, e.right}) {
      if (!checked.insert(ref).second) continue;
      if (!std::filesystem::exists(base_dir / ref)) {
        dangling.push_back(ref);
        if (dangling.size() >= 10) break;
      }
    }
    if (dangling.size() >= 10) break;
  }
  if (!dangling.empty()) {
    std::string msg = "dangling refs in " + pair_kind_name(manifest.kind) + " manifest under " +
                      base_dir.string() + ":";
    for (const auto& r : dangling) msg += "\n  " + r;
    throw DataError(msg);
  }
}

const std::array<CorpusCounts, 4> kM4ReferenceCounts = {{
    {PairKind::LanguageGraph, {319353, 1500, 1500}},
    {PairKind::LanguageConformation, {158237, 1500, 1500}},
    {PairKind::GraphConformation, {158237, 1500, 1500}},
    {PairKind::ConformationProtein, {72355, 100, 285}},
}};

M4CountsReport check_m4_counts(const std::vector<PairManifest>& manifests) {
  M4CountsReport report;
  report.complete = true;
  for (const auto& ref : kM4ReferenceCounts) {
    CountsCheck check;
    check.kind = ref.kind;
    check.expected = ref.counts;
    check.actual = {0, 0, 0};
    bool found = false;
    for (const auto& m : manifests) {
      if (m.kind == ref.kind) {
        check.actual = m.split_counts();
        found = true;
        break;
      }
    }
    check.matches = found && check.actual == check.expected;
    report.complete = report.complete && check.matches;
    report.checks.push_back(check);
  }
  return report;
}

std::string M4CountsReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << pair_kind_name(c.kind) << ": " << c.actual[0] << "/" << c.actual[1] << "/"
        << c.actual[2];
    if (c.matches) {
      out << " (matches reference)";
    } else {
      out << " (expected " << c.expected[0] << "/" << c.expected[1] << "/" << c.expected[2] << ")";
    }
    out << '\n';
  }
  out << (complete ? "corpus complete" : "corpus incomplete") << '\n';
  return out.str();
}

}  // namespace bindcore::chem
