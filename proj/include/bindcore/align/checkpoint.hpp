#pragma once

#include <filesystem>

#include "bindcore/align/model.hpp"

namespace bindcore::align {

inline constexpr int kCheckpointVersion = 1;

// Versioned JSON envelope: format_version, seed, config (encoder sizes plus
// the vocabulary), named parameter blocks as shape + flat arrays, and the
// optimizer moments. Contains no timestamps, so identical models serialize to
// identical bytes.
std::string serialize_checkpoint(const JointModel& model);
JointModel deserialize_checkpoint(const std::string& text);

void save_checkpoint(const JointModel& model, const std::filesystem::path& path);
JointModel load_checkpoint(const std::filesystem::path& path);

}  // namespace bindcore::align
