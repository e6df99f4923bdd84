#include "bindcore/common/io.hpp"

#include <fstream>
#include <sstream>

#include "bindcore/common/error.hpp"

namespace bindcore {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file for reading: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot open file for writing: " + path.string());
  }
  out << text;
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

}  // namespace bindcore
