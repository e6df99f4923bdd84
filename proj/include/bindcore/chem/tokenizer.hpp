#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "bindcore/chem/types.hpp"

namespace bindcore::chem {

// Lowercases and splits on non-alphanumerics.
std::vector<std::string> split_words(const std::string& text);

// Corpus-built vocabulary. ID 0 is the out-of-vocabulary token; the rest are
// corpus tokens in lexicographic order for determinism.
class Vocabulary {
 public:
  static constexpr int kOovId = 0;

  Vocabulary();  // just the OOV token
  static Vocabulary build(const std::vector<std::string>& corpus, int min_freq = 2);

  int size() const { return static_cast<int>(tokens_.size()); }
  int id_of(const std::string& token) const;  // kOovId when absent
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One "token<TAB>id" line per entry.
  std::string serialize() const;
  static Vocabulary parse(const std::string& text);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  void rebuild_index();
};

// Empty text maps to a single OOV token, so the result is never empty.
TokenSequence tokenize(const Vocabulary& vocab, const std::string& text);

}  // namespace bindcore::chem
