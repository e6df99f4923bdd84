#include "bindcore/chem/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "bindcore/common/error.hpp"

namespace bindcore::chem {

namespace {
constexpr const char* kOovToken = "<unk>";
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

Vocabulary::Vocabulary() : tokens_{kOovToken} { rebuild_index(); }

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus, int min_freq) {
  std::map<std::string, int> counts;  // ordered -> deterministic vocab
  for (const auto& text : corpus) {
    for (auto& w : split_words(text)) counts[w] += 1;
  }
  std::vector<std::string> tokens{kOovToken};
  for (const auto& [token, count] : counts) {
    if (count >= min_freq) tokens.push_back(token);
  }
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens[0] != kOovToken) {
    throw DataError("Vocabulary: token 0 must be the OOV token");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.rebuild_index();
  return v;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(tokens_[static_cast<std::size_t>(i)], i).second) {
      throw DataError("Vocabulary: duplicate token '" + tokens_[static_cast<std::size_t>(i)] + "'");
    }
  }
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kOovId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw ContractError("Vocabulary::token: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  for (int i = 0; i < size(); ++i) out << tokens_[static_cast<std::size_t>(i)] << '\t' << i << '\n';
  return out.str();
}

Vocabulary Vocabulary::parse(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("vocabulary line " + std::to_string(line_no) + ": missing tab");
    }
    const std::string token = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    if (id != static_cast<int>(tokens.size())) {
      throw ParseError("vocabulary line " + std::to_string(line_no) + ": ids must be dense and ordered");
    }
    tokens.push_back(token);
  }
  return from_tokens(std::move(tokens));
}

TokenSequence tokenize(const Vocabulary& vocab, const std::string& text) {
  TokenSequence seq;
  seq.raw_text = text;
  for (const auto& w : split_words(text)) seq.token_ids.push_back(vocab.id_of(w));
  if (seq.token_ids.empty()) seq.token_ids.push_back(Vocabulary::kOovId);
  return seq;
}

}  // namespace bindcore::chem
