#include "bindcore/cli/run_config.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "bindcore/common/error.hpp"

namespace bindcore::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

TomlValue parse_value(std::string_view raw, const std::string& where) {
  if (raw.empty()) throw ConfigError(where + ": empty value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ConfigError(where + ": unterminated string");
    return std::string(raw.substr(1, raw.size() - 2));
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  // integer, else float
  {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec == std::errc() && p == raw.data() + raw.size()) return v;
  }
  {
    std::string s(raw);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return v;
  }
  throw ConfigError(where + ": cannot parse value '" + std::string(raw) + "'");
}

template <typename T>
T as_number(const TomlValue& v, const std::string& key) {
  if (std::holds_alternative<std::int64_t>(v)) return static_cast<T>(std::get<std::int64_t>(v));
  if constexpr (std::is_floating_point_v<T>) {
    if (std::holds_alternative<double>(v)) return static_cast<T>(std::get<double>(v));
  }
  throw ConfigError("config key '" + key + "' has the wrong type");
}

bool as_bool(const TomlValue& v, const std::string& key) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  throw ConfigError("config key '" + key + "' must be a boolean");
}

}  // namespace

std::map<std::string, TomlValue> parse_toml(const std::string& text,
                                            const std::string& source_name) {
  std::map<std::string, TomlValue> table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source_name + ":" + std::to_string(line_no);
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    std::string key(trim(s.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    std::string_view raw = trim(s.substr(eq + 1));
    // strip a trailing comment outside strings
    if (!raw.empty() && raw.front() != '"') {
      const auto hash = raw.find('#');
      if (hash != std::string_view::npos) raw = trim(raw.substr(0, hash));
    }
    if (table.contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    table.emplace(std::move(key), parse_value(raw, where));
  }
  return table;
}

std::string dump_toml(const std::map<std::string, TomlValue>& table) {
  std::ostringstream out;
  for (const auto& [key, value] : table) {
    out << key << " = ";
    if (std::holds_alternative<bool>(value)) {
      out << (std::get<bool>(value) ? "true" : "false");
    } else if (std::holds_alternative<std::int64_t>(value)) {
      out << std::get<std::int64_t>(value);
    } else if (std::holds_alternative<double>(value)) {
      std::ostringstream num;
      num << std::get<double>(value);
      std::string s = num.str();
      if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
      out << s;
    } else {
      out << '"' << std::get<std::string>(value) << '"';
    }
    out << '\n';
  }
  return out.str();
}

void RunConfig::apply_file(const std::map<std::string, TomlValue>& table) {
  for (const auto& [key, value] : table) {
    if (key == "seed") seed = static_cast<std::uint64_t>(as_number<std::int64_t>(value, key));
    else if (key == "temperature") temperature = as_number<double>(value, key);
    else if (key == "batch_size") batch_size = as_number<int>(value, key);
    else if (key == "max_epochs") max_epochs = as_number<int>(value, key);
    else if (key == "lr") lr = as_number<double>(value, key);
    else if (key == "patience") patience = as_number<int>(value, key);
    else if (key == "embed_dim") embed_dim = as_number<int>(value, key);
    else if (key == "text_layers") text_layers = as_number<int>(value, key);
    else if (key == "graph_layers") graph_layers = as_number<int>(value, key);
    else if (key == "unimol_layers") unimol_layers = as_number<int>(value, key);
    else if (key == "heads") heads = as_number<int>(value, key);
    else if (key == "max_text_len") max_text_len = as_number<int>(value, key);
    else if (key == "vocab_min_freq") vocab_min_freq = as_number<int>(value, key);
    else if (key == "learnable_temperature") learnable_temperature = as_bool(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

std::map<std::string, TomlValue> RunConfig::to_table() const {
  return {
      {"seed", static_cast<std::int64_t>(seed)},
      {"temperature", temperature},
      {"batch_size", static_cast<std::int64_t>(batch_size)},
      {"max_epochs", static_cast<std::int64_t>(max_epochs)},
      {"lr", lr},
      {"patience", static_cast<std::int64_t>(patience)},
      {"embed_dim", static_cast<std::int64_t>(embed_dim)},
      {"text_layers", static_cast<std::int64_t>(text_layers)},
      {"graph_layers", static_cast<std::int64_t>(graph_layers)},
      {"unimol_layers", static_cast<std::int64_t>(unimol_layers)},
      {"heads", static_cast<std::int64_t>(heads)},
      {"max_text_len", static_cast<std::int64_t>(max_text_len)},
      {"vocab_min_freq", static_cast<std::int64_t>(vocab_min_freq)},
      {"learnable_temperature", learnable_temperature},
  };
}

align::AlignmentConfig RunConfig::alignment(const std::vector<chem::PairKind>& pairs) const {
  align::AlignmentConfig cfg;
  cfg.temperature = temperature;
  cfg.batch_size = batch_size;
  cfg.max_epochs = max_epochs;
  cfg.lr = lr;
  cfg.patience = patience;
  cfg.seed = seed;
  cfg.learnable_temperature = learnable_temperature;
  cfg.active_pairs = pairs;
  cfg.validate();
  return cfg;
}

align::ModelConfig RunConfig::model(chem::Vocabulary vocab) const {
  align::ModelConfig cfg;
  cfg.embed_dim = embed_dim;
  cfg.text.vocab_size = vocab.size();
  cfg.text.hidden = embed_dim;
  cfg.text.layers = text_layers;
  cfg.text.max_len = max_text_len;
  cfg.graph.hidden = embed_dim;
  cfg.graph.layers = graph_layers;
  cfg.conformation.hidden = embed_dim;
  cfg.conformation.layers = unimol_layers;
  cfg.conformation.heads = heads;
  cfg.pocket = cfg.conformation;
  cfg.learnable_temperature = learnable_temperature;
  cfg.vocab = std::move(vocab);
  return cfg;
}

}  // namespace bindcore::cli
