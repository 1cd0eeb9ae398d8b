#include "gazecomp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gazecomp/conll.hpp"
#include "gazecomp/error.hpp"

namespace gazecomp {

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::baseline: return "baseline";
    case Architecture::multitask: return "multitask";
    case Architecture::cascaded: return "cascaded";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "baseline") return Architecture::baseline;
  if (name == "multitask") return Architecture::multitask;
  if (name == "cascaded") return Architecture::cascaded;
  throw ConfigError("unknown architecture: " + std::string(name));
}

void ArchitectureConfig::validate() const {
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (clip_norm && !(*clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
}

std::vector<std::filesystem::path> ExperimentConfig::gaze_files() const {
  std::vector<std::filesystem::path> out;
  const std::string measure(measure_name(model.gaze_measure));
  for (std::string pattern : gaze_train) {
    for (auto pos = pattern.find("{measure}"); pos != std::string::npos; pos = pattern.find("{measure}")) {
      pattern.replace(pos, 9, measure);
    }
    out.emplace_back(pattern);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value for " + std::string(key) + ": `" + std::string(value) + "`");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": `" + std::string(value) + "`");
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto comma = value.find(',', start);
    auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected `key = value`");
    }
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_setting(ArchitectureConfig& c, std::string_view key, std::string_view value) {
  if (key == "architecture") {
    c.architecture = parse_architecture(value);
  } else if (key == "layers") {
    c.layers = parse_number<int>(key, value);
  } else if (key == "hidden_size") {
    c.hidden_size = parse_number<int>(key, value);
  } else if (key == "embedding_dim") {
    c.embedding_dim = parse_number<int>(key, value);
  } else if (key == "gaze_measure") {
    c.gaze_measure = parse_measure(value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "iterations") {
    c.iterations = parse_number<int>(key, value);
  } else if (key == "clip_norm") {
    if (value.empty() || value == "none") {
      c.clip_norm.reset();
    } else {
      c.clip_norm = parse_number<double>(key, value);
    }
  } else if (key == "finetune_embeddings") {
    c.finetune_embeddings = parse_bool(key, value);
  } else if (key == "lowercase_fallback") {
    c.lowercase_fallback = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key: " + std::string(key));
  }
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  if (key == "embeddings") {
    c.embeddings = std::string(value);
  } else if (key == "compression_train") {
    c.compression_train = std::string(value);
  } else if (key == "compression_dev") {
    c.compression_dev = std::string(value);
  } else if (key == "ccg_train") {
    c.ccg_train = std::string(value);
  } else if (key == "gaze_train") {
    c.gaze_train = split_list(value);
  } else if (key == "model") {
    c.model_out = std::string(value);
  } else if (key == "log") {
    c.log_path = std::string(value);
  } else {
    apply_setting(c.model, key, value);
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  ExperimentConfig config;
  for (const auto& [key, value] : parse_key_values(in, path.string())) apply_setting(config, key, value);

  const auto base = path.parent_path();
  auto resolve = [&base](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(config.embeddings);
  resolve(config.compression_train);
  resolve(config.compression_dev);
  resolve(config.ccg_train);
  resolve(config.model_out);
  resolve(config.log_path);
  for (auto& g : config.gaze_train) {
    std::filesystem::path p(g);
    if (p.is_relative()) g = (base / p).string();
  }
  config.model.validate();
  return config;
}

std::string to_key_values(const ArchitectureConfig& c) {
  std::ostringstream os;
  os << "architecture = " << architecture_name(c.architecture) << '\n'
     << "layers = " << c.layers << '\n'
     << "hidden_size = " << c.hidden_size << '\n'
     << "embedding_dim = " << c.embedding_dim << '\n'
     << "gaze_measure = " << measure_name(c.gaze_measure) << '\n'
     << "seed = " << c.seed << '\n'
     << "learning_rate = " << format_double(c.learning_rate) << '\n'
     << "iterations = " << c.iterations << '\n'
     << "clip_norm = " << (c.clip_norm ? format_double(*c.clip_norm) : std::string("none")) << '\n'
     << "finetune_embeddings = " << (c.finetune_embeddings ? "true" : "false") << '\n'
     << "lowercase_fallback = " << (c.lowercase_fallback ? "true" : "false") << '\n';
  return os.str();
}

ArchitectureConfig architecture_from_key_values(const KeyValues& kv) {
  ArchitectureConfig c;
  for (const auto& [key, value] : kv) apply_setting(c, key, value);
  c.validate();
  return c;
}

}  // namespace gazecomp
