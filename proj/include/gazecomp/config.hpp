#ifndef GAZECOMP_CONFIG_HPP
#define GAZECOMP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazecomp/gaze.hpp"

namespace gazecomp {

enum class Architecture { baseline, multitask, cascaded };

std::string_view architecture_name(Architecture arch);
Architecture parse_architecture(std::string_view name);

struct ArchitectureConfig {
  Architecture architecture = Architecture::cascaded;
  int layers = 3;
  int hidden_size = 50;  // per direction
  int embedding_dim = 50;
  GazeMeasure gaze_measure = GazeMeasure::first_pass;
  std::uint64_t seed = 1;
  double learning_rate = 0.1;
  int iterations = 30;
  std::optional<double> clip_norm;
  bool finetune_embeddings = false;
  bool lowercase_fallback = true;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Everything `train` needs: the model config plus corpus locations.
struct ExperimentConfig {
  ArchitectureConfig model;
  std::filesystem::path embeddings;
  std::filesystem::path compression_train;
  std::filesystem::path compression_dev;
  std::filesystem::path ccg_train;
  /// Per-reader gaze files; `{measure}` expands to first_pass / regression.
  std::vector<std::string> gaze_train;
  std::filesystem::path model_out = "model.bin";
  std::filesystem::path log_path;

  std::vector<std::filesystem::path> gaze_files() const;
};

/// Ordered `key = value` pairs. `#` starts a comment; blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::istream& in, const std::string& source = "<stream>");

/// Applies one setting. Unknown keys and bad values throw ConfigError.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
void apply_setting(ArchitectureConfig& config, std::string_view key, std::string_view value);

/// Relative paths are resolved against the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical text form of the model-shaping keys (stable ordering, exact doubles).
std::string to_key_values(const ArchitectureConfig& config);
ArchitectureConfig architecture_from_key_values(const KeyValues& kv);

std::string format_double(double v);

}  // namespace gazecomp

#endif  // GAZECOMP_CONFIG_HPP
