#pragma once

#include "ellipt/dataset.hpp"
#include "ellipt/rforest.hpp"
#include "ellipt/tuning.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ellipt::cli {

inline constexpr int kConfigVersion = 1;

// How EPA pairs are formed. `importance` ranks columns by permutation
// importance of an input-domain forest; `columns` keeps file order.
struct PairingPlan {
  enum class Kind { kImportance, kColumns, kExplicit } kind = Kind::kImportance;
  std::vector<std::pair<std::string, std::string>> explicit_pairs;
};

struct KRule {
  enum class Kind { kAll, kKaiser, kVariance, kFixed } kind = Kind::kAll;
  double fraction = 0.8;
  long k = 0;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::string label_column = "label";
  std::filesystem::path class_map;
  std::vector<std::string> feature_list;
  dataset::PreprocessConfig preprocess;
  rforest::RfConfig rf;
  tuning::TuneConfig tune;
  std::optional<int> reuse_cycle;
  PairingPlan pairing;
  KRule k_rule;
  std::filesystem::path epa_model;
  std::filesystem::path compare_input;
  std::filesystem::path compare_transform;
  long compare_min_class_size = 0;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 1;
};

// Keys accepted in config files and as `--<key>` flags.
const std::vector<std::string>& known_keys();

// Flat `key = value` lines; `#` starts a comment. Requires config_version.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Builds a RunConfig from merged key/value settings. Unknown keys and bad
// values throw ellipt::Error (module "config").
RunConfig build_config(const std::map<std::string, std::string>& kv);

PairingPlan parse_pairing(const std::string& text);
KRule parse_k_rule(const std::string& text);

}  // namespace ellipt::cli
