#include "run_config.hpp"

#include "ellipt/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ellipt::cli {
namespace {

constexpr const char* kModule = "config";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw input_error(kModule, fmt::format("{}: '{}' is not a valid number", key, value));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw input_error(kModule, fmt::format("{}: expected true or false, got '{}'", key, value));
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "config_version", "dataset",         "label_column",      "class_map",
      "drop_columns",   "feature_list",    "min_class_count",   "nonnegative_shift",
      "output_dir",     "seed",            "rf.n_trees",        "rf.mtry",
      "rf.min_node_size", "rf.max_depth",  "rf.threads",        "tune.n_trials",
      "tune.alpha",     "tune.sir_threshold_db", "tune.copies", "tune.reuse_cycle",
      "pairs",          "pca.k_rule",      "epa.model",         "compare.input",
      "compare.transform", "compare.min_class_size"};
  return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error(kModule, fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw input_error(kModule, fmt::format("line {}: empty key", line_no));
    if (kv.count(key)) throw input_error(kModule, fmt::format("line {}: duplicate key '{}'", line_no, key));
    kv[key] = value;
  }
  const auto v = kv.find("config_version");
  if (v == kv.end()) throw input_error(kModule, "missing config_version");
  if (parse_number<int>("config_version", v->second) != kConfigVersion)
    throw input_error(kModule, fmt::format("unsupported config_version {} (expected {})", v->second,
                                           kConfigVersion));
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error(kModule, fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

PairingPlan parse_pairing(const std::string& text) {
  PairingPlan plan;
  if (text == "importance") return plan;
  if (text == "columns") {
    plan.kind = PairingPlan::Kind::kColumns;
    return plan;
  }
  plan.kind = PairingPlan::Kind::kExplicit;
  for (const auto& item : split_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
      throw input_error(kModule, fmt::format("pairs: '{}' is not 'first:second'", item));
    plan.explicit_pairs.emplace_back(trim(item.substr(0, colon)), trim(item.substr(colon + 1)));
  }
  if (plan.explicit_pairs.empty()) throw input_error(kModule, "pairs: empty pairing list");
  return plan;
}

KRule parse_k_rule(const std::string& text) {
  KRule rule;
  if (text == "all") return rule;
  if (text == "kaiser") {
    rule.kind = KRule::Kind::kKaiser;
    return rule;
  }
  if (text.rfind("variance:", 0) == 0) {
    rule.kind = KRule::Kind::kVariance;
    rule.fraction = parse_number<double>("pca.k_rule", text.substr(9));
    if (!(rule.fraction > 0.0 && rule.fraction <= 1.0))
      throw input_error(kModule, "pca.k_rule: variance fraction must be in (0, 1]");
    return rule;
  }
  if (text.rfind("fixed:", 0) == 0) {
    rule.kind = KRule::Kind::kFixed;
    rule.k = parse_number<long>("pca.k_rule", text.substr(6));
    if (rule.k < 1) throw input_error(kModule, "pca.k_rule: fixed k must be >= 1");
    return rule;
  }
  throw input_error(kModule,
                    fmt::format("pca.k_rule: '{}' is not all, kaiser, variance:<f> or fixed:<k>", text));
}

RunConfig build_config(const std::map<std::string, std::string>& kv) {
  const auto& keys = known_keys();
  for (const auto& [k, v] : kv)
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw input_error(kModule, fmt::format("unknown key '{}'", k));

  RunConfig c;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("dataset")) c.dataset = *v;
  if (auto v = get("label_column")) c.label_column = *v;
  if (auto v = get("class_map")) c.class_map = *v;
  if (auto v = get("drop_columns")) c.preprocess.drop_columns = split_list(*v);
  if (auto v = get("feature_list")) c.feature_list = split_list(*v);
  if (auto v = get("min_class_count")) c.preprocess.min_class_count = parse_number<long>("min_class_count", *v);
  if (auto v = get("nonnegative_shift")) c.preprocess.nonnegative_shift = parse_bool("nonnegative_shift", *v);
  if (auto v = get("output_dir")) c.output_dir = *v;
  if (auto v = get("seed")) c.seed = parse_number<std::uint64_t>("seed", *v);

  if (auto v = get("rf.n_trees")) c.rf.n_trees = parse_number<int>("rf.n_trees", *v);
  if (auto v = get("rf.mtry")) c.rf.mtry = parse_number<int>("rf.mtry", *v);
  if (auto v = get("rf.min_node_size")) c.rf.min_node_size = parse_number<int>("rf.min_node_size", *v);
  if (auto v = get("rf.max_depth")) c.rf.max_depth = parse_number<int>("rf.max_depth", *v);
  if (auto v = get("rf.threads")) c.rf.threads = parse_number<int>("rf.threads", *v);
  c.rf.seed = c.seed;

  if (auto v = get("tune.n_trials")) c.tune.n_trials = parse_number<int>("tune.n_trials", *v);
  if (auto v = get("tune.alpha")) c.tune.alpha = parse_number<double>("tune.alpha", *v);
  if (auto v = get("tune.sir_threshold_db"))
    c.tune.sir_threshold_db = parse_number<double>("tune.sir_threshold_db", *v);
  if (auto v = get("tune.copies")) c.tune.copies = parse_number<int>("tune.copies", *v);
  if (auto v = get("tune.reuse_cycle")) {
    c.reuse_cycle = parse_number<int>("tune.reuse_cycle", *v);
    if (*c.reuse_cycle < 1) throw input_error(kModule, "tune.reuse_cycle must be >= 1");
  }
  c.tune.seed = c.seed;
  c.tune.validate();

  if (auto v = get("pairs")) c.pairing = parse_pairing(*v);
  if (auto v = get("pca.k_rule")) c.k_rule = parse_k_rule(*v);
  if (auto v = get("epa.model")) c.epa_model = *v;
  if (auto v = get("compare.input")) c.compare_input = *v;
  if (auto v = get("compare.transform")) c.compare_transform = *v;
  if (auto v = get("compare.min_class_size"))
    c.compare_min_class_size = parse_number<long>("compare.min_class_size", *v);
  return c;
}

}  // namespace ellipt::cli
