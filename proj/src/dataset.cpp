#include "ellipt/dataset.hpp"

#include "ellipt/diag.hpp"
#include "ellipt/error.hpp"
#include "ellipt/rforest.hpp"
#include "ellipt/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ellipt {
namespace {

constexpr const char* kModule = "dataset";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1)
    throw input_error(kModule, "dataset is empty");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw input_error(kModule, "label count does not match row count");
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw input_error(kModule, "feature name count does not match column count");
  if (!features.allFinite()) throw input_error(kModule, "non-finite feature value");
  for (int l : labels) {
    if (l < 0) throw input_error(kModule, "negative class id");
    if (!class_names.contains(l))
      throw input_error(kModule, fmt::format("class id {} has no display name", l));
  }
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.scaling = scaling;
  return out;
}

Dataset Dataset::select_columns(const std::vector<Eigen::Index>& cols) const {
  Dataset out;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= features.cols())
      throw input_error(kModule, fmt::format("column index {} out of range", cols[j]));
    out.features.col(static_cast<Eigen::Index>(j)) = features.col(cols[j]);
    out.feature_names.push_back(feature_names[static_cast<std::size_t>(cols[j])]);
  }
  out.labels = labels;
  out.class_names = class_names;
  if (scaling) {
    ColumnScaling s;
    s.mean.resize(static_cast<Eigen::Index>(cols.size()));
    s.sd.resize(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      s.mean(static_cast<Eigen::Index>(j)) = scaling->mean(cols[j]);
      s.sd(static_cast<Eigen::Index>(j)) = scaling->sd(cols[j]);
    }
    out.scaling = std::move(s);
  }
  return out;
}

Eigen::Index Dataset::column_index(const std::string& name) const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end())
    throw input_error(kModule, fmt::format("no feature named '{}'", name));
  return static_cast<Eigen::Index>(it - feature_names.begin());
}

namespace dataset {

std::map<std::string, int> load_class_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error(kModule, fmt::format("cannot open class map '{}'", path.string()));
  std::map<std::string, int> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2)
      throw input_error(kModule, fmt::format("class map line '{}' is not `id,name`", line));
    double id = 0;
    if (!parse_double(cells[0], id)) {
      if (header) {
        header = false;
        continue;
      }
      throw input_error(kModule, fmt::format("class map id '{}' is not a number", cells[0]));
    }
    header = false;
    out.emplace(std::string(cells[1]), static_cast<int>(id));
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const PreprocessConfig& config, const std::map<std::string, int>& class_map) {
  std::ifstream in(path);
  if (!in) throw input_error(kModule, fmt::format("cannot open '{}'", path.string()));

  std::string header_line;
  while (std::getline(in, header_line) && !header_line.empty() && header_line.front() == '#') {
  }
  if (header_line.empty() || header_line.front() == '#')
    throw input_error(kModule, fmt::format("'{}' has no header row", path.string()));
  const auto header = split_csv(header_line);

  std::optional<std::size_t> label_at;
  std::set<std::string> to_drop(config.drop_columns.begin(), config.drop_columns.end());
  std::set<std::string> seen;
  std::vector<std::size_t> keep;
  Dataset ds;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string name(header[j]);
    seen.insert(name);
    if (name == label_column) {
      label_at = j;
    } else if (!to_drop.contains(name)) {
      keep.push_back(j);
      ds.feature_names.push_back(name);
    }
  }
  if (!label_at)
    throw input_error(kModule, fmt::format("label column '{}' not found", label_column));
  for (const auto& d : to_drop)
    if (!seen.contains(d))
      throw input_error(kModule, fmt::format("drop column '{}' not in header", d));
  if (keep.empty()) throw input_error(kModule, "no feature columns left");

  std::vector<double> values;
  std::map<std::string, int> ids = class_map;
  const bool fixed_ids = !class_map.empty();
  int next_id = 0;
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw input_error(kModule, fmt::format("line {}: expected {} cells, found {}", line_no,
                                             header.size(), cells.size()));
    for (std::size_t j : keep) {
      double v = 0;
      if (!parse_double(cells[j], v))
        throw input_error(kModule, fmt::format("line {}: column '{}' value '{}' is not numeric",
                                               line_no, header[j], cells[j]));
      if (!std::isfinite(v))
        throw input_error(kModule, fmt::format("line {}: column '{}' is not finite", line_no,
                                               header[j]));
      values.push_back(v);
    }
    const std::string label(cells[*label_at]);
    auto it = ids.find(label);
    if (it == ids.end()) {
      if (fixed_ids)
        throw input_error(kModule,
                          fmt::format("line {}: label '{}' missing from class map", line_no, label));
      while (std::any_of(ids.begin(), ids.end(), [&](const auto& kv) { return kv.second == next_id; }))
        ++next_id;
      it = ids.emplace(label, next_id++).first;
    }
    ds.labels.push_back(it->second);
  }
  if (ds.labels.empty()) throw input_error(kModule, fmt::format("'{}' has no data rows", path.string()));

  const auto n = static_cast<Eigen::Index>(ds.labels.size());
  const auto p = static_cast<Eigen::Index>(keep.size());
  ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, p);
  for (const auto& [name, id] : ids) ds.class_names[id] = name;
  ds.validate();

  if (config.min_class_count > 0) ds = filter_min_count(ds, config.min_class_count);
  if (config.nonnegative_shift) ds = shift_nonnegative(ds).data;
  if (config.standardize) ds = standardize(ds).data;
  return ds;
}

ClassStats class_counts(const Dataset& ds) {
  std::map<int, long> counts;
  for (const auto& [id, name] : ds.class_names) counts[id] = 0;
  for (int l : ds.labels) ++counts[l];
  ClassStats out;
  for (const auto& [id, c] : counts) {
    const auto it = ds.class_names.find(id);
    out.push_back({id, it == ds.class_names.end() ? std::to_string(id) : it->second, c});
  }
  return out;
}

Dataset filter_min_count(const Dataset& ds, long min_count) {
  if (min_count < 0) throw input_error(kModule, "min_count must be nonnegative");
  std::map<int, long> counts;
  for (int l : ds.labels) ++counts[l];
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < ds.rows(); ++i)
    if (counts[ds.labels[static_cast<std::size_t>(i)]] >= min_count) rows.push_back(i);
  if (rows.empty())
    throw input_error(kModule, fmt::format("no class has at least {} rows", min_count));
  Dataset out = ds.select_rows(rows);
  // Ids stay stable; only names of surviving classes are kept.
  std::map<int, std::string> names;
  for (int l : out.labels) names[l] = ds.class_names.at(l);
  out.class_names = std::move(names);
  return out;
}

ShiftResult shift_nonnegative(const Dataset& ds) {
  ShiftResult r{ds, Eigen::VectorXd::Zero(ds.cols())};
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    const double m = ds.features.col(j).minCoeff();
    if (m < 0) {
      r.shift(j) = -m;
      r.data.features.col(j).array() -= m;
    }
  }
  if (r.shift.any()) r.data.scaling.reset();
  return r;
}

StandardizeResult standardize(const Dataset& ds) {
  if (ds.rows() < 2) throw input_error(kModule, "standardize needs at least 2 rows");
  StandardizeResult r;
  std::vector<Eigen::Index> kept;
  std::vector<double> means, sds;
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    const auto col = ds.features.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / double(ds.rows() - 1));
    if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
      const auto& name = ds.feature_names[static_cast<std::size_t>(j)];
      r.dropped.push_back(name);
      warn(kModule, fmt::format("dropping constant column '{}'", name));
      continue;
    }
    kept.push_back(j);
    means.push_back(mean);
    sds.push_back(sd);
  }
  if (kept.empty()) throw input_error(kModule, "all columns are constant");

  Dataset out = ds.select_columns(kept);
  r.mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  r.sd = Eigen::Map<Eigen::VectorXd>(sds.data(), static_cast<Eigen::Index>(sds.size()));
  out.features = (out.features.rowwise() - r.mean.transpose()).array().rowwise() /
                 r.sd.transpose().array();
  // Compose with any earlier scaling so inversion always reaches raw units.
  if (out.scaling) {
    ColumnScaling composed;
    composed.mean = out.scaling->mean + out.scaling->sd.cwiseProduct(r.mean);
    composed.sd = out.scaling->sd.cwiseProduct(r.sd);
    out.scaling = std::move(composed);
  } else {
    out.scaling = ColumnScaling{r.mean, r.sd};
  }
  r.data = std::move(out);
  return r;
}

EliminationResult backward_elimination(const Dataset& ds, const rforest::RfConfig& rf_config,
                                       double delta, std::uint64_t seed) {
  if (ds.cols() < kEliminationFloor)
    throw input_error(kModule, "backward elimination needs at least 2 features");

  std::vector<Eigen::Index> current(static_cast<std::size_t>(ds.cols()));
  for (std::size_t j = 0; j < current.size(); ++j) current[j] = static_cast<Eigen::Index>(j);

  EliminationResult result;
  std::vector<Eigen::Index> previous_ranked;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t round = 0;; ++round) {
    const Dataset sub = ds.select_columns(current);
    rforest::RfConfig cfg = rf_config;
    if (cfg.mtry && *cfg.mtry > sub.cols()) cfg.mtry = static_cast<int>(sub.cols());
    const auto forest = rforest::train(sub, cfg);
    const double err = rforest::oob_report(forest, sub).overall_oob;

    if (!previous_ranked.empty() && err > best + delta) {
      result.features = previous_ranked;
      break;
    }
    best = std::min(best, err);

    const auto scores = rforest::permutation_importance(forest, sub, derive_seed(seed, {round}));
    std::vector<Eigen::Index> ranked;
    for (const auto& s : scores) ranked.push_back(current[static_cast<std::size_t>(s.feature)]);
    result.history.push_back({ranked, err});

    if (static_cast<Eigen::Index>(ranked.size()) <= kEliminationFloor) {
      result.features = ranked;
      break;
    }
    previous_ranked = ranked;
    current.assign(ranked.begin(), ranked.end() - 1);
  }
  for (auto j : result.features) result.names.push_back(ds.feature_names[static_cast<std::size_t>(j)]);
  return result;
}

}  // namespace dataset
}  // namespace ellipt
