#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ellipt {

namespace rforest {
struct RfConfig;
}

// Per-column affine map recorded by standardize(); PCA needs it to undo the
// scaling on reconstruction.
struct ColumnScaling {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

// n rows x p columns of finite reals plus one class label per row.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::map<int, std::string> class_names;
  std::optional<ColumnScaling> scaling;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }

  // Throws ellipt::Error when any Dataset invariant is broken.
  void validate() const;

  // Row subset, keeping class_names intact.
  Dataset select_rows(const std::vector<Eigen::Index>& rows) const;
  // Column subset in the given order.
  Dataset select_columns(const std::vector<Eigen::Index>& cols) const;
  Eigen::Index column_index(const std::string& name) const;
};

namespace dataset {

struct ClassCount {
  int label = 0;
  std::string name;
  long count = 0;
};
using ClassStats = std::vector<ClassCount>;

struct PreprocessConfig {
  std::vector<std::string> drop_columns;
  long min_class_count = 0;
  bool nonnegative_shift = false;
  bool standardize = false;
};

// Optional explicit label -> class id table (`id,name` CSV). Without one,
// ids follow first appearance in the file.
std::map<std::string, int> load_class_map(const std::filesystem::path& path);

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const PreprocessConfig& config = {},
                 const std::map<std::string, int>& class_map = {});

// One row per class id, ascending. Classes with zero rows are included when
// they appear in class_names.
ClassStats class_counts(const Dataset& ds);

Dataset filter_min_count(const Dataset& ds, long min_count);

struct ShiftResult {
  Dataset data;
  Eigen::VectorXd shift;
};
ShiftResult shift_nonnegative(const Dataset& ds);

struct StandardizeResult {
  Dataset data;
  Eigen::VectorXd mean;  // retained columns only
  Eigen::VectorXd sd;
  std::vector<std::string> dropped;  // constant columns
};
StandardizeResult standardize(const Dataset& ds);

struct EliminationStep {
  std::vector<Eigen::Index> features;  // into the input dataset, ranked
  double oob_error = 0.0;
};

struct EliminationResult {
  std::vector<Eigen::Index> features;  // survivors, decreasing importance
  std::vector<std::string> names;
  std::vector<EliminationStep> history;
};

inline constexpr Eigen::Index kEliminationFloor = 2;

EliminationResult backward_elimination(
    const Dataset& ds, const rforest::RfConfig& rf_config,
    double delta = 0.0, std::uint64_t seed = 1);

}  // namespace dataset
}  // namespace ellipt
