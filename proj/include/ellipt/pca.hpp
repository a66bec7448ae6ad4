#pragma once

#include "ellipt/dataset.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ellipt::pca {

struct PcaModel {
  Eigen::VectorXd mean;          // of the standardized data
  Eigen::MatrixXd components;    // p x p, orthonormal columns, descending eigenvalue
  Eigen::VectorXd eigenvalues;   // nonincreasing, >= 0
  ColumnScaling scaling;         // raw -> standardized map of the training data
  std::vector<std::string> feature_names;
  int jacobi_sweeps = 0;

  Eigen::Index dim() const { return eigenvalues.size(); }
};

// Requires a dataset produced by dataset::standardize, so the eigenvalues are
// those of the correlation matrix.
PcaModel fit(const Dataset& standardized);

// Projects onto the first k components. Standardized input is used as is;
// raw input is standardized with the model's scaling first.
Dataset transform(const Dataset& ds, const PcaModel& model, Eigen::Index k);

// Maps scores back to raw feature units.
Dataset invert(const Dataset& scores, const PcaModel& model, Eigen::Index k);

// Number of eigenvalues strictly greater than 1.
Eigen::Index select_k_kaiser(const PcaModel& model);

// Smallest k whose cumulative eigenvalue share reaches frac.
Eigen::Index select_k_variance(const PcaModel& model, double frac);

void write_model(std::ostream& out, const PcaModel& model);
void save_model(const std::filesystem::path& path, const PcaModel& model);

}  // namespace ellipt::pca
