#pragma once

#include "ellipt/dataset.hpp"
#include "ellipt/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

namespace ellipt::test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(::testing::TempDir()) / ("ellipt_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Gaussian blobs, one per class, centred `sep` apart on the first feature;
// remaining features are pure noise.
inline Dataset make_blobs(int per_class, int classes, Eigen::Index p, double sep,
                          std::uint64_t seed) {
  Dataset ds;
  const Eigen::Index n = per_class * classes;
  ds.features.resize(n, p);
  Stream rng = make_stream(seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i) / per_class;
    ds.labels.push_back(label);
    for (Eigen::Index j = 0; j < p; ++j) ds.features(i, j) = normal(rng) + (j == 0 ? sep * label : 0.0);
  }
  for (Eigen::Index j = 0; j < p; ++j) ds.feature_names.push_back("f" + std::to_string(j + 1));
  for (int c = 0; c < classes; ++c) ds.class_names[c] = "c" + std::to_string(c);
  return ds;
}

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                      double lo = 0.0, double hi = 1.0) {
  Stream rng = make_stream(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

}  // namespace ellipt::test
