#pragma once

#include "ellipt/dataset.hpp"
#include "ellipt/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace ellipt::epa {

using FeaturePair = std::pair<Eigen::Index, Eigen::Index>;

// The perturbation y_i = sqrt(a_i x_first^2 + (1 - a_i) x_second^2) + alpha*eps
// applied pair by pair. An odd trailing feature can be passed through
// unperturbed.
struct EpaModel {
  std::vector<FeaturePair> pairs;
  std::vector<double> a;
  double alpha = 0.0;
  std::optional<Eigen::Index> passthrough;

  // Checks that pairs and passthrough cover [0, p) exactly once.
  void validate(Eigen::Index p) const;

  Eigen::Index output_dim() const {
    return static_cast<Eigen::Index>(pairs.size()) + (passthrough ? 1 : 0);
  }
};

// (0,1), (2,3), ... with the final column passed through when p is odd.
std::vector<FeaturePair> consecutive_pairs(Eigen::Index p);
EpaModel make_model(Eigen::Index p, std::vector<double> a, double alpha,
                    std::vector<FeaturePair> pairs = {});

// Weighted quadratic mean; the noiseless part of the pair map.
template <typename Scalar>
Scalar elliptical_norm(Scalar x1, Scalar x2, Scalar a) {
  return std::sqrt(a * x1 * x1 + (Scalar(1) - a) * x2 * x2);
}

double pair_transform(double x1, double x2, double a, double alpha, Stream& rng);

// Column form: one fresh standard-normal draw per entry from `rng`.
Eigen::VectorXd pair_transform(const Eigen::Ref<const Eigen::VectorXd>& x1,
                               const Eigen::Ref<const Eigen::VectorXd>& x2, double a,
                               double alpha, Stream& rng);

// Noise for cell (row, pair) comes from stream (seed, row, pair), so output
// does not depend on evaluation order.
Dataset transform(const Dataset& ds, const EpaModel& model, std::uint64_t seed);

struct EllipseParams {
  double y_value = 1.0;
  double a = 0.5;
  double b = 0.5;
  double alpha = 0.0;
  int n_points = 200;
};

// Points (x1, x2) with x2 = sqrt(((y - alpha*eps)^2 - a*x1^2) / b), x1 uniform
// on [0, (y - alpha*eps)/sqrt(a)]. Points with a negative radicand are dropped.
std::vector<Eigen::Vector2d> ellipse_locus(const EllipseParams& params, std::uint64_t seed);

// |corr(y, x1)| + |corr(y, x2)| for y produced by the pair map.
double correlation_objective(const Eigen::Ref<const Eigen::VectorXd>& x1,
                             const Eigen::Ref<const Eigen::VectorXd>& x2, double a,
                             double alpha, std::uint64_t seed);

// Flat text model file: `alpha`, then one `pair <first> <second> <a>` line per
// pair and an optional `passthrough <index>` line.
void write_model(std::ostream& out, const EpaModel& model,
                 const std::vector<std::string>& feature_names = {});
void save_model(const std::filesystem::path& path, const EpaModel& model,
                const std::vector<std::string>& feature_names = {});
EpaModel read_model(std::istream& in);
EpaModel load_model(const std::filesystem::path& path);

}  // namespace ellipt::epa
