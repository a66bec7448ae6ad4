#include "ellipt/pca.hpp"

#include "ellipt/error.hpp"
#include "ellipt/linalg.hpp"

#include <fmt/format.h>

#include <fstream>
#include <ostream>

namespace ellipt::pca {
namespace {

constexpr const char* kModule = "pca";
constexpr double kOrthonormalTol = 1e-8;

}  // namespace

PcaModel fit(const Dataset& standardized) {
  if (!standardized.scaling)
    throw input_error(kModule, "fit needs standardized data (dataset::standardize)");
  if (standardized.rows() < 2) throw input_error(kModule, "fit needs at least 2 rows");
  standardized.validate();

  const auto& x = standardized.features;
  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  model.scaling = *standardized.scaling;
  model.feature_names = standardized.feature_names;

  const Eigen::MatrixXd cov = linalg::column_covariance(x);
  auto eig = linalg::jacobi_eigen(cov);
  if (!eig.converged)
    throw numerical_error(kModule, fmt::format("Jacobi did not converge in {} sweeps", eig.sweeps));
  model.jacobi_sweeps = eig.sweeps;
  // Rank-deficient inputs leave round-off sized negatives.
  model.eigenvalues = eig.values.cwiseMax(0.0);
  model.components = std::move(eig.vectors);

  for (Eigen::Index k = 0; k < model.components.cols(); ++k) {
    Eigen::Index at = 0;
    model.components.col(k).cwiseAbs().maxCoeff(&at);
    if (model.components(at, k) < 0) model.components.col(k) *= -1.0;
  }

  const Eigen::Index p = model.dim();
  const double ortho = (model.components.transpose() * model.components -
                        Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
  if (ortho > kOrthonormalTol)
    throw numerical_error(kModule, fmt::format("components not orthonormal (error {:.3g})", ortho));
  for (Eigen::Index k = 1; k < p; ++k)
    if (model.eigenvalues(k) > model.eigenvalues(k - 1))
      throw numerical_error(kModule, "eigenvalues not sorted");
  return model;
}

Dataset transform(const Dataset& ds, const PcaModel& model, Eigen::Index k) {
  const Eigen::Index p = model.dim();
  if (k < 1 || k > p) throw input_error(kModule, fmt::format("k={} outside [1, {}]", k, p));
  if (ds.cols() != p)
    throw input_error(kModule, fmt::format("dataset has {} columns, model has {}", ds.cols(), p));

  Eigen::MatrixXd z;
  if (ds.scaling) {
    z = ds.features;
  } else {
    z = (ds.features.rowwise() - model.scaling.mean.transpose()).array().rowwise() /
        model.scaling.sd.transpose().array();
  }

  Dataset out;
  out.features = (z.rowwise() - model.mean.transpose()) * model.components.leftCols(k);
  out.labels = ds.labels;
  out.class_names = ds.class_names;
  for (Eigen::Index j = 0; j < k; ++j) out.feature_names.push_back(fmt::format("PC{}", j + 1));
  return out;
}

Dataset invert(const Dataset& scores, const PcaModel& model, Eigen::Index k) {
  const Eigen::Index p = model.dim();
  if (k < 1 || k > p) throw input_error(kModule, fmt::format("k={} outside [1, {}]", k, p));
  if (scores.cols() != k)
    throw input_error(kModule, fmt::format("scores have {} columns, expected k={}", scores.cols(), k));

  const Eigen::MatrixXd z =
      (scores.features * model.components.leftCols(k).transpose()).rowwise() +
      model.mean.transpose();
  Dataset out;
  out.features = (z.array().rowwise() * model.scaling.sd.transpose().array()).matrix().rowwise() +
                 model.scaling.mean.transpose();
  out.labels = scores.labels;
  out.class_names = scores.class_names;
  out.feature_names = model.feature_names;
  return out;
}

Eigen::Index select_k_kaiser(const PcaModel& model) {
  return (model.eigenvalues.array() > 1.0).count();
}

Eigen::Index select_k_variance(const PcaModel& model, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw input_error(kModule, "variance fraction must be in (0, 1]");
  const double total = model.eigenvalues.sum();
  if (!(total > 0.0)) throw numerical_error(kModule, "all eigenvalues are zero");
  double running = 0.0;
  for (Eigen::Index k = 0; k < model.dim(); ++k) {
    running += model.eigenvalues(k);
    // Relative slack so frac = 1 is reachable despite summation round-off.
    if (running / total >= frac - 1e-12) return k + 1;
  }
  return model.dim();
}

void write_model(std::ostream& out, const PcaModel& model) {
  const Eigen::Index p = model.dim();
  out << "# ellipt pca model\n";
  out << fmt::format("dim {}\n", p);
  auto row = [&](const char* key, const Eigen::VectorXd& v) {
    out << key;
    for (Eigen::Index j = 0; j < v.size(); ++j) out << fmt::format(" {:.17g}", v(j));
    out << '\n';
  };
  out << "features";
  for (const auto& n : model.feature_names) out << ' ' << n;
  out << '\n';
  row("scale_mean", model.scaling.mean);
  row("scale_sd", model.scaling.sd);
  row("mean", model.mean);
  row("eigenvalues", model.eigenvalues);
  for (Eigen::Index i = 0; i < p; ++i) row("component_row", model.components.row(i).transpose());
}

void save_model(const std::filesystem::path& path, const PcaModel& model) {
  std::ofstream out(path);
  if (!out) throw input_error(kModule, fmt::format("cannot write '{}'", path.string()));
  write_model(out, model);
}

}  // namespace ellipt::pca
