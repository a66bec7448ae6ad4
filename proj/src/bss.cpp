#include "ellipt/bss.hpp"

#include "ellipt/diag.hpp"
#include "ellipt/epa.hpp"
#include "ellipt/error.hpp"
#include "ellipt/linalg.hpp"
#include "ellipt/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace ellipt::bss {
namespace {

constexpr const char* kModule = "bss";
constexpr double kWhiteningRankTol = 1e-10;

double to_db(double signal, double residual) {
  if (residual <= 0.0) return kSirCapDb;
  return std::min(kSirCapDb, 10.0 * std::log10(signal / residual));
}

}  // namespace

Eigen::MatrixXd cumulant_matrices(const Eigen::MatrixXd& z) {
  const Eigen::Index m = z.rows();
  const auto t = static_cast<double>(z.cols());
  const Eigen::MatrixXd r = z * z.transpose() / t;
  Eigen::MatrixXd out(m, m * m * m);
  Eigen::ArrayXd zpq(z.cols());
  for (Eigen::Index p = 0; p < m; ++p) {
    for (Eigen::Index q = 0; q < m; ++q) {
      zpq = z.row(p).array() * z.row(q).array();
      const Eigen::MatrixXd weighted = z.array().rowwise() * zpq.transpose();
      Eigen::Ref<Eigen::MatrixXd> block = out.middleCols((p * m + q) * m, m);
      block = weighted * z.transpose() / t;
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
          block(i, j) -= r(i, j) * r(p, q) + r(i, p) * r(j, q) + r(i, q) * r(j, p);
    }
  }
  return out;
}

JadeResult jade(const Eigen::MatrixXd& mixtures, Eigen::Index m) {
  const Eigen::Index k = mixtures.rows();
  const Eigen::Index t = mixtures.cols();
  if (m < 2 || k < m)
    throw input_error(kModule, fmt::format("jade needs K >= m >= 2 (K={}, m={})", k, m));
  if (t < 10 * m) throw input_error(kModule, fmt::format("jade needs T >= 10m (T={})", t));
  if (!mixtures.allFinite()) throw input_error(kModule, "mixtures contain non-finite values");
  for (Eigen::Index i = 0; i < k; ++i)
    if (mixtures.row(i).minCoeff() == mixtures.row(i).maxCoeff())
      throw input_error(kModule, fmt::format("mixture row {} is constant", i));

  const Eigen::VectorXd mean = mixtures.rowwise().mean();
  const Eigen::MatrixXd centered = mixtures.colwise() - mean;

  // Whitening through the covariance eigendecomposition.
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(t - 1);
  const auto eig = linalg::jacobi_eigen(cov);
  if (!(eig.values(m - 1) > kWhiteningRankTol * eig.values(0)))
    throw numerical_error(kModule,
                          fmt::format("whitening failed: mixture covariance rank < {} "
                                      "(eigenvalue {:.3g} vs {:.3g})",
                                      m, eig.values(m - 1), eig.values(0)));
  JadeResult res;
  res.whitener = eig.values.head(m).cwiseSqrt().cwiseInverse().asDiagonal() *
                 eig.vectors.leftCols(m).transpose();
  const Eigen::MatrixXd z = res.whitener * centered;

  Eigen::MatrixXd cm = cumulant_matrices(z);
  const Eigen::Index n_mat = m * m;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(m, m);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < m - 1; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        // Closed-form Givens angle maximizing the diagonal energy of the family.
        double g00 = 0, g01 = 0, g11 = 0;
        for (Eigen::Index s = 0; s < n_mat; ++s) {
          const auto blk = cm.middleCols(s * m, m);
          const double d = blk(p, p) - blk(q, q);
          const double o = blk(p, q) + blk(q, p);
          g00 += d * d;
          g01 += d * o;
          g11 += o * o;
        }
        const double ton = g00 - g11;
        const double toff = 2.0 * g01;
        const double theta = 0.5 * std::atan2(toff, ton + std::sqrt(ton * ton + toff * toff));
        const double c = std::cos(theta);
        const double sn = std::sin(theta);
        if (std::abs(sn) <= kRotationTolerance) continue;
        rotated = true;
        for (Eigen::Index s = 0; s < n_mat; ++s) {
          auto blk = cm.middleCols(s * m, m);
          const Eigen::RowVectorXd rp = blk.row(p);
          const Eigen::RowVectorXd rq = blk.row(q);
          blk.row(p) = c * rp + sn * rq;
          blk.row(q) = -sn * rp + c * rq;
          const Eigen::VectorXd cp = blk.col(p);
          const Eigen::VectorXd cq = blk.col(q);
          blk.col(p) = c * cp + sn * cq;
          blk.col(q) = -sn * cp + c * cq;
        }
        const Eigen::VectorXd vp = v.col(p);
        const Eigen::VectorXd vq = v.col(q);
        v.col(p) = c * vp + sn * vq;
        v.col(q) = -sn * vp + c * vq;
      }
    }
    res.sweeps_used = sweep + 1;
    if (!rotated) {
      res.converged = true;
      break;
    }
  }

  res.unmixing = v.transpose() * res.whitener;
  res.estimated_sources = res.unmixing * mixtures;
  return res;
}

SirReport sir(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& estimated) {
  if (sources.rows() != estimated.rows() || sources.cols() != estimated.cols())
    throw input_error(kModule, fmt::format("sir shape mismatch: {}x{} vs {}x{}", sources.rows(),
                                           sources.cols(), estimated.rows(), estimated.cols()));
  const Eigen::Index m = sources.rows();
  if (m < 1 || sources.cols() < 2) throw input_error(kModule, "sir needs at least one source");
  for (Eigen::Index i = 0; i < m; ++i)
    if (sources.row(i).maxCoeff() == sources.row(i).minCoeff())
      throw input_error(kModule, fmt::format("source {} has zero power (constant row)", i));
  if (m > 4) warn(kModule, "greedy matching may be suboptimal for more than 4 sources");

  Eigen::MatrixXd corr(m, m);  // (source, estimate)
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      corr(i, j) = std::abs(linalg::pearson(sources.row(i).transpose(), estimated.row(j).transpose()));

  SirReport r;
  r.matching.assign(static_cast<std::size_t>(m), -1);
  std::vector<bool> est_used(static_cast<std::size_t>(m), false);
  for (Eigen::Index step = 0; step < m; ++step) {
    double best = -1.0;
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (r.matching[static_cast<std::size_t>(i)] >= 0) continue;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (est_used[static_cast<std::size_t>(j)]) continue;
        if (corr(i, j) > best) {
          best = corr(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    r.matching[static_cast<std::size_t>(bi)] = bj;
    est_used[static_cast<std::size_t>(bj)] = true;
  }

  double signal_total = 0.0;
  double residual_total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::RowVectorXd s = sources.row(i).array() - sources.row(i).mean();
    const auto& raw = estimated.row(r.matching[static_cast<std::size_t>(i)]);
    const Eigen::RowVectorXd e = raw.array() - raw.mean();
    const double ee = e.squaredNorm();
    const double gain = ee > 0.0 ? s.dot(e) / ee : 0.0;
    const double signal = s.squaredNorm();
    const double residual = (s - gain * e).squaredNorm();
    r.gains.push_back(gain);
    r.per_source_sir_db.push_back(to_db(signal, residual));
    signal_total += signal;
    residual_total += residual;
  }
  r.sir_db = to_db(signal_total, residual_total);
  r.recoverable = r.sir_db > kRecoverableDb;
  return r;
}

SirReport bss_attack(const Eigen::Ref<const Eigen::VectorXd>& x1,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const AttackOptions& options,
                     std::uint64_t seed) {
  if (x1.size() != x2.size()) throw input_error(kModule, "attack columns differ in length");
  if (x1.size() < 100) throw input_error(kModule, "attack needs at least 100 observations");
  if (options.copies < 2) throw input_error(kModule, "attack needs at least 2 copies");
  if (static_cast<int>(options.fixed_weights.size()) > options.copies)
    throw input_error(kModule, "more fixed weights than copies");
  if (x1.minCoeff() < 0.0 || x2.minCoeff() < 0.0)
    throw input_error(kModule, "attack columns must be nonnegative");

  std::vector<double> weights = options.fixed_weights;
  Stream weight_rng = make_stream(seed, {streams::kAttack, 0});
  std::uniform_real_distribution<double> uniform(0.01, 0.99);
  while (static_cast<int>(weights.size()) < options.copies) weights.push_back(uniform(weight_rng));

  const Eigen::Index t = x1.size();
  Eigen::MatrixXd mixtures(options.copies, t);
  Stream noise_rng = make_stream(seed, {streams::kAttack, 1});
  std::normal_distribution<double> normal;
  for (int k = 0; k < options.copies; ++k) {
    const double a = weights[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < t; ++i) {
      const double clean = options.linear_control ? a * x1(i) + (1.0 - a) * x2(i)
                                                  : epa::elliptical_norm(x1(i), x2(i), a);
      mixtures(k, i) = clean + options.alpha * normal(noise_rng);
    }
  }

  const JadeResult jr = jade(mixtures, 2);
  Eigen::MatrixXd sources(2, t);
  sources.row(0) = x1.transpose();
  sources.row(1) = x2.transpose();
  SirReport r = sir(sources, jr.estimated_sources);
  r.weights = std::move(weights);
  r.jade_converged = jr.converged;
  r.jade_sweeps = jr.sweeps_used;
  return r;
}

}  // namespace ellipt::bss
