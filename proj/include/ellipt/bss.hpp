#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace ellipt::bss {

inline constexpr double kRecoverableDb = 20.0;
inline constexpr double kSirCapDb = 300.0;
inline constexpr double kRotationTolerance = 1e-8;
inline constexpr int kMaxSweeps = 100;

struct JadeResult {
  Eigen::MatrixXd unmixing;           // m x K
  Eigen::MatrixXd estimated_sources;  // m x T, = unmixing * mixtures
  Eigen::MatrixXd whitener;           // m x K
  int sweeps_used = 0;
  bool converged = false;
};

// JADE: whiten to m dimensions, then jointly diagonalize the m^2 fourth-order
// cumulant matrices of the whitened data with Givens rotations. Non-
// convergence is reported through `converged`; rank < m throws.
JadeResult jade(const Eigen::MatrixXd& mixtures, Eigen::Index m);

// The m^2 cumulant matrices Q^{pq}_{ij} = cum(z_i, z_j, z_p, z_q) of centred
// rows z, stacked horizontally (m x m^3).
Eigen::MatrixXd cumulant_matrices(const Eigen::MatrixXd& z);

struct SirReport {
  double sir_db = 0.0;
  std::vector<double> per_source_sir_db;
  bool recoverable = false;
  std::vector<Eigen::Index> matching;  // matching[i] = estimated row paired with source i
  std::vector<double> gains;           // signed least-squares scale per matched pair
  // Filled by bss_attack.
  std::vector<double> weights;
  bool jade_converged = true;
  int jade_sweeps = 0;
};

// Matched-signal power over residual power, in dB, capped at kSirCapDb. Rows
// are mean-removed first: separation is defined up to offset, scale and sign.
SirReport sir(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& estimated);

struct AttackOptions {
  int copies = 4;                     // K
  double alpha = 0.001;
  std::vector<double> fixed_weights;  // used first; the rest are drawn
  bool linear_control = false;        // a*x1 + (1-a)*x2 instead of the elliptical map
};

// Builds K modulated copies of (x1, x2) with random weights a ~ U(0.01, 0.99),
// separates them with JADE (m = 2) and scores the estimates against (x1, x2).
SirReport bss_attack(const Eigen::Ref<const Eigen::VectorXd>& x1,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const AttackOptions& options,
                     std::uint64_t seed);

}  // namespace ellipt::bss
