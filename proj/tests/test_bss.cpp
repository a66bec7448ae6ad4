#include "support.hpp"

#include "ellipt/bss.hpp"
#include "ellipt/diag.hpp"
#include "ellipt/error.hpp"

#include <cmath>

using namespace ellipt;

namespace {

// Two independent uniform sources, rows = sources.
Eigen::MatrixXd sources(Eigen::Index t, std::uint64_t seed) {
  return test::uniform_matrix(t, 2, seed).transpose();
}

// e = s + w with w orthogonal to centred s and |w|^2 = |s|^2 / k, which makes
// the SIR exactly 10 log10(1 + k).
Eigen::RowVectorXd leak(const Eigen::RowVectorXd& s, double k, std::uint64_t seed) {
  const Eigen::RowVectorXd sc = s.array() - s.mean();
  Eigen::RowVectorXd w = test::uniform_matrix(1, s.size(), seed, -1.0, 1.0);
  w.array() -= w.mean();
  w -= (w.dot(sc) / sc.squaredNorm()) * sc;
  w *= std::sqrt(sc.squaredNorm() / k) / w.norm();
  return s + w;
}

}  // namespace

TEST(Sir, ClosedFormLeakage) {
  const Eigen::MatrixXd s = sources(1000, 1);
  for (double k : {1.0, 9.0, 99.0, 100.0, 999.0}) {
    Eigen::MatrixXd e(2, 1000);
    e.row(0) = leak(s.row(0), k, 2);
    e.row(1) = leak(s.row(1), k, 3);
    const auto r = bss::sir(s, e);
    EXPECT_NEAR(r.sir_db, 10.0 * std::log10(1.0 + k), 1e-9) << "k=" << k;
    for (double v : r.per_source_sir_db) EXPECT_NEAR(v, 10.0 * std::log10(1.0 + k), 1e-9);
  }
  Eigen::MatrixXd at(2, 1000);
  at.row(0) = leak(s.row(0), 99.0, 4);
  at.row(1) = leak(s.row(1), 99.0, 5);
  EXPECT_FALSE(bss::sir(s, at).recoverable);  // exactly 20 dB is not above 20
  at.row(0) = leak(s.row(0), 101.0, 4);
  at.row(1) = leak(s.row(1), 101.0, 5);
  EXPECT_TRUE(bss::sir(s, at).recoverable);
}

TEST(Sir, InvariantToScaleSignOffsetAndOrder) {
  const Eigen::MatrixXd s = sources(800, 6);
  Eigen::MatrixXd e(2, 800);
  e.row(0) = leak(s.row(0), 30.0, 7);
  e.row(1) = leak(s.row(1), 50.0, 8);
  const auto base = bss::sir(s, e);
  Eigen::MatrixXd moved(2, 800);
  moved.row(0) = -3.5 * e.row(1).array() + 12.0;
  moved.row(1) = 0.01 * e.row(0).array() - 4.0;
  const auto r = bss::sir(s, moved);
  EXPECT_NEAR(r.sir_db, base.sir_db, 1e-9);
  EXPECT_EQ(r.matching, (std::vector<Eigen::Index>{1, 0}));
  EXPECT_GT(r.gains[0], 0.0);
  EXPECT_LT(r.gains[1], 0.0);  // source 1 sits in the sign-flipped row
}

TEST(Sir, PerfectEstimateHitsCap) {
  const Eigen::MatrixXd s = sources(200, 9);
  EXPECT_DOUBLE_EQ(bss::sir(s, s).sir_db, bss::kSirCapDb);
}

TEST(Sir, Errors) {
  const Eigen::MatrixXd s = sources(100, 10);
  EXPECT_THROW(bss::sir(s, s.leftCols(50)), Error);
  Eigen::MatrixXd flat = s;
  flat.row(1).setConstant(0.3);
  EXPECT_THROW(bss::sir(flat, s), Error);
  std::vector<Warning> w;
  ScopedWarningCapture capture(w);
  const Eigen::MatrixXd five = test::uniform_matrix(5, 100, 11);
  bss::sir(five, five);
  EXPECT_EQ(w.size(), 1u);
}

TEST(Cumulants, SymmetricAndNearZeroForGaussians) {
  Stream rng = make_stream(12);
  std::normal_distribution<double> n;
  Eigen::MatrixXd z(3, 20000);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = n(rng);
  const auto q = bss::cumulant_matrices(z);
  ASSERT_EQ(q.rows(), 3);
  ASSERT_EQ(q.cols(), 27);
  EXPECT_LT(q.cwiseAbs().maxCoeff(), 0.15);
  for (Eigen::Index b = 0; b < 9; ++b) {
    const Eigen::MatrixXd blk = q.middleCols(b * 3, 3);
    EXPECT_LT((blk - blk.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
  // Uniform on [-sqrt3, sqrt3] has excess kurtosis -1.2.
  const Eigen::MatrixXd u = (test::uniform_matrix(1, 50000, 13, -1.0, 1.0) * std::sqrt(3.0));
  EXPECT_NEAR(bss::cumulant_matrices(u)(0, 0), -1.2, 0.05);
}

TEST(Jade, SeparatesLinearMixtures) {
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd s = sources(5000, 100 + seed);
    const Eigen::MatrixXd a = test::uniform_matrix(2, 2, 200 + seed, 0.2, 1.0);
    const auto res = bss::jade(a * s, 2);
    EXPECT_TRUE(res.converged);
    recovered += bss::sir(s, res.estimated_sources).recoverable;
    // Unmixed rows are white.
    const Eigen::MatrixXd z = res.unmixing * ((a * s).colwise() - (a * s).rowwise().mean());
    EXPECT_TRUE((z * z.transpose() / 4999.0).isApprox(Eigen::Matrix2d::Identity(), 1e-8));
  }
  EXPECT_GE(recovered, 19);
}

TEST(Jade, OvercompleteMixturesReduceToTwo) {
  const Eigen::MatrixXd s = sources(3000, 14);
  const Eigen::MatrixXd a = test::uniform_matrix(4, 2, 15, 0.1, 1.0);
  Eigen::MatrixXd x = a * s;
  x += 1e-6 * test::uniform_matrix(4, 3000, 16, -1.0, 1.0);
  const auto res = bss::jade(x, 2);
  EXPECT_GT(bss::sir(s, res.estimated_sources).sir_db, 20.0);
}

TEST(Jade, Errors) {
  const Eigen::MatrixXd s = sources(500, 17);
  EXPECT_THROW(bss::jade(s, 3), Error);
  EXPECT_THROW(bss::jade(s.leftCols(15), 2), Error);
  Eigen::MatrixXd flat = s;
  flat.row(0).setConstant(1.0);
  EXPECT_THROW(bss::jade(flat, 2), Error);
  Eigen::MatrixXd twin(2, 500);
  twin.row(0) = s.row(0);
  twin.row(1) = 2.0 * s.row(0);
  try {
    bss::jade(twin, 2);
    FAIL() << "rank-deficient mixtures accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
    EXPECT_EQ(e.module(), "bss");
  }
}

TEST(Attack, LinearControlRecoversEllipticalDoesNot) {
  int linear_ok = 0, epa_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd x = test::uniform_matrix(5000, 2, 300 + seed);
    bss::AttackOptions opt;
    opt.linear_control = true;
    linear_ok += bss::bss_attack(x.col(0), x.col(1), opt, seed).recoverable;
    opt.linear_control = false;
    epa_ok += bss::bss_attack(x.col(0), x.col(1), opt, seed).recoverable;
  }
  EXPECT_EQ(linear_ok, 20);
  EXPECT_LE(epa_ok, 4);
}

TEST(Attack, DeterministicWeightsAndErrors) {
  const Eigen::MatrixXd x = test::uniform_matrix(400, 2, 18);
  bss::AttackOptions opt;
  opt.fixed_weights = {0.3};
  const auto a = bss::bss_attack(x.col(0), x.col(1), opt, 5);
  const auto b = bss::bss_attack(x.col(0), x.col(1), opt, 5);
  EXPECT_EQ(a.sir_db, b.sir_db);
  ASSERT_EQ(a.weights.size(), 4u);
  EXPECT_EQ(a.weights[0], 0.3);
  for (double w : a.weights) {
    EXPECT_GE(w, 0.01);
    EXPECT_LE(w, 0.99);
  }
  EXPECT_THROW(bss::bss_attack(x.col(0).head(50), x.col(1).head(50), opt, 1), Error);
  const Eigen::VectorXd neg = x.col(0).array() - 0.5;
  EXPECT_THROW(bss::bss_attack(neg, x.col(1), opt, 1), Error);
  opt.copies = 1;
  opt.fixed_weights.clear();
  EXPECT_THROW(bss::bss_attack(x.col(0), x.col(1), opt, 1), Error);
}
