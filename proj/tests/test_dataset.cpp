#include "support.hpp"

#include "ellipt/dataset.hpp"
#include "ellipt/diag.hpp"
#include "ellipt/error.hpp"
#include "ellipt/rforest.hpp"

#include <limits>

using namespace ellipt;
using ellipt::test::scratch_dir;
using ellipt::test::write_text;

namespace {

std::filesystem::path small_csv(const std::string& name, const std::string& body) {
  const auto dir = scratch_dir(name);
  write_text(dir / "d.csv", body);
  return dir / "d.csv";
}

template <typename Fn>
std::string error_module(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.module();
  }
  return "";
}

}  // namespace

TEST(LoadCsv, ReadsHeaderLabelsAndSkipsComments) {
  const auto path = small_csv("load", "# ellipt 0.3.0 seed=1\nx,y,cls\n1,2,b\n3,4,a\n# note\n5,6,b\n");
  const auto ds = dataset::load_csv(path, "cls");
  ASSERT_EQ(ds.rows(), 3);
  ASSERT_EQ(ds.cols(), 2);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"x", "y"}));
  // ids follow first appearance
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(ds.class_names.at(0), "b");
  EXPECT_EQ(ds.class_names.at(1), "a");
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 6.0);
}

TEST(LoadCsv, ClassMapFixesIds) {
  const auto dir = scratch_dir("classmap");
  write_text(dir / "d.csv", "x,cls\n1,Normal\n2,pod\n");
  write_text(dir / "m.csv", "id,name\n0,Normal\n10,pod\n");
  const auto map = dataset::load_class_map(dir / "m.csv");
  const auto ds = dataset::load_csv(dir / "d.csv", "cls", {}, map);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 10}));

  write_text(dir / "e.csv", "x,cls\n1,smurf\n");
  EXPECT_THROW(dataset::load_csv(dir / "e.csv", "cls", {}, map), Error);
}

TEST(LoadCsv, DropColumns) {
  const auto path = small_csv("drop", "a,b,c,cls\n1,2,3,x\n4,5,6,y\n");
  dataset::PreprocessConfig cfg;
  cfg.drop_columns = {"b"};
  const auto ds = dataset::load_csv(path, "cls", cfg);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "c"}));
  cfg.drop_columns = {"nope"};
  EXPECT_THROW(dataset::load_csv(path, "cls", cfg), Error);
}

TEST(LoadCsv, ErrorsNameTheDatasetModule) {
  EXPECT_EQ(error_module([] { dataset::load_csv(small_csv("e1", ""), "cls"); }), "dataset");
  EXPECT_EQ(error_module([] { dataset::load_csv(small_csv("e2", "x,cls\n"), "cls"); }), "dataset");
  EXPECT_EQ(error_module([] { dataset::load_csv(small_csv("e3", "x,cls\nabc,a\n"), "cls"); }), "dataset");
  EXPECT_EQ(error_module([] { dataset::load_csv(small_csv("e4", "x,cls\n1,a,3\n"), "cls"); }), "dataset");
  EXPECT_EQ(error_module([] { dataset::load_csv(small_csv("e5", "x,y\n1,2\n"), "cls"); }), "dataset");
  EXPECT_EQ(error_module([] { dataset::load_csv("/nonexistent/file.csv", "cls"); }), "dataset");
}

TEST(LoadCsv, IrisShape) {
  const auto ds = dataset::load_csv(ELLIPT_IRIS_CSV, "species");
  EXPECT_EQ(ds.rows(), 150);
  EXPECT_EQ(ds.cols(), 4);
  for (const auto& c : dataset::class_counts(ds)) EXPECT_EQ(c.count, 50);
}

TEST(DatasetValidate, RejectsBrokenInvariants) {
  auto ds = test::make_blobs(5, 2, 2, 1.0, 1);
  EXPECT_NO_THROW(ds.validate());
  auto bad = ds;
  bad.labels.pop_back();
  EXPECT_THROW(bad.validate(), Error);
  bad = ds;
  bad.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(bad.validate(), Error);
  bad = ds;
  bad.class_names.erase(1);
  EXPECT_THROW(bad.validate(), Error);
  bad = ds;
  bad.features.resize(0, 2);
  bad.labels.clear();
  EXPECT_THROW(bad.validate(), Error);
}

TEST(FilterMinCount, DropsSmallClassesAndKeepsIds) {
  Dataset ds = test::make_blobs(10, 3, 2, 1.0, 2);
  ds = ds.select_rows({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29});
  const auto out = dataset::filter_min_count(ds, 5);
  EXPECT_EQ(out.rows(), 20);
  EXPECT_EQ(out.class_names.size(), 2u);
  EXPECT_TRUE(out.class_names.count(2));
  EXPECT_FALSE(out.class_names.count(1));
  EXPECT_THROW(dataset::filter_min_count(ds, 100), Error);
}

TEST(FilterMinCount, IsIdempotent) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Stream rng = make_stream(seed);
    std::uniform_int_distribution<int> cls(0, 5);
    Dataset ds;
    ds.features = test::uniform_matrix(60, 2, seed);
    for (int i = 0; i < 60; ++i) ds.labels.push_back(cls(rng) * cls(rng) / 5);
    ds.feature_names = {"a", "b"};
    for (int l : ds.labels) ds.class_names[l] = "k" + std::to_string(l);
    const long floor = 1 + static_cast<long>(seed % 10);
    Dataset once;
    try {
      once = dataset::filter_min_count(ds, floor);
    } catch (const Error&) {
      continue;
    }
    const auto twice = dataset::filter_min_count(once, floor);
    EXPECT_EQ(once.labels, twice.labels);
    EXPECT_EQ(once.features, twice.features);
    for (const auto& c : dataset::class_counts(once)) EXPECT_GE(c.count, floor);
  }
}

TEST(ShiftNonnegative, ColumnMinimaBecomeNonnegative) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Dataset ds;
    ds.features = test::uniform_matrix(20, 4, seed, -5.0, 3.0);
    ds.labels.assign(20, 0);
    ds.feature_names = {"a", "b", "c", "d"};
    ds.class_names[0] = "x";
    const auto r = dataset::shift_nonnegative(ds);
    EXPECT_GE(r.data.features.minCoeff(), 0.0);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double m = ds.features.col(j).minCoeff();
      EXPECT_DOUBLE_EQ(r.shift(j), m < 0 ? -m : 0.0);
    }
  }
  Dataset pos = test::make_blobs(5, 2, 2, 1.0, 3);
  pos.features = pos.features.cwiseAbs();
  const auto r = dataset::shift_nonnegative(pos);
  EXPECT_TRUE(r.shift.isZero());
  EXPECT_EQ(r.data.features, pos.features);
}

TEST(Standardize, ZeroMeanUnitVarianceAndScaling) {
  Dataset ds = test::make_blobs(30, 2, 3, 4.0, 4);
  ds.features.col(1) = ds.features.col(1) * 7.0 + Eigen::VectorXd::Constant(ds.rows(), 3.0);
  const auto r = dataset::standardize(ds);
  const auto& f = r.data.features;
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    EXPECT_NEAR(f.col(j).mean(), 0.0, 1e-12);
    const double var = (f.col(j).array() - f.col(j).mean()).square().sum() / double(f.rows() - 1);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
  ASSERT_TRUE(r.data.scaling);
  const Eigen::MatrixXd back =
      (f.array().rowwise() * r.data.scaling->sd.transpose().array()).rowwise() +
      r.data.scaling->mean.transpose().array();
  EXPECT_TRUE(back.isApprox(ds.features, 1e-12));

  // Standardizing again composes rather than replaces the scaling.
  const auto again = dataset::standardize(r.data);
  EXPECT_TRUE(again.data.scaling->mean.isApprox(r.data.scaling->mean, 1e-12));
  EXPECT_TRUE(again.data.scaling->sd.isApprox(r.data.scaling->sd, 1e-12));
}

TEST(Standardize, DropsConstantColumnsWithWarning) {
  Dataset ds = test::make_blobs(10, 2, 3, 1.0, 5);
  ds.features.col(1).setConstant(2.5);
  std::vector<Warning> warnings;
  ScopedWarningCapture capture(warnings);
  const auto r = dataset::standardize(ds);
  EXPECT_EQ(r.dropped, (std::vector<std::string>{"f2"}));
  EXPECT_EQ(r.data.feature_names, (std::vector<std::string>{"f1", "f3"}));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].module, "dataset");
}

TEST(ClassCounts, IncludesEmptyNamedClasses) {
  Dataset ds = test::make_blobs(4, 2, 1, 1.0, 6);
  ds.class_names[5] = "ghost";
  const auto stats = dataset::class_counts(ds);
  ASSERT_EQ(stats.size(), 3u);
  EXPECT_EQ(stats[2].label, 5);
  EXPECT_EQ(stats[2].count, 0);
}

TEST(BackwardElimination, InfiniteDeltaReachesFloor) {
  const Dataset ds = test::make_blobs(40, 2, 5, 3.0, 7);
  rforest::RfConfig cfg;
  cfg.n_trees = 40;
  const auto r = dataset::backward_elimination(ds, cfg, std::numeric_limits<double>::infinity(), 3);
  EXPECT_EQ(static_cast<Eigen::Index>(r.features.size()), dataset::kEliminationFloor);
  EXPECT_EQ(r.history.size(), 4u);
  // The only informative feature survives.
  EXPECT_NE(std::find(r.names.begin(), r.names.end(), "f1"), r.names.end());
}

TEST(BackwardElimination, DeterministicAndNeedsTwoFeatures) {
  const Dataset ds = test::make_blobs(30, 3, 4, 2.0, 8);
  rforest::RfConfig cfg;
  cfg.n_trees = 30;
  const auto a = dataset::backward_elimination(ds, cfg, 0.0, 11);
  const auto b = dataset::backward_elimination(ds, cfg, 0.0, 11);
  EXPECT_EQ(a.features, b.features);
  EXPECT_THROW(dataset::backward_elimination(ds.select_columns({0}), cfg, 0.0, 1), Error);
}
