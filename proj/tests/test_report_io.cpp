#include "support.hpp"

#include "ellipt/error.hpp"
#include "ellipt/report_io.hpp"

#include <sstream>

using namespace ellipt;

TEST(ReportIo, ProvenanceLine) {
  EXPECT_EQ(io::provenance_line(42), std::string("# ellipt ") + ELLIPT_VERSION + " seed=42\n");
}

TEST(ReportIo, OobCsvRoundTrip) {
  rforest::OobReport r;
  r.overall_oob = 0.04;
  r.classes.push_back({0, "setosa", 50, 0, 0.0});
  r.classes.push_back({1, "versicolor", 47, 3, 0.06});
  r.classes.push_back({2, "virginica", 47, 3, 0.06});
  const auto dir = test::scratch_dir("oob");
  std::ostringstream s;
  io::write_oob_csv(s, r, 9);
  test::write_text(dir / "oob.csv", s.str());
  EXPECT_EQ(s.str().rfind("# ellipt", 0), 0u);
  const auto back = io::read_oob_csv(dir / "oob.csv");
  ASSERT_EQ(back.classes.size(), 3u);
  EXPECT_EQ(back.classes[1].name, "versicolor");
  EXPECT_EQ(back.classes[1].misclassified, 3);
  EXPECT_DOUBLE_EQ(back.overall_oob, 0.04);
  EXPECT_EQ(back.votable_rows, 150);

  test::write_text(dir / "bad.csv", "x,y\n1,2\n");
  EXPECT_THROW(io::read_oob_csv(dir / "bad.csv"), Error);
  EXPECT_THROW(io::read_oob_csv(dir / "missing.csv"), Error);
}

TEST(ReportIo, DatasetCsvLoadsBack) {
  Dataset ds = test::make_blobs(3, 2, 2, 1.0, 1);
  const auto dir = test::scratch_dir("dscsv");
  io::write_dataset_csv(dir / "d.csv", ds, 5, "cls");
  const auto back = dataset::load_csv(dir / "d.csv", "cls");
  EXPECT_EQ(back.features, ds.features);  // 17 significant digits round-trip
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_TRUE(std::filesystem::exists(dir / "d.classes.csv"));
}

TEST(ReportIo, DegradationAndTables) {
  eval::DegradationReport rep;
  rep.rows.push_back({0, "Normal", 70, 127, 13449, 0.4238233});
  rep.average_pd = 0.4238233;
  rep.input_oob = 0.0098;
  rep.transform_oob = 0.0169;
  rep.excluded.push_back("pod");
  std::ostringstream s;
  io::write_degradation_csv(s, rep, 1);
  EXPECT_NE(s.str().find("label,display_name,idmc,tdmc,tot,pd\n0,Normal,70,127,13449,"), std::string::npos);
  EXPECT_NE(s.str().find("# excluded: pod"), std::string::npos);
  const auto table = io::degradation_table(rep, "t");
  EXPECT_NE(table.find("0.4238233"), std::string::npos);
  EXPECT_NE(table.find("AVG. ERR."), std::string::npos);
}

TEST(ReportIo, EllipseOutputs) {
  std::vector<io::EllipseSeries> series{{"s1", {{0.0, 1.0}, {1.0, 0.0}}}, {"s2", {{0.5, 0.5}}}};
  std::ostringstream csv, svg;
  io::write_ellipse_csv(csv, series, 3);
  io::write_ellipse_svg(svg, series);
  EXPECT_NE(csv.str().find("x1,x2,series_id\n0.000000000,1.000000000,s1\n"), std::string::npos);
  EXPECT_EQ(svg.str().rfind("<svg", 0), 0u);
  std::size_t circles = 0;
  for (auto at = svg.str().find("<circle"); at != std::string::npos; at = svg.str().find("<circle", at + 1))
    ++circles;
  EXPECT_EQ(circles, 3u);
}

TEST(ReportIo, SirAndTuneCsv) {
  bss::SirReport r;
  r.sir_db = 12.5;
  r.per_source_sir_db = {10.0, 15.0};
  r.weights = {0.25, 0.5};
  std::ostringstream s;
  io::write_sir_csv(s, {{"1", r}}, 2);
  EXPECT_NE(s.str().find("1,0.250000;0.500000,12.500000,10.000000;15.000000,false"), std::string::npos);

  tuning::TuneResult t;
  tuning::PairTuning p;
  p.a = 0.042;
  p.sir_db = 14.289;
  p.satisfiable = true;
  t.pairs.push_back(p);
  std::ostringstream ts;
  io::write_tune_csv(ts, t, 2);
  EXPECT_NE(ts.str().find("pair,a,sir_db,corr_objective,satisfiable\n1,0.042000,14.289000"), std::string::npos);
}
