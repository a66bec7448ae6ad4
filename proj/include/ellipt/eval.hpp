#pragma once

#include "ellipt/dataset.hpp"
#include "ellipt/rforest.hpp"

#include <string>
#include <vector>

namespace ellipt::eval {

struct DegradationRow {
  int label = 0;
  std::string name;
  long idmc = 0;  // misclassified in the input domain
  long tdmc = 0;  // misclassified in the transform domain
  long tot = 0;   // class size
  double pd = 0.0;
};

struct DegradationReport {
  std::vector<DegradationRow> rows;
  double average_pd = 0.0;
  double input_oob = 0.0;
  double transform_oob = 0.0;
  std::vector<std::string> discrepancies;  // classes present in only one report
  std::vector<std::string> excluded;       // classes below the size floor
};

// eta(M(x)) - eta(M(y)); negative when the transform hurts.
double zeta(double eta_input, double eta_transform);

// 100 * (tdmc - idmc) / tot, in percent.
double pd_metric(long idmc, long tdmc, long tot);

// Rows for every class shared by both reports; class sizes come from
// `stats`. Classes with fewer than `min_class_size` rows are listed under
// `excluded` rather than averaged.
DegradationReport degradation_report(const rforest::OobReport& input,
                                     const rforest::OobReport& transformed,
                                     const dataset::ClassStats& stats, long min_class_size = 0);

double group_pd(const DegradationReport& report, const std::vector<std::string>& names);
double group_pd(const DegradationReport& report, const std::vector<int>& labels);

// Normal traffic plus the denial-of-service classes of NSL-KDD.
inline const std::vector<std::string> kNormalAndDosClasses = {"Normal", "Neptune", "back",
                                                             "teardrop", "smurf", "pod"};

}  // namespace ellipt::eval
