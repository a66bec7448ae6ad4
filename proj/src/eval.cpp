#include "ellipt/eval.hpp"

#include "ellipt/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace ellipt::eval {
namespace {

constexpr const char* kModule = "eval";

bool same_name(const std::string& a, const std::string& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

double mean_pd(const std::vector<const DegradationRow*>& rows) {
  if (rows.empty()) throw input_error(kModule, "empty class subset");
  double sum = 0.0;
  for (const auto* r : rows) sum += r->pd;
  return sum / static_cast<double>(rows.size());
}

}  // namespace

double zeta(double eta_input, double eta_transform) { return eta_input - eta_transform; }

double pd_metric(long idmc, long tdmc, long tot) {
  if (tot <= 0) throw input_error(kModule, "pd_metric: class size must be positive");
  if (idmc < 0 || tdmc < 0) throw input_error(kModule, "pd_metric: negative count");
  return 100.0 * static_cast<double>(tdmc - idmc) / static_cast<double>(tot);
}

DegradationReport degradation_report(const rforest::OobReport& input,
                                     const rforest::OobReport& transformed,
                                     const dataset::ClassStats& stats, long min_class_size) {
  DegradationReport r;
  r.input_oob = input.overall_oob;
  r.transform_oob = transformed.overall_oob;
  for (const auto& in : input.classes) {
    const auto* tr = transformed.find(in.label);
    if (!tr) {
      r.discrepancies.push_back(fmt::format("{} ({}) missing from transform report", in.name, in.label));
      continue;
    }
    const auto st = std::find_if(stats.begin(), stats.end(),
                                 [&](const dataset::ClassCount& c) { return c.label == in.label; });
    const long tot = st != stats.end() ? st->count : in.correct + in.misclassified;
    if (tot <= 0 || tot < min_class_size) {
      r.excluded.push_back(in.name);
      continue;
    }
    r.rows.push_back({in.label, in.name, in.misclassified, tr->misclassified, tot,
                      pd_metric(in.misclassified, tr->misclassified, tot)});
  }
  for (const auto& tr : transformed.classes)
    if (!input.find(tr.label))
      r.discrepancies.push_back(fmt::format("{} ({}) missing from input report", tr.name, tr.label));
  if (r.rows.empty()) throw input_error(kModule, "reports share no classes");

  double sum = 0.0;
  for (const auto& row : r.rows) sum += row.pd;
  r.average_pd = sum / static_cast<double>(r.rows.size());
  return r;
}

double group_pd(const DegradationReport& report, const std::vector<std::string>& names) {
  std::vector<const DegradationRow*> rows;
  for (const auto& n : names) {
    const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                 [&](const DegradationRow& r) { return same_name(r.name, n); });
    if (it == report.rows.end()) throw input_error(kModule, fmt::format("class '{}' not in report", n));
    rows.push_back(&*it);
  }
  return mean_pd(rows);
}

double group_pd(const DegradationReport& report, const std::vector<int>& labels) {
  std::vector<const DegradationRow*> rows;
  for (int l : labels) {
    const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                 [&](const DegradationRow& r) { return r.label == l; });
    if (it == report.rows.end()) throw input_error(kModule, fmt::format("class {} not in report", l));
    rows.push_back(&*it);
  }
  return mean_pd(rows);
}

}  // namespace ellipt::eval
