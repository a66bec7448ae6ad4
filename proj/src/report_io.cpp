#include "ellipt/report_io.hpp"

#include "ellipt/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ellipt::io {
namespace {

constexpr const char* kModule = "io";

std::string join(const std::vector<double>& v, const char* fmt_spec) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += fmt::format(fmt::runtime(fmt_spec), v[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string provenance_line(std::uint64_t seed) {
  return fmt::format("# ellipt {} seed={}\n", ELLIPT_VERSION, seed);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error(kModule, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw input_error(kModule, fmt::format("write to '{}' failed", path.string()));
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds, std::uint64_t seed,
                       const std::string& label_column) {
  std::ostringstream out;
  out << provenance_line(seed);
  for (const auto& n : ds.feature_names) out << n << ',';
  out << label_column << '\n';
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.cols(); ++j) out << fmt::format("{:.17g},", ds.features(i, j));
    out << ds.class_names.at(ds.labels[static_cast<std::size_t>(i)]) << '\n';
  }
  write_file(path, out.str());

  std::ostringstream classes;
  classes << provenance_line(seed) << "id,name\n";
  for (const auto& [id, name] : ds.class_names) classes << id << ',' << name << '\n';
  auto sidecar = path;
  sidecar.replace_extension(".classes.csv");
  write_file(sidecar, classes.str());
}

void write_oob_csv(std::ostream& out, const rforest::OobReport& report, std::uint64_t seed) {
  out << provenance_line(seed);
  out << "label,display_name,correct,misclassified,rate,overall_oob\n";
  for (const auto& c : report.classes)
    out << fmt::format("{},{},{},{},{:.17g},{:.17g}\n", c.label, c.name, c.correct,
                       c.misclassified, c.rate, report.overall_oob);
}

rforest::OobReport read_oob_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error(kModule, fmt::format("cannot open OOB report '{}'", path.string()));
  rforest::OobReport r;
  std::string line;
  bool header_seen = false;
  long votable = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("label,display_name,correct,misclassified,rate,overall_oob", 0) != 0)
        throw input_error(kModule, fmt::format("'{}' is not an OOB report", path.string()));
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw input_error(kModule, fmt::format("bad OOB row '{}'", line));
    try {
      rforest::ClassOob c;
      c.label = std::stoi(cells[0]);
      c.name = cells[1];
      c.correct = std::stol(cells[2]);
      c.misclassified = std::stol(cells[3]);
      c.rate = std::stod(cells[4]);
      r.overall_oob = std::stod(cells[5]);
      votable += c.correct + c.misclassified;
      r.classes.push_back(std::move(c));
    } catch (const std::exception&) {
      throw input_error(kModule, fmt::format("bad OOB row '{}'", line));
    }
  }
  if (r.classes.empty()) throw input_error(kModule, fmt::format("'{}' has no class rows", path.string()));
  r.votable_rows = votable;
  return r;
}

std::string oob_table(const rforest::OobReport& report, const std::string& title) {
  std::size_t w = 5;
  for (const auto& c : report.classes) w = std::max(w, c.name.size());
  std::string out = title + "\n";
  out += fmt::format("{:<{}}  {:>10}  {}\n", "Label", w, "OOB error", "Misclassification error");
  for (const auto& c : report.classes)
    out += fmt::format("{:<{}}  {:>10.4f}  {:.3f} ({}, {})\n", c.name, w, report.overall_oob, c.rate,
                       c.correct, c.misclassified);
  return out;
}

void write_degradation_csv(std::ostream& out, const eval::DegradationReport& report,
                           std::uint64_t seed) {
  out << provenance_line(seed);
  out << "label,display_name,idmc,tdmc,tot,pd\n";
  for (const auto& r : report.rows)
    out << fmt::format("{},{},{},{},{},{:.17g}\n", r.label, r.name, r.idmc, r.tdmc, r.tot, r.pd);
  out << fmt::format("# average_pd={:.17g}\n", report.average_pd);
  out << fmt::format("# input_oob={:.17g} transform_oob={:.17g} zeta={:.17g}\n", report.input_oob,
                     report.transform_oob, report.input_oob - report.transform_oob);
  for (const auto& d : report.discrepancies) out << "# discrepancy: " << d << '\n';
  for (const auto& e : report.excluded) out << "# excluded: " << e << '\n';
}

std::string degradation_table(const eval::DegradationReport& report, const std::string& title) {
  std::size_t w = 9;
  for (const auto& r : report.rows) w = std::max(w, r.name.size());
  std::string out = title + "\n";
  out += fmt::format("OOB error: input {:.4f}, transform {:.4f}\n", report.input_oob,
                     report.transform_oob);
  out += fmt::format("{:<{}}  {:>14}\n", "Label (t)", w, "pd_t");
  for (const auto& r : report.rows) out += fmt::format("{:<{}}  {:>14.7f}\n", r.name, w, r.pd);
  out += fmt::format("{:<{}}  {:>14.7f}\n", "AVG. ERR.", w, report.average_pd);
  return out;
}

void write_sir_csv(std::ostream& out, const std::vector<SirRow>& rows, std::uint64_t seed) {
  out << provenance_line(seed);
  out << "pair_id,a_values_used,sir_db,per_source_sir_db,recoverable\n";
  for (const auto& row : rows)
    out << fmt::format("{},{},{:.6f},{},{}\n", row.pair_id, join(row.report.weights, "{:.6f}"),
                       row.report.sir_db, join(row.report.per_source_sir_db, "{:.6f}"),
                       row.report.recoverable ? "true" : "false");
}

void write_tune_csv(std::ostream& out, const tuning::TuneResult& result, std::uint64_t seed) {
  out << provenance_line(seed);
  out << "pair,a,sir_db,corr_objective,satisfiable\n";
  for (const auto& p : result.pairs)
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", p.pair_id + 1, p.a, p.sir_db, p.objective,
                       p.satisfiable ? "true" : "false");
}

void write_candidates_csv(std::ostream& out, const tuning::TuneResult& result, std::uint64_t seed) {
  out << provenance_line(seed);
  out << "pair,trial,a,sir_db,corr_objective,jade_converged\n";
  for (const auto& p : result.pairs)
    for (const auto& c : p.candidates)
      out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{}\n", p.pair_id + 1, c.trial, c.a, c.sir_db,
                         c.objective, c.jade_converged ? "true" : "false");
}

void write_ellipse_csv(std::ostream& out, const std::vector<EllipseSeries>& series,
                       std::uint64_t seed) {
  out << provenance_line(seed);
  out << "x1,x2,series_id\n";
  for (const auto& s : series)
    for (const auto& p : s.points) out << fmt::format("{:.9f},{:.9f},{}\n", p.x(), p.y(), s.id);
}

void write_ellipse_svg(std::ostream& out, const std::vector<EllipseSeries>& series) {
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};
  double xmax = 1e-9, ymax = 1e-9;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      xmax = std::max(xmax, p.x());
      ymax = std::max(ymax, p.y());
    }
  constexpr double kSize = 400.0, kPad = 30.0;
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
      kSize + 2 * kPad);
  out << fmt::format("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{1}\" fill=\"none\" stroke=\"#888\"/>\n",
                     kPad, kSize);
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << fmt::format("<g fill=\"{}\"><title>{}</title>\n", kColors[k % 5], series[k].id);
    for (const auto& p : series[k].points)
      out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.2\"/>\n",
                         kPad + kSize * p.x() / xmax, kPad + kSize * (1.0 - p.y() / ymax));
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void write_feature_scores_csv(std::ostream& out, const std::vector<rforest::FeatureScore>& scores,
                              std::uint64_t seed) {
  out << provenance_line(seed);
  out << "rank,feature,name,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i)
    out << fmt::format("{},{},{},{:.17g}\n", i + 1, scores[i].feature, scores[i].name, scores[i].score);
}

}  // namespace ellipt::io
