#pragma once

#include "ellipt/bss.hpp"
#include "ellipt/dataset.hpp"
#include "ellipt/eval.hpp"
#include "ellipt/rforest.hpp"
#include "ellipt/tuning.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// CSV and plain-text renderings of the toolkit's reports. Every CSV starts
// with a `# ellipt <version> seed=<seed>` comment line followed by a header.
namespace ellipt::io {

std::string provenance_line(std::uint64_t seed);

// Label column carries display names; a `<stem>.classes.csv` sidecar keeps ids.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds, std::uint64_t seed,
                       const std::string& label_column = "label");

void write_oob_csv(std::ostream& out, const rforest::OobReport& report, std::uint64_t seed);
rforest::OobReport read_oob_csv(const std::filesystem::path& path);
std::string oob_table(const rforest::OobReport& report, const std::string& title);

void write_degradation_csv(std::ostream& out, const eval::DegradationReport& report,
                           std::uint64_t seed);
std::string degradation_table(const eval::DegradationReport& report, const std::string& title);

struct SirRow {
  std::string pair_id;
  bss::SirReport report;
};
void write_sir_csv(std::ostream& out, const std::vector<SirRow>& rows, std::uint64_t seed);

void write_tune_csv(std::ostream& out, const tuning::TuneResult& result, std::uint64_t seed);
void write_candidates_csv(std::ostream& out, const tuning::TuneResult& result, std::uint64_t seed);

struct EllipseSeries {
  std::string id;
  std::vector<Eigen::Vector2d> points;
};
void write_ellipse_csv(std::ostream& out, const std::vector<EllipseSeries>& series,
                       std::uint64_t seed);
void write_ellipse_svg(std::ostream& out, const std::vector<EllipseSeries>& series);

void write_feature_scores_csv(std::ostream& out, const std::vector<rforest::FeatureScore>& scores,
                              std::uint64_t seed);

// Writes `text` to `path`, throwing ellipt::Error on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ellipt::io
