#include "ellipt/epa.hpp"

#include "ellipt/diag.hpp"
#include "ellipt/error.hpp"
#include "ellipt/linalg.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ellipt::epa {
namespace {

constexpr const char* kModule = "epa";

void check_weight(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw input_error(kModule, fmt::format("weight a={} outside [0, 1]", a));
}

}  // namespace

void EpaModel::validate(Eigen::Index p) const {
  if (a.size() != pairs.size())
    throw input_error(kModule, fmt::format("{} pairs but {} weights", pairs.size(), a.size()));
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw input_error(kModule, "alpha must be >= 0");
  for (double w : a) check_weight(w);
  std::vector<int> used(static_cast<std::size_t>(std::max<Eigen::Index>(p, 0)), 0);
  auto mark = [&](Eigen::Index j) {
    if (j < 0 || j >= p)
      throw input_error(kModule, fmt::format("feature index {} out of range for p={}", j, p));
    if (used[static_cast<std::size_t>(j)]++)
      throw input_error(kModule, fmt::format("feature index {} used twice", j));
  };
  for (const auto& [f, s] : pairs) {
    mark(f);
    mark(s);
  }
  if (passthrough) mark(*passthrough);
  for (Eigen::Index j = 0; j < p; ++j)
    if (!used[static_cast<std::size_t>(j)])
      throw input_error(kModule, fmt::format("feature index {} is not covered by the model", j));
}

std::vector<FeaturePair> consecutive_pairs(Eigen::Index p) {
  std::vector<FeaturePair> out;
  for (Eigen::Index j = 0; j + 1 < p; j += 2) out.emplace_back(j, j + 1);
  return out;
}

EpaModel make_model(Eigen::Index p, std::vector<double> a, double alpha,
                    std::vector<FeaturePair> pairs) {
  EpaModel m;
  m.pairs = pairs.empty() ? consecutive_pairs(p) : std::move(pairs);
  m.a = std::move(a);
  m.alpha = alpha;
  std::vector<bool> used(static_cast<std::size_t>(p), false);
  for (const auto& [f, s] : m.pairs) {
    if (f >= 0 && f < p) used[static_cast<std::size_t>(f)] = true;
    if (s >= 0 && s < p) used[static_cast<std::size_t>(s)] = true;
  }
  for (Eigen::Index j = 0; j < p; ++j)
    if (!used[static_cast<std::size_t>(j)] && !m.passthrough) m.passthrough = j;
  m.validate(p);
  return m;
}

double pair_transform(double x1, double x2, double a, double alpha, Stream& rng) {
  if (x1 < 0.0 || x2 < 0.0)
    throw input_error(kModule, "pair_transform needs nonnegative inputs (see shift_nonnegative)");
  check_weight(a);
  std::normal_distribution<double> normal;
  const double eps = normal(rng);
  return elliptical_norm(x1, x2, a) + alpha * eps;
}

Eigen::VectorXd pair_transform(const Eigen::Ref<const Eigen::VectorXd>& x1,
                               const Eigen::Ref<const Eigen::VectorXd>& x2, double a,
                               double alpha, Stream& rng) {
  if (x1.size() != x2.size()) throw input_error(kModule, "pair columns differ in length");
  Eigen::VectorXd y(x1.size());
  for (Eigen::Index i = 0; i < x1.size(); ++i) y(i) = pair_transform(x1(i), x2(i), a, alpha, rng);
  return y;
}

Dataset transform(const Dataset& ds, const EpaModel& model, std::uint64_t seed) {
  model.validate(ds.cols());
  for (const auto& [f, s] : model.pairs) {
    for (Eigen::Index j : {f, s}) {
      if (ds.features.col(j).minCoeff() < 0.0)
        throw input_error(kModule,
                          fmt::format("column '{}' has negative values; apply shift_nonnegative first",
                                      ds.feature_names[static_cast<std::size_t>(j)]));
    }
  }

  Dataset out;
  out.features.resize(ds.rows(), model.output_dim());
  out.labels = ds.labels;
  out.class_names = ds.class_names;
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < model.pairs.size(); ++k) {
    const auto [f, s] = model.pairs[k];
    const double a = model.a[k];
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
      Stream rng = make_stream(seed, {streams::kTransform, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(k)});
      normal.reset();
      const double eps = normal(rng);
      out.features(i, static_cast<Eigen::Index>(k)) =
          elliptical_norm(ds.features(i, f), ds.features(i, s), a) + model.alpha * eps;
    }
    out.feature_names.push_back(fmt::format("y{}", k + 1));
  }
  if (model.passthrough) {
    const auto q = static_cast<Eigen::Index>(model.pairs.size());
    out.features.col(q) = ds.features.col(*model.passthrough);
    out.feature_names.push_back(fmt::format("y{}", q + 1));
    warn(kModule, fmt::format("feature '{}' passed through unperturbed (unprotected)",
                              ds.feature_names[static_cast<std::size_t>(*model.passthrough)]));
  }
  return out;
}

std::vector<Eigen::Vector2d> ellipse_locus(const EllipseParams& p, std::uint64_t seed) {
  if (!(p.y_value > 0.0)) throw input_error(kModule, "ellipse y_value must be positive");
  if (p.n_points < 1) throw input_error(kModule, "ellipse n_points must be at least 1");
  if (p.b == 0.0) throw input_error(kModule, "ellipse weight b must be nonzero");
  if (p.a < 0.0 || p.b < 0.0 || std::abs(p.a + p.b - 1.0) > 1e-9)
    throw input_error(kModule, "ellipse weights need a, b >= 0 and a + b = 1");
  if (p.alpha < 0.0) throw input_error(kModule, "ellipse alpha must be >= 0");

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(p.n_points));
  for (int i = 0; i < p.n_points; ++i) {
    Stream rng = make_stream(seed, {streams::kLocus, static_cast<std::uint64_t>(i)});
    std::normal_distribution<double> normal;
    const double r = p.y_value - p.alpha * normal(rng);
    if (r < 0.0) continue;
    // With a = 0 the locus is the line x2 = r/sqrt(b); x1 is swept over the same span.
    const double x1_max = p.a > 0.0 ? r / std::sqrt(p.a) : r / std::sqrt(p.b);
    std::uniform_real_distribution<double> uniform(0.0, x1_max);
    const double x1 = x1_max > 0.0 ? uniform(rng) : 0.0;
    const double radicand = (r * r - p.a * x1 * x1) / p.b;
    if (radicand < 0.0) continue;
    pts.emplace_back(x1, std::sqrt(radicand));
  }
  return pts;
}

double correlation_objective(const Eigen::Ref<const Eigen::VectorXd>& x1,
                             const Eigen::Ref<const Eigen::VectorXd>& x2, double a,
                             double alpha, std::uint64_t seed) {
  if (x1.size() != x2.size()) throw input_error(kModule, "objective columns differ in length");
  if (x1.size() < 3) throw input_error(kModule, "objective needs at least 3 rows");
  if (x1.minCoeff() == x1.maxCoeff() || x2.minCoeff() == x2.maxCoeff())
    throw input_error(kModule, "objective needs nonconstant columns");
  Stream rng = make_stream(seed, {streams::kObjective});
  const Eigen::VectorXd y = pair_transform(x1, x2, a, alpha, rng);
  if (y.minCoeff() == y.maxCoeff()) {
    warn(kModule, "transformed column is constant; correlation terms treated as 0");
    return 0.0;
  }
  return std::abs(linalg::pearson(y, x1)) + std::abs(linalg::pearson(y, x2));
}

void write_model(std::ostream& out, const EpaModel& model,
                 const std::vector<std::string>& feature_names) {
  auto name = [&](Eigen::Index j) {
    return j >= 0 && j < static_cast<Eigen::Index>(feature_names.size())
               ? feature_names[static_cast<std::size_t>(j)]
               : std::string();
  };
  out << "# ellipt epa model\n";
  out << "version 1\n";
  out << fmt::format("alpha {:.17g}\n", model.alpha);
  for (std::size_t k = 0; k < model.pairs.size(); ++k) {
    const auto [f, s] = model.pairs[k];
    out << fmt::format("pair {} {} {:.17g}", f, s, model.a[k]);
    if (!feature_names.empty()) out << fmt::format("  # {} {}", name(f), name(s));
    out << '\n';
  }
  if (model.passthrough) out << fmt::format("passthrough {}\n", *model.passthrough);
}

void save_model(const std::filesystem::path& path, const EpaModel& model,
                const std::vector<std::string>& feature_names) {
  std::ofstream out(path);
  if (!out) throw input_error(kModule, fmt::format("cannot write '{}'", path.string()));
  write_model(out, model, feature_names);
}

EpaModel read_model(std::istream& in) {
  EpaModel m;
  bool saw_alpha = false;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "version") {
      int v = 0;
      if (!(ls >> v) || v != 1) throw input_error(kModule, "unsupported model version");
    } else if (key == "alpha") {
      if (!(ls >> m.alpha)) throw input_error(kModule, "malformed alpha line");
      saw_alpha = true;
    } else if (key == "pair") {
      Eigen::Index f = 0, s = 0;
      double a = 0;
      if (!(ls >> f >> s >> a)) throw input_error(kModule, fmt::format("malformed pair line '{}'", line));
      m.pairs.emplace_back(f, s);
      m.a.push_back(a);
    } else if (key == "passthrough") {
      Eigen::Index j = 0;
      if (!(ls >> j)) throw input_error(kModule, "malformed passthrough line");
      m.passthrough = j;
    } else {
      throw input_error(kModule, fmt::format("unknown model key '{}'", key));
    }
  }
  if (!saw_alpha) throw input_error(kModule, "model file has no alpha line");
  if (m.pairs.empty()) throw input_error(kModule, "model file has no pairs");
  return m;
}

EpaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error(kModule, fmt::format("cannot open model '{}'", path.string()));
  return read_model(in);
}

}  // namespace ellipt::epa
