// epa: batch front end for the ellipt toolkit.
//
// Every subcommand reads a flat config file (--config) whose keys can be
// overridden one-for-one with --<key> flags. Results are written as files
// under output_dir; stderr only carries log lines.

#include "run_config.hpp"

#include "ellipt/bss.hpp"
#include "ellipt/dataset.hpp"
#include "ellipt/diag.hpp"
#include "ellipt/epa.hpp"
#include "ellipt/error.hpp"
#include "ellipt/eval.hpp"
#include "ellipt/pca.hpp"
#include "ellipt/report_io.hpp"
#include "ellipt/rforest.hpp"
#include "ellipt/rng.hpp"
#include "ellipt/tuning.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ellipt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnsatisfiable = 3;
constexpr int kExitNumerical = 4;

constexpr const char* kModule = "cli";

void log(const std::string& msg) { std::cerr << "epa: " << msg << '\n'; }

struct Settings {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

// Registers --config plus one --<key> flag per config key on a subcommand.
void add_config_options(CLI::App* sub, Settings& s) {
  sub->add_option("--config", s.config_path, "Config file (key = value)");
  for (const auto& key : cli::known_keys()) {
    if (key == "config_version") continue;
    sub->add_option_function<std::string>(
        "--" + key, [&s, key](const std::string& v) { s.overrides[key] = v; },
        "Overrides config key " + key);
  }
}

cli::RunConfig resolve(const Settings& s) {
  std::map<std::string, std::string> kv;
  if (!s.config_path.empty()) kv = cli::read_config_file(s.config_path);
  for (const auto& [k, v] : s.overrides) kv[k] = v;
  return cli::build_config(kv);
}

fs::path prepare_output(const cli::RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec || !fs::is_directory(c.output_dir))
    throw input_error(kModule, fmt::format("cannot create output_dir '{}'", c.output_dir.string()));
  return c.output_dir;
}

void emit(const fs::path& path, const std::string& text) {
  io::write_file(path, text);
  log("wrote " + path.string());
}

template <typename Fn>
void emit_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  emit(path, out.str());
}

Dataset load_dataset(const cli::RunConfig& c) {
  if (c.dataset.empty()) throw input_error(kModule, "no dataset configured");
  std::map<std::string, int> class_map;
  if (!c.class_map.empty()) class_map = dataset::load_class_map(c.class_map);
  Dataset ds = dataset::load_csv(c.dataset, c.label_column, c.preprocess, class_map);
  if (!c.feature_list.empty()) {
    std::vector<Eigen::Index> cols;
    for (const auto& name : c.feature_list) cols.push_back(ds.column_index(name));
    ds = ds.select_columns(cols);
  }
  log(fmt::format("loaded {} rows x {} features, {} classes from {}", ds.rows(), ds.cols(),
                  ds.class_names.size(), c.dataset.string()));
  return ds;
}

std::vector<std::string> names_of(const Dataset& ds) { return ds.feature_names; }

std::vector<epa::FeaturePair> chain_pairs(const std::vector<Eigen::Index>& order) {
  std::vector<epa::FeaturePair> pairs;
  for (std::size_t i = 0; i + 1 < order.size(); i += 2) pairs.emplace_back(order[i], order[i + 1]);
  return pairs;
}

std::vector<epa::FeaturePair> plan_pairs(const cli::RunConfig& c, const Dataset& ds,
                                         const fs::path& out) {
  using Kind = cli::PairingPlan::Kind;
  switch (c.pairing.kind) {
    case Kind::kColumns: {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.cols()));
      for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<Eigen::Index>(j);
      return chain_pairs(order);
    }
    case Kind::kExplicit: {
      std::vector<epa::FeaturePair> pairs;
      for (const auto& [f, s] : c.pairing.explicit_pairs)
        pairs.emplace_back(ds.column_index(f), ds.column_index(s));
      return pairs;
    }
    case Kind::kImportance:
      break;
  }
  const auto forest = rforest::train(ds, c.rf);
  const auto scores = rforest::permutation_importance(forest, ds, c.seed);
  emit_stream(out / "pairing_importance.csv",
              [&](std::ostream& o) { io::write_feature_scores_csv(o, scores, c.seed); });
  std::vector<Eigen::Index> order;
  for (const auto& s : scores) order.push_back(s.feature);
  return chain_pairs(order);
}

struct TuneOutcome {
  epa::EpaModel model;
  bool satisfiable = true;
};

TuneOutcome run_tuning(const cli::RunConfig& c, const Dataset& ds, const fs::path& out) {
  const auto pairs = plan_pairs(c, ds, out);
  log(fmt::format("tuning {} pairs, {} trials each", pairs.size(), c.tune.n_trials));
  auto [model, result] = tuning::tune_model(ds, pairs, c.tune, c.reuse_cycle);

  std::ostringstream model_text;
  epa::write_model(model_text, model, names_of(ds));
  emit(out / "epa_model.txt", model_text.str());
  emit_stream(out / "tune.csv", [&](std::ostream& o) { io::write_tune_csv(o, result, c.seed); });
  emit_stream(out / "tune_candidates.csv",
              [&](std::ostream& o) { io::write_candidates_csv(o, result, c.seed); });
  std::vector<io::SirRow> rows;
  for (std::size_t i = 0; i < result.verification.size(); ++i)
    rows.push_back({fmt::format("{}", i + 1), result.verification[i]});
  emit_stream(out / "tune_sir.csv", [&](std::ostream& o) { io::write_sir_csv(o, rows, c.seed); });
  return {model, result.all_satisfiable()};
}

epa::EpaModel resolve_model(const cli::RunConfig& c, const Dataset& ds, const fs::path& out) {
  if (!c.epa_model.empty()) {
    auto model = epa::load_model(c.epa_model);
    model.validate(ds.cols());
    return model;
  }
  log("no epa.model configured; tuning one now");
  auto outcome = run_tuning(c, ds, out);
  if (!outcome.satisfiable) warn(kModule, "tuned model does not meet the SIR threshold on every pair");
  return outcome.model;
}

Eigen::Index pick_k(const cli::KRule& rule, const pca::PcaModel& model) {
  using Kind = cli::KRule::Kind;
  switch (rule.kind) {
    case Kind::kAll:
      return model.dim();
    case Kind::kKaiser:
      return std::max<Eigen::Index>(1, pca::select_k_kaiser(model));
    case Kind::kVariance:
      return pca::select_k_variance(model, rule.fraction);
    case Kind::kFixed:
      if (rule.k > model.dim())
        throw input_error(kModule, fmt::format("pca.k_rule fixed:{} exceeds {} components", rule.k, model.dim()));
      return rule.k;
  }
  return model.dim();
}

// ---------------------------------------------------------------------------

int cmd_classify(const cli::RunConfig& c, const std::string& variant) {
  const auto out = prepare_output(c);
  const Dataset ds = load_dataset(c);
  Dataset data;
  std::string title;
  if (variant == "input") {
    data = ds;
    title = "Input domain";
  } else if (variant == "epa") {
    data = epa::transform(ds, resolve_model(c, ds, out), c.seed);
    title = "EPA transform domain";
  } else {
    const auto std_ds = dataset::standardize(ds).data;
    const auto model = pca::fit(std_ds);
    const auto k = pick_k(c.k_rule, model);
    data = pca::transform(std_ds, model, k);
    title = fmt::format("PCA transform domain ({} PCs)", k);
  }
  log(fmt::format("training {} trees on {} ({} features)", c.rf.n_trees, variant, data.cols()));
  const auto forest = rforest::train(data, c.rf);
  const auto report = rforest::oob_report(forest, data);
  emit_stream(out / fmt::format("oob_{}.csv", variant),
              [&](std::ostream& o) { io::write_oob_csv(o, report, c.seed); });
  emit(out / fmt::format("oob_{}.txt", variant), io::oob_table(report, title));
  return kExitOk;
}

int cmd_tune(const cli::RunConfig& c) {
  const auto out = prepare_output(c);
  const Dataset ds = load_dataset(c);
  const auto outcome = run_tuning(c, ds, out);
  if (!outcome.satisfiable) {
    log(fmt::format("privacy constraint unsatisfied: some pair stays above {} dB", c.tune.sir_threshold_db));
    return kExitUnsatisfiable;
  }
  return kExitOk;
}

int cmd_transform(const cli::RunConfig& c) {
  const auto out = prepare_output(c);
  const Dataset ds = load_dataset(c);
  const auto transformed = epa::transform(ds, resolve_model(c, ds, out), c.seed);
  io::write_dataset_csv(out / "dataset_epa.csv", transformed, c.seed, c.label_column);
  log("wrote " + (out / "dataset_epa.csv").string());
  return kExitOk;
}

int cmd_pca(const cli::RunConfig& c) {
  const auto out = prepare_output(c);
  const Dataset ds = load_dataset(c);
  const auto std_ds = dataset::standardize(ds).data;
  const auto model = pca::fit(std_ds);
  emit_stream(out / "pca_model.txt", [&](std::ostream& o) { pca::write_model(o, model); });

  const double total = model.eigenvalues.sum();
  std::ostringstream summary;
  summary << io::provenance_line(c.seed) << "component,eigenvalue,share,cumulative\n";
  double cum = 0.0;
  for (Eigen::Index i = 0; i < model.dim(); ++i) {
    cum += model.eigenvalues(i);
    summary << fmt::format("PC{},{:.17g},{:.17g},{:.17g}\n", i + 1, model.eigenvalues(i),
                           model.eigenvalues(i) / total, cum / total);
  }
  emit(out / "pca_summary.csv", summary.str());

  const auto k = pick_k(c.k_rule, model);
  std::ostringstream sel;
  sel << io::provenance_line(c.seed) << "rule,k\n";
  sel << fmt::format("kaiser,{}\nvariance:0.8,{}\nconfigured,{}\n", pca::select_k_kaiser(model),
                     pca::select_k_variance(model, 0.8), k);
  emit(out / "pca_selection.csv", sel.str());

  const auto scores = pca::transform(std_ds, model, k);
  io::write_dataset_csv(out / "dataset_pca.csv", scores, c.seed, c.label_column);
  log("wrote " + (out / "dataset_pca.csv").string());

  // Reconstruction error by k: with the model in hand PCA scores invert.
  std::vector<Eigen::Index> raw_cols;
  for (const auto& n : model.feature_names) raw_cols.push_back(ds.column_index(n));
  const Eigen::MatrixXd raw = ds.select_columns(raw_cols).features;
  std::ostringstream inv;
  inv << io::provenance_line(c.seed) << "k,rmse_raw_units\n";
  for (Eigen::Index kk = 1; kk <= model.dim(); ++kk) {
    const auto back = pca::invert(pca::transform(std_ds, model, kk), model, kk);
    const double rmse = std::sqrt((back.features - raw).squaredNorm() / static_cast<double>(raw.size()));
    inv << fmt::format("{},{:.17g}\n", kk, rmse);
  }
  emit(out / "pca_inversion.csv", inv.str());
  return kExitOk;
}

int cmd_compare(const cli::RunConfig& c, std::string tag) {
  const auto out = prepare_output(c);
  const fs::path in_path = c.compare_input.empty() ? out / "oob_input.csv" : c.compare_input;
  const fs::path tr_path = c.compare_transform.empty() ? out / "oob_epa.csv" : c.compare_transform;
  const auto input = io::read_oob_csv(in_path);
  const auto transformed = io::read_oob_csv(tr_path);
  dataset::ClassStats stats;
  if (!c.dataset.empty()) stats = dataset::class_counts(load_dataset(c));
  const auto report = eval::degradation_report(input, transformed, stats, c.compare_min_class_size);
  for (const auto& d : report.discrepancies) warn(kModule, d);

  if (tag.empty()) {
    tag = tr_path.stem().string();
    if (tag.rfind("oob_", 0) == 0) tag.erase(0, 4);
  }
  emit_stream(out / fmt::format("degradation_{}.csv", tag),
              [&](std::ostream& o) { io::write_degradation_csv(o, report, c.seed); });
  emit(out / fmt::format("degradation_{}.txt", tag),
       io::degradation_table(report, fmt::format("Performance degradation, input vs {}", tag)));

  const std::vector<std::string> dos(eval::kNormalAndDosClasses.begin() + 1,
                                     eval::kNormalAndDosClasses.end());
  const auto has = [&](const std::string& name) {
    return std::any_of(report.rows.begin(), report.rows.end(), [&](const eval::DegradationRow& r) {
      return r.name.size() == name.size() &&
             std::equal(r.name.begin(), r.name.end(), name.begin(),
                        [](char a, char b) { return std::tolower(a) == std::tolower(b); });
    });
  };
  if (std::all_of(dos.begin(), dos.end(), has)) {
    std::ostringstream g;
    g << io::provenance_line(c.seed) << "group,classes,pd\n";
    g << fmt::format("dos,{},{:.17g}\n", fmt::join(dos, ";"), eval::group_pd(report, dos));
    if (has(eval::kNormalAndDosClasses.front()))
      g << fmt::format("normal_and_dos,{},{:.17g}\n", fmt::join(eval::kNormalAndDosClasses, ";"),
                       eval::group_pd(report, eval::kNormalAndDosClasses));
    emit(out / fmt::format("degradation_{}_groups.csv", tag), g.str());
  }
  return kExitOk;
}

struct Triple {
  double a, b, alpha;
};

std::vector<Triple> preset_triples(const std::string& preset) {
  if (preset == "fig1") return {{0.22, 0.78, 0.1}, {0.32, 0.68, 0.04}, {0.1, 0.9, 0.05}};
  if (preset == "fig1-text") return {{0.22, 0.78, 0.03}, {0.32, 0.68, 0.04}, {0.1, 0.9, 0.05}};
  if (preset == "fig2") return {{0.22, 0.78, 0.05}, {0.32, 0.68, 0.10}, {0.1, 0.9, 0.15}};
  throw input_error(kModule, fmt::format("unknown ellipse preset '{}'", preset));
}

int cmd_ellipse(const cli::RunConfig& c, const std::string& preset,
                const std::vector<std::string>& triples, double y_value, int n_points) {
  const auto out = prepare_output(c);
  std::vector<Triple> params;
  std::string name = preset;
  if (!triples.empty()) {
    name = "custom";
    for (const auto& t : triples) {
      Triple tr{};
      char c1 = 0, c2 = 0;
      std::istringstream in(t);
      if (!(in >> tr.a >> c1 >> tr.b >> c2 >> tr.alpha) || c1 != ',' || c2 != ',')
        throw input_error(kModule, fmt::format("--triple '{}' is not a,b,alpha", t));
      params.push_back(tr);
    }
  } else {
    params = preset_triples(preset);
  }
  std::vector<io::EllipseSeries> series;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    epa::EllipseParams ep{y_value, p.a, p.b, p.alpha, n_points};
    series.push_back({fmt::format("a{}_b{}_alpha{}", p.a, p.b, p.alpha),
                      epa::ellipse_locus(ep, derive_seed(c.seed, {streams::kLocus, i}))});
  }
  emit_stream(out / fmt::format("ellipse_{}.csv", name),
              [&](std::ostream& o) { io::write_ellipse_csv(o, series, c.seed); });
  emit_stream(out / fmt::format("ellipse_{}.svg", name),
              [&](std::ostream& o) { io::write_ellipse_svg(o, series); });
  return kExitOk;
}

int cmd_attack(const cli::RunConfig& c, const std::string& pair, bool linear_control) {
  const auto out = prepare_output(c);
  if (c.epa_model.empty() && pair.empty())
    throw input_error(kModule, "attack needs --model (epa.model) or --pair first:second");
  std::optional<epa::EpaModel> model;
  if (pair.empty()) model = epa::load_model(c.epa_model);
  const Dataset ds = load_dataset(c);

  std::vector<io::SirRow> rows;
  bss::AttackOptions opt;
  opt.copies = c.tune.copies;
  opt.linear_control = linear_control;
  if (model) {
    model->validate(ds.cols());
    opt.alpha = model->alpha;
    for (std::size_t i = 0; i < model->pairs.size(); ++i) {
      const auto [f, s] = model->pairs[i];
      opt.fixed_weights = {model->a[i]};
      rows.push_back({fmt::format("{}", i + 1),
                      bss::bss_attack(ds.features.col(f), ds.features.col(s), opt,
                                      tuning::verification_seed(c.seed, i))});
    }
  } else {
    const auto plan = cli::parse_pairing(pair);
    if (plan.kind != cli::PairingPlan::Kind::kExplicit || plan.explicit_pairs.size() != 1)
      throw input_error(kModule, "--pair expects exactly one first:second pair");
    const auto& [fn, sn] = plan.explicit_pairs.front();
    opt.alpha = c.tune.alpha;
    rows.push_back({fn + ":" + sn,
                    bss::bss_attack(ds.features.col(ds.column_index(fn)),
                                    ds.features.col(ds.column_index(sn)), opt,
                                    derive_seed(c.seed, {streams::kAttack}))});
  }
  for (const auto& r : rows)
    log(fmt::format("pair {}: SIR {:.3f} dB ({})", r.pair_id, r.report.sir_db,
                    r.report.recoverable ? "recoverable" : "not recoverable"));
  emit_stream(out / (linear_control ? "sir_linear.csv" : "sir.csv"),
              [&](std::ostream& o) { io::write_sir_csv(o, rows, c.seed); });
  return kExitOk;
}

int cmd_select(const cli::RunConfig& c, double delta) {
  const auto out = prepare_output(c);
  const Dataset ds = load_dataset(c);
  const auto forest = rforest::train(ds, c.rf);
  emit_stream(out / "feature_importance.csv", [&](std::ostream& o) {
    io::write_feature_scores_csv(o, rforest::permutation_importance(forest, ds, c.seed), c.seed);
  });
  const auto res = dataset::backward_elimination(ds, c.rf, delta, c.seed);
  std::ostringstream hist;
  hist << io::provenance_line(c.seed) << "step,n_features,oob_error,features\n";
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    std::vector<std::string> names;
    for (auto j : res.history[i].features) names.push_back(ds.feature_names[static_cast<std::size_t>(j)]);
    hist << fmt::format("{},{},{:.17g},{}\n", i, names.size(), res.history[i].oob_error, fmt::join(names, ";"));
  }
  emit(out / "feature_selection.csv", hist.str());
  emit(out / "selected_features.txt", fmt::format("feature_list = {}\n", fmt::join(res.names, ",")));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptical perturbation toolkit: tuning, transforms, attacks and evaluation"};
  app.set_version_flag("--version", std::string(ELLIPT_VERSION));
  app.require_subcommand(1);

  Settings settings;
  std::string variant = "input";
  std::string tag;
  std::string preset = "fig1";
  std::vector<std::string> triples;
  double y_value = 1.0;
  int n_points = 200;
  std::string pair;
  bool linear_control = false;
  double delta = 0.0;

  auto* classify = app.add_subcommand("classify", "Random forest OOB report on a dataset variant");
  add_config_options(classify, settings);
  classify->add_option("--variant", variant, "input | epa | pca")
      ->check(CLI::IsMember({"input", "epa", "pca"}));

  auto* tune = app.add_subcommand("tune", "Monte Carlo search for the EPA weights");
  add_config_options(tune, settings);
  tune->add_option_function<std::string>(
      "--reuse-cycle", [&](const std::string& v) { settings.overrides["tune.reuse_cycle"] = v; },
      "Tune only the first N pairs and cycle their weights");

  auto* transform = app.add_subcommand("transform", "Write the EPA-transformed dataset");
  add_config_options(transform, settings);

  auto* pca_cmd = app.add_subcommand("pca", "Fit the PCA baseline and write scores");
  add_config_options(pca_cmd, settings);

  auto* compare = app.add_subcommand("compare", "Per-class degradation between two OOB reports");
  add_config_options(compare, settings);
  compare->add_option("--tag", tag, "Output name suffix (default: from the transform report)");

  auto* ellipse = app.add_subcommand("ellipse", "Sample elliptical loci");
  add_config_options(ellipse, settings);
  ellipse->add_option("--preset", preset, "fig1 | fig1-text | fig2")
      ->check(CLI::IsMember({"fig1", "fig1-text", "fig2"}));
  ellipse->add_option("--triple", triples, "a,b,alpha (repeatable; replaces the preset)");
  ellipse->add_option("--y", y_value, "Level y of the locus");
  ellipse->add_option("--n-points", n_points, "Points per series");

  auto* attack = app.add_subcommand("attack", "BSS attack on model pairs or a single column pair");
  add_config_options(attack, settings);
  attack->add_option_function<std::string>(
      "--model", [&](const std::string& v) { settings.overrides["epa.model"] = v; }, "EPA model file");
  attack->add_option("--pair", pair, "first:second feature names");
  attack->add_flag("--linear-control", linear_control, "Mix linearly instead of elliptically");

  auto* select = app.add_subcommand("select", "Permutation importance and backward elimination");
  add_config_options(select, settings);
  select->add_option("--delta", delta, "Tolerated OOB increase before stopping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const auto cfg = resolve(settings);
    if (*classify) return cmd_classify(cfg, variant);
    if (*tune) return cmd_tune(cfg);
    if (*transform) return cmd_transform(cfg);
    if (*pca_cmd) return cmd_pca(cfg);
    if (*compare) return cmd_compare(cfg, tag);
    if (*ellipse) return cmd_ellipse(cfg, preset, triples, y_value, n_points);
    if (*attack) return cmd_attack(cfg, pair, linear_control);
    if (*select) return cmd_select(cfg, delta);
  } catch (const Error& e) {
    std::cerr << fmt::format("error module={} message=\"{}\"\n", e.module(), e.what());
    return e.kind() == ErrorKind::kNumerical ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error module=cli message=\"{}\"\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
