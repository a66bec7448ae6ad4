#include "ellipt/tuning.hpp"

#include "ellipt/error.hpp"
#include "ellipt/rng.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace ellipt::tuning {
namespace {

constexpr const char* kModule = "tuning";

}  // namespace

void TuneConfig::validate() const {
  if (n_trials < 1) throw input_error(kModule, "n_trials must be at least 1");
  if (!(sir_threshold_db > 0.0)) throw input_error(kModule, "sir_threshold_db must be positive");
  if (!(alpha >= 0.0)) throw input_error(kModule, "alpha must be nonnegative");
  if (copies < 2) throw input_error(kModule, "copies must be at least 2");
}

bool TuneResult::all_satisfiable() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const PairTuning& p) { return p.satisfiable; });
}

double candidate_weight(std::uint64_t seed, std::size_t pair_id, int trial) {
  Stream rng = make_stream(seed, {streams::kTune, pair_id, static_cast<std::uint64_t>(trial), 0});
  return std::uniform_real_distribution<double>(0.01, 0.99)(rng);
}

std::uint64_t candidate_attack_seed(std::uint64_t seed, std::size_t pair_id, int trial) {
  return derive_seed(seed, {streams::kTune, pair_id, static_cast<std::uint64_t>(trial), 1});
}

std::uint64_t candidate_objective_seed(std::uint64_t seed, std::size_t pair_id, int trial) {
  return derive_seed(seed, {streams::kTune, pair_id, static_cast<std::uint64_t>(trial), 2});
}

std::uint64_t verification_seed(std::uint64_t seed, std::size_t pair_id) {
  return derive_seed(seed, {streams::kVerify, pair_id});
}

PairTuning tune_pair(const Eigen::Ref<const Eigen::VectorXd>& x1,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const TuneConfig& config,
                     std::size_t pair_id) {
  config.validate();
  PairTuning out;
  out.pair_id = pair_id;
  out.candidates.reserve(static_cast<std::size_t>(config.n_trials));

  for (int j = 0; j < config.n_trials; ++j) {
    Candidate c;
    c.trial = j;
    c.a = candidate_weight(config.seed, pair_id, j);
    bss::AttackOptions opts;
    opts.copies = config.copies;
    opts.alpha = config.alpha;
    opts.fixed_weights = {c.a};
    const auto report = bss::bss_attack(x1, x2, opts, candidate_attack_seed(config.seed, pair_id, j));
    c.sir_db = report.sir_db;
    c.jade_converged = report.jade_converged;
    c.objective = epa::correlation_objective(x1, x2, c.a, config.alpha,
                                             candidate_objective_seed(config.seed, pair_id, j));
    out.candidates.push_back(c);
  }

  const Candidate* pick = nullptr;
  for (const auto& c : out.candidates)
    if (c.sir_db <= config.sir_threshold_db && (!pick || c.objective < pick->objective)) pick = &c;
  out.satisfiable = pick != nullptr;
  if (!pick) {
    for (const auto& c : out.candidates)
      if (!pick || c.sir_db < pick->sir_db) pick = &c;
  }
  out.a = pick->a;
  out.sir_db = pick->sir_db;
  out.objective = pick->objective;
  return out;
}

std::pair<epa::EpaModel, TuneResult> tune_model(const Dataset& ds,
                                                const std::vector<epa::FeaturePair>& pairs,
                                                const TuneConfig& config,
                                                std::optional<int> reuse_cycle) {
  config.validate();
  if (pairs.empty()) throw input_error(kModule, "pairing plan is empty");
  if (reuse_cycle && *reuse_cycle < 1) throw input_error(kModule, "reuse_cycle must be at least 1");
  for (const auto& [f, s] : pairs) {
    for (Eigen::Index j : {f, s}) {
      if (j < 0 || j >= ds.cols())
        throw input_error(kModule, fmt::format("pair index {} out of range", j));
      if (ds.features.col(j).minCoeff() < 0.0)
        throw input_error(kModule, fmt::format("column '{}' has negative values",
                                               ds.feature_names[static_cast<std::size_t>(j)]));
    }
  }

  TuneResult result;
  std::vector<double> a;
  const std::size_t tuned = reuse_cycle ? std::min<std::size_t>(static_cast<std::size_t>(*reuse_cycle), pairs.size())
                                        : pairs.size();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k < tuned) {
      PairTuning pt = tune_pair(ds.features.col(pairs[k].first), ds.features.col(pairs[k].second),
                                config, k);
      pt.features = pairs[k];
      result.pairs.push_back(std::move(pt));
    } else {
      const std::size_t src = k % tuned;
      PairTuning pt;
      pt.pair_id = k;
      pt.features = pairs[k];
      pt.a = result.pairs[src].a;
      pt.reused_from = src;
      result.pairs.push_back(std::move(pt));
    }
    a.push_back(result.pairs.back().a);
  }

  // Verification: attack every pair of the assembled model with its weight.
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    bss::AttackOptions opts;
    opts.copies = config.copies;
    opts.alpha = config.alpha;
    opts.fixed_weights = {a[k]};
    const auto& [f, s] = pairs[k];
    auto report = bss::bss_attack(ds.features.col(f), ds.features.col(s), opts,
                                  verification_seed(config.seed, k));
    auto& pt = result.pairs[k];
    if (pt.reused_from) {
      pt.sir_db = report.sir_db;
      pt.satisfiable = report.sir_db <= config.sir_threshold_db;
      pt.objective = epa::correlation_objective(ds.features.col(f), ds.features.col(s), pt.a,
                                                config.alpha, verification_seed(config.seed, k));
    }
    result.verification.push_back(std::move(report));
  }

  epa::EpaModel model;
  model.pairs = pairs;
  model.a = std::move(a);
  model.alpha = config.alpha;
  std::vector<bool> used(static_cast<std::size_t>(ds.cols()), false);
  for (const auto& [f, s] : pairs) used[static_cast<std::size_t>(f)] = used[static_cast<std::size_t>(s)] = true;
  for (Eigen::Index j = 0; j < ds.cols(); ++j)
    if (!used[static_cast<std::size_t>(j)]) {
      if (model.passthrough)
        throw input_error(kModule, "pairing plan leaves more than one feature uncovered");
      model.passthrough = j;
    }
  model.validate(ds.cols());
  return {std::move(model), std::move(result)};
}

}  // namespace ellipt::tuning
