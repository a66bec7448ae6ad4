#pragma once

#include "ellipt/bss.hpp"
#include "ellipt/dataset.hpp"
#include "ellipt/epa.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace ellipt::tuning {

struct TuneConfig {
  int n_trials = 200;
  double alpha = 0.001;
  double sir_threshold_db = bss::kRecoverableDb;
  int copies = 4;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Candidate {
  int trial = 0;
  double a = 0.0;
  double sir_db = 0.0;
  double objective = 0.0;
  bool jade_converged = true;
};

struct PairTuning {
  std::size_t pair_id = 0;
  epa::FeaturePair features{0, 0};
  double a = 0.0;
  double sir_db = 0.0;
  double objective = 0.0;
  bool satisfiable = false;
  std::optional<std::size_t> reused_from;  // set when the weight was cycled
  std::vector<Candidate> candidates;
};

struct TuneResult {
  std::vector<PairTuning> pairs;
  // One attack per pair of the assembled model, with its a among the copies.
  std::vector<bss::SirReport> verification;

  bool all_satisfiable() const;
};

// Candidate j of pair `pair_id` draws only from (seed, pair_id, j), so a run
// with more trials extends, never reshuffles, a run with fewer.
double candidate_weight(std::uint64_t seed, std::size_t pair_id, int trial);
std::uint64_t candidate_attack_seed(std::uint64_t seed, std::size_t pair_id, int trial);
std::uint64_t candidate_objective_seed(std::uint64_t seed, std::size_t pair_id, int trial);
std::uint64_t verification_seed(std::uint64_t seed, std::size_t pair_id);

PairTuning tune_pair(const Eigen::Ref<const Eigen::VectorXd>& x1,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const TuneConfig& config,
                     std::size_t pair_id = 0);

// With reuse_cycle = c only the first c pairs are tuned and their weights are
// repeated across the remaining pairs.
std::pair<epa::EpaModel, TuneResult> tune_model(const Dataset& ds,
                                                const std::vector<epa::FeaturePair>& pairs,
                                                const TuneConfig& config,
                                                std::optional<int> reuse_cycle = std::nullopt);

}  // namespace ellipt::tuning
