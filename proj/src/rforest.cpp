#include "ellipt/rforest.hpp"

#include "ellipt/error.hpp"
#include "ellipt/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace ellipt::rforest {
namespace {

constexpr const char* kModule = "rforest";

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum_k cL_k^2 / nL + sum_k cR_k^2 / nR; larger is purer
};

int majority(std::span<const int> counts) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(counts.size()); ++k)
    if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(best)]) best = k;
  return best;
}

unsigned worker_count(int requested, int jobs) {
  unsigned n = requested > 0 ? static_cast<unsigned>(requested) : std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  return std::min<unsigned>(n, static_cast<unsigned>(std::max(jobs, 1)));
}

template <typename Fn>
void parallel_for(int jobs, int threads, Fn&& fn) {
  const unsigned workers = worker_count(threads, jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < jobs; i = next++) fn(i);
    });
}

}  // namespace

// Grows one tree over a bootstrap sample; rows are partitioned in place.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<int>& labels, int n_classes,
              const RfConfig& cfg, int mtry, Stream& rng)
      : x_(x), labels_(labels), n_classes_(n_classes), cfg_(cfg), mtry_(mtry), rng_(rng) {
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build(std::vector<int> rows) {
    tree_.n_classes_ = n_classes_;
    rows_ = std::move(rows);
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, int depth) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(labels_[rows_[i]])];

    const int id = static_cast<int>(tree_.nodes_.size());
    tree_.nodes_.emplace_back();

    const auto size = static_cast<long>(end - begin);
    const bool pure = std::count(counts.begin(), counts.end(), 0) >= n_classes_ - 1;
    const bool too_small = size <= cfg_.min_node_size;
    const bool too_deep = cfg_.max_depth && depth >= *cfg_.max_depth;
    Split split;
    if (!pure && !too_small && !too_deep) split = best_split(begin, end, counts);

    if (split.feature < 0) {
      auto& node = tree_.nodes_[static_cast<std::size_t>(id)];
      node.counts_offset = static_cast<int>(tree_.leaf_counts_.size());
      node.vote = majority(counts);
      tree_.leaf_counts_.insert(tree_.leaf_counts_.end(), counts.begin(), counts.end());
      return id;
    }

    const auto mid = std::partition(rows_.begin() + static_cast<long>(begin),
                                    rows_.begin() + static_cast<long>(end), [&](int r) {
                                      return x_(r, split.feature) <= split.threshold;
                                    });
    const auto mid_at = static_cast<std::size_t>(mid - rows_.begin());
    const int left = grow(begin, mid_at, depth + 1);
    const int right = grow(mid_at, end, depth + 1);
    auto& node = tree_.nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  Split best_split(std::size_t begin, std::size_t end, const std::vector<int>& parent_counts) {
    const auto n = static_cast<double>(end - begin);
    double parent_score = 0.0;
    for (int c : parent_counts) parent_score += double(c) * c;
    parent_score /= n;

    // Partial Fisher-Yates: the first mtry entries are the sampled features.
    for (int k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<int> pick(k, static_cast<int>(features_.size()) - 1);
      std::swap(features_[static_cast<std::size_t>(k)], features_[static_cast<std::size_t>(pick(rng_))]);
    }

    Split best;
    best.score = parent_score * (1.0 + 1e-12) + 1e-12;
    std::vector<std::pair<double, int>> column(end - begin);
    std::vector<int> left(static_cast<std::size_t>(n_classes_));
    for (int k = 0; k < mtry_; ++k) {
      const int f = features_[static_cast<std::size_t>(k)];
      for (std::size_t i = begin; i < end; ++i)
        column[i - begin] = {x_(rows_[i], f), labels_[rows_[i]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0.0;
      double right_sq = 0.0;
      for (int c : parent_counts) right_sq += double(c) * c;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto k_cls = static_cast<std::size_t>(column[i].second);
        const double l = left[k_cls];
        const double r = parent_counts[k_cls] - l;
        left_sq += 2.0 * l + 1.0;
        right_sq -= 2.0 * r - 1.0;
        ++left[k_cls];
        if (column[i].first == column[i + 1].first) continue;
        const double n_left = double(i + 1);
        const double score = left_sq / n_left + right_sq / (n - n_left);
        if (score > best.score) {
          best.score = score;
          best.feature = f;
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          // Midpoints can round onto the upper value for adjacent doubles.
          if (!(best.threshold < column[i + 1].first)) best.threshold = column[i].first;
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const std::vector<int>& labels_;
  int n_classes_;
  const RfConfig& cfg_;
  int mtry_;
  Stream& rng_;
  std::vector<int> features_;
  std::vector<int> rows_;
  DecisionTree tree_;
};

int RfConfig::resolved_mtry(Eigen::Index p) const {
  if (mtry) return *mtry;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
}

void RfConfig::validate(Eigen::Index p) const {
  if (n_trees < 1) throw input_error(kModule, "n_trees must be at least 1");
  const int m = resolved_mtry(p);
  if (m < 1 || m > p) throw input_error(kModule, fmt::format("mtry {} outside [1, {}]", m, p));
  if (min_node_size < 1) throw input_error(kModule, "min_node_size must be at least 1");
  if (max_depth && *max_depth < 0) throw input_error(kModule, "max_depth must be nonnegative");
}

std::span<const int> DecisionTree::leaf_counts(const Node& leaf) const {
  return {leaf_counts_.data() + leaf.counts_offset, static_cast<std::size_t>(n_classes_)};
}

const ClassOob* OobReport::find(int label) const {
  for (const auto& c : classes)
    if (c.label == label) return &c;
  return nullptr;
}

double gini(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0) throw input_error(kModule, "gini: negative count");
    total += c;
  }
  if (total <= 0) throw input_error(kModule, "gini: all counts are zero");
  double sq = 0.0;
  for (double c : counts) sq += (c / total) * (c / total);
  return 1.0 - sq;
}

double gini(std::span<const int> counts) {
  std::vector<double> d(counts.begin(), counts.end());
  return gini(std::span<const double>(d));
}

int plurality(std::span<const int> votes_per_class) { return majority(votes_per_class); }

Forest train(const Dataset& ds, const RfConfig& config) {
  if (ds.rows() < 2) throw input_error(kModule, "training needs at least 2 rows");
  ds.validate();
  config.validate(ds.cols());

  Forest forest;
  forest.n_rows = ds.rows();
  forest.n_features = ds.cols();
  forest.classes.assign(ds.labels.begin(), ds.labels.end());
  std::sort(forest.classes.begin(), forest.classes.end());
  forest.classes.erase(std::unique(forest.classes.begin(), forest.classes.end()), forest.classes.end());
  if (forest.classes.size() < 2) throw input_error(kModule, "training needs at least 2 classes");
  forest.n_classes = forest.classes.back() + 1;

  const int mtry = config.resolved_mtry(ds.cols());
  const auto n = static_cast<int>(ds.rows());
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  forest.in_bag.assign(static_cast<std::size_t>(config.n_trees), {});

  parallel_for(config.n_trees, config.threads, [&](int t) {
    Stream rng = make_stream(config.seed, {streams::kForest, static_cast<std::uint64_t>(t)});
    std::uniform_int_distribution<int> draw(0, n - 1);
    std::vector<int> rows(static_cast<std::size_t>(n));
    auto& bag = forest.in_bag[static_cast<std::size_t>(t)];
    bag.assign(static_cast<std::size_t>(n), 0);
    for (auto& r : rows) {
      r = draw(rng);
      ++bag[static_cast<std::size_t>(r)];
    }
    TreeBuilder builder(ds.features, ds.labels, forest.n_classes, config, mtry, rng);
    forest.trees[static_cast<std::size_t>(t)] = builder.build(std::move(rows));
  });
  return forest;
}

int predict(const Forest& forest, const Eigen::Ref<const Eigen::VectorXd>& row) {
  if (row.size() != forest.n_features)
    throw input_error(kModule, fmt::format("row has {} features, forest expects {}", row.size(),
                                           forest.n_features));
  std::vector<int> votes(static_cast<std::size_t>(forest.n_classes), 0);
  for (const auto& tree : forest.trees)
    ++votes[static_cast<std::size_t>(tree.predict([&](int f) { return row(f); }))];
  return plurality(votes);
}

std::vector<std::optional<int>> oob_predictions(const Forest& forest,
                                                const Eigen::MatrixXd& features) {
  if (features.rows() != forest.n_rows || features.cols() != forest.n_features)
    throw input_error(kModule, fmt::format("dataset is {}x{}, forest was trained on {}x{}",
                                           features.rows(), features.cols(), forest.n_rows,
                                           forest.n_features));
  const auto n = static_cast<std::size_t>(forest.n_rows);
  const auto k = static_cast<std::size_t>(forest.n_classes);
  std::vector<int> votes(n * k, 0);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& tree = forest.trees[t];
    for (std::size_t i = 0; i < n; ++i) {
      if (!forest.is_oob(t, static_cast<Eigen::Index>(i))) continue;
      const auto row = features.row(static_cast<Eigen::Index>(i));
      ++votes[i * k + static_cast<std::size_t>(tree.predict([&](int f) { return row(f); }))];
    }
  }
  std::vector<std::optional<int>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const int> v(votes.data() + i * k, k);
    if (std::any_of(v.begin(), v.end(), [](int c) { return c > 0; })) out[i] = plurality(v);
  }
  return out;
}

namespace {

OobReport report_from(const std::vector<std::optional<int>>& pred, const Dataset& ds) {
  std::map<int, std::pair<long, long>> tally;
  for (const auto& [id, name] : ds.class_names) tally[id] = {0, 0};
  long votable = 0;
  long wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred[i]) continue;
    ++votable;
    auto& [correct, miss] = tally[ds.labels[i]];
    if (*pred[i] == ds.labels[i]) {
      ++correct;
    } else {
      ++miss;
      ++wrong;
    }
  }
  OobReport r;
  r.votable_rows = votable;
  r.overall_oob = votable > 0 ? double(wrong) / double(votable) : 0.0;
  for (const auto& [id, cm] : tally) {
    ClassOob c;
    c.label = id;
    const auto it = ds.class_names.find(id);
    c.name = it == ds.class_names.end() ? std::to_string(id) : it->second;
    c.correct = cm.first;
    c.misclassified = cm.second;
    const long total = cm.first + cm.second;
    c.rate = total > 0 ? double(cm.second) / double(total) : 0.0;
    r.classes.push_back(std::move(c));
  }
  return r;
}

}  // namespace

OobReport oob_report(const Forest& forest, const Dataset& ds) {
  if (static_cast<Eigen::Index>(ds.labels.size()) != forest.n_rows)
    throw input_error(kModule, "forest/dataset size mismatch");
  return report_from(oob_predictions(forest, ds.features), ds);
}

std::vector<FeatureScore> permutation_importance(const Forest& forest, const Dataset& ds,
                                                 std::uint64_t seed) {
  const double base = oob_report(forest, ds).overall_oob;
  std::vector<FeatureScore> out;
  Eigen::MatrixXd permuted = ds.features;
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    Stream rng = make_stream(seed, {streams::kImportance, static_cast<std::uint64_t>(j)});
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i = 0; i < ds.rows(); ++i)
      permuted(i, j) = ds.features(order[static_cast<std::size_t>(i)], j);
    const double err = report_from(oob_predictions(forest, permuted), ds).overall_oob;
    permuted.col(j) = ds.features.col(j);
    out.push_back({j, ds.feature_names[static_cast<std::size_t>(j)], err - base});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
  return out;
}

}  // namespace ellipt::rforest
