#pragma once

#include "ellipt/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ellipt::rforest {

struct RfConfig {
  int n_trees = 500;
  std::optional<int> mtry;       // default floor(sqrt(p))
  int min_node_size = 1;         // nodes this small become leaves
  std::optional<int> max_depth;  // unlimited when empty
  std::uint64_t seed = 1;
  int threads = 0;               // 0 = hardware concurrency

  int resolved_mtry(Eigen::Index p) const;
  void validate(Eigen::Index p) const;
};

// Flat binary tree. Leaves carry the bootstrap class counts that reached them.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int counts_offset = -1;  // into leaf_counts, leaves only
    int vote = -1;           // leaf majority class, lowest id on ties
  };

  template <typename Row>
  int predict(const Row& row) const {
    int at = 0;
    while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
      const Node& n = nodes_[static_cast<std::size_t>(at)];
      at = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(at)].vote;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::span<const int> leaf_counts(const Node& leaf) const;
  int n_classes() const { return n_classes_; }

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
  std::vector<int> leaf_counts_;
  int n_classes_ = 0;
};

struct Forest {
  std::vector<DecisionTree> trees;
  // in_bag[t][i] = number of times row i was drawn for tree t.
  std::vector<std::vector<std::uint16_t>> in_bag;
  std::vector<int> classes;  // labels present at training time, ascending
  int n_classes = 0;         // size of the label space (max label + 1)
  Eigen::Index n_rows = 0;
  Eigen::Index n_features = 0;

  bool is_oob(std::size_t tree, Eigen::Index row) const {
    return in_bag[tree][static_cast<std::size_t>(row)] == 0;
  }
};

struct ClassOob {
  int label = 0;
  std::string name;
  long correct = 0;
  long misclassified = 0;
  double rate = 0.0;  // misclassified / (correct + misclassified), 0 when empty
};

struct OobReport {
  double overall_oob = 0.0;
  long votable_rows = 0;
  std::vector<ClassOob> classes;

  const ClassOob* find(int label) const;
};

struct FeatureScore {
  Eigen::Index feature = 0;
  std::string name;
  double score = 0.0;
};

// 1 - sum_k p_k^2.
double gini(std::span<const double> counts);
double gini(std::span<const int> counts);

Forest train(const Dataset& ds, const RfConfig& config);

int predict(const Forest& forest, const Eigen::Ref<const Eigen::VectorXd>& row);

// Plurality over per-tree votes; ties go to the lowest class id.
int plurality(std::span<const int> votes_per_class);

// OOB majority vote per row; std::nullopt for rows that were in every
// bootstrap sample.
std::vector<std::optional<int>> oob_predictions(const Forest& forest,
                                                const Eigen::MatrixXd& features);

OobReport oob_report(const Forest& forest, const Dataset& ds);

// Descending by score (permuted OOB error minus baseline OOB error).
std::vector<FeatureScore> permutation_importance(const Forest& forest, const Dataset& ds,
                                                 std::uint64_t seed);

}  // namespace ellipt::rforest
