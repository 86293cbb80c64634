#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gcsim {

struct TreeNode {
  int feature = -1;     // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;   // leaf output
  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> row) const;
};

struct GBDTConfig {
  int rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 6;
  int min_samples_leaf = 20;
};

// Additive ensemble fit to squared error: base prediction is the target mean,
// every round fits one depth-limited tree to the current residuals with exact
// greedy variance-reduction splits. Deterministic given config and data order.
struct GBDTModel {
  double base = 0.0;
  double learning_rate = 0.1;
  size_t feature_count = 0;
  std::vector<RegressionTree> trees;

  double predict_raw(std::span<const double> row) const;
};

struct Dataset {
  size_t rows = 0;
  std::vector<std::vector<double>> columns;  // column-major features
  std::vector<double> targets;

  void add_row(std::span<const double> features, double target);
};

GBDTModel train_gbdt(const Dataset& data, const GBDTConfig& config);

// Continues boosting an existing model with extra rounds fit on `data`
// residuals (the fine-tuning path).
void boost_rounds(GBDTModel* model, const Dataset& data, const GBDTConfig& config,
                  int extra_rounds);

std::string gbdt_to_json(const GBDTModel& model);
GBDTModel gbdt_from_json(const std::string& text);

}  // namespace gcsim
