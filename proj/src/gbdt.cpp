#include "gcsim/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gcsim/common.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

double RegressionTree::predict(std::span<const double> row) const {
  int n = 0;
  while (!nodes[n].is_leaf()) {
    n = row[nodes[n].feature] < nodes[n].threshold ? nodes[n].left : nodes[n].right;
  }
  return nodes[n].value;
}

double GBDTModel::predict_raw(std::span<const double> row) const {
  GCSIM_CHECK(row.size() == feature_count, "feature width mismatch");
  double out = base;
  for (const auto& tree : trees) out += learning_rate * tree.predict(row);
  return out;
}

void Dataset::add_row(std::span<const double> features, double target) {
  if (columns.empty()) columns.resize(features.size());
  GCSIM_CHECK(columns.size() == features.size(), "inconsistent feature width");
  for (size_t f = 0; f < features.size(); ++f) columns[f].push_back(features[f]);
  targets.push_back(target);
  ++rows;
}

namespace {

// Exact greedy CART trainer over pre-sorted per-feature index arrays. Node
// sample sets stay contiguous in every per-feature array; splitting a node
// stable-partitions each array so sorted order survives.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const GBDTConfig& config)
      : data_(data), config_(config), n_(data.rows), f_count_(data.columns.size()) {
    order_.resize(f_count_);
    for (size_t f = 0; f < f_count_; ++f) {
      auto& ord = order_[f];
      ord.resize(n_);
      std::iota(ord.begin(), ord.end(), 0u);
      const auto& col = data_.columns[f];
      std::stable_sort(ord.begin(), ord.end(),
                       [&col](uint32_t a, uint32_t b) { return col[a] < col[b]; });
    }
    scratch_.resize(n_);
    goes_left_.resize(n_);
    base_order_ = order_;
  }

  // Builds one tree on the residuals; train_output[i] receives the leaf value
  // sample i landed in, so the boosting loop can update predictions without
  // re-walking the tree.
  RegressionTree build(const std::vector<double>& residuals, std::vector<double>* train_output) {
    residuals_ = &residuals;
    train_output_ = train_output;
    order_ = base_order_;
    RegressionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, 0, n_, 0);
    return tree;
  }

 private:
  struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    size_t left_count = 0;
  };

  double node_sum(size_t begin, size_t end) const {
    const auto& ord = order_[0];
    double s = 0.0;
    for (size_t i = begin; i < end; ++i) s += (*residuals_)[ord[i]];
    return s;
  }

  Split best_split(size_t begin, size_t end) const {
    const size_t count = end - begin;
    const double total_sum = node_sum(begin, end);
    const double parent_score = total_sum * total_sum / static_cast<double>(count);
    const size_t min_leaf = static_cast<size_t>(std::max(1, config_.min_samples_leaf));
    Split best;
    if (count < 2 * min_leaf) return best;
    for (size_t f = 0; f < f_count_; ++f) {
      const auto& ord = order_[f];
      const auto& col = data_.columns[f];
      double left_sum = 0.0;
      for (size_t i = begin; i + 1 < end; ++i) {
        const uint32_t idx = ord[i];
        left_sum += (*residuals_)[idx];
        const size_t left_count = i - begin + 1;
        if (left_count < min_leaf) continue;
        if (count - left_count < min_leaf) break;
        const double v = col[idx];
        const double v_next = col[ord[i + 1]];
        if (v == v_next) continue;  // not a boundary between distinct values
        const double right_sum = total_sum - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(left_count) +
                             right_sum * right_sum / static_cast<double>(count - left_count);
        const double gain = score - parent_score;
        if (gain > best.gain + 1e-12) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = v + (v_next - v) / 2.0;
          best.left_count = left_count;
        }
      }
    }
    return best;
  }

  void grow(RegressionTree& tree, int node, size_t begin, size_t end, int depth) {
    const size_t count = end - begin;
    Split split;
    if (depth < config_.max_depth) split = best_split(begin, end);
    if (split.feature < 0) {
      tree.nodes[node].feature = -1;
      const double value = node_sum(begin, end) / static_cast<double>(count);
      tree.nodes[node].value = value;
      for (size_t i = begin; i < end; ++i) (*train_output_)[order_[0][i]] = value;
      return;
    }

    const auto& split_col = data_.columns[split.feature];
    for (size_t i = begin; i < end; ++i) {
      const uint32_t idx = order_[split.feature][i];
      goes_left_[idx] = split_col[idx] < split.threshold;
    }
    for (size_t f = 0; f < f_count_; ++f) {
      auto& ord = order_[f];
      size_t lo = begin, hi = 0;
      for (size_t i = begin; i < end; ++i) {
        const uint32_t idx = ord[i];
        if (goes_left_[idx]) ord[lo++] = idx;
        else scratch_[hi++] = idx;
      }
      std::copy(scratch_.begin(), scratch_.begin() + hi, ord.begin() + lo);
    }

    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].feature = split.feature;
    tree.nodes[node].threshold = split.threshold;
    tree.nodes[node].left = left;
    tree.nodes[node].right = right;
    grow(tree, left, begin, begin + split.left_count, depth + 1);
    grow(tree, right, begin + split.left_count, end, depth + 1);
  }

  const Dataset& data_;
  const GBDTConfig& config_;
  const size_t n_;
  const size_t f_count_;
  const std::vector<double>* residuals_ = nullptr;
  std::vector<double>* train_output_ = nullptr;
  std::vector<std::vector<uint32_t>> order_;
  std::vector<std::vector<uint32_t>> base_order_;
  std::vector<uint32_t> scratch_;
  std::vector<char> goes_left_;
};

void run_boosting(GBDTModel* model, const Dataset& data, const GBDTConfig& config, int rounds) {
  GCSIM_CHECK(data.rows > 0, "empty dataset");
  for (const auto& col : data.columns)
    for (double v : col) GCSIM_CHECK(std::isfinite(v), "non-finite feature");
  for (double t : data.targets) GCSIM_CHECK(std::isfinite(t), "non-finite target");

  std::vector<double> pred(data.rows);
  std::vector<double> row(data.columns.size());
  for (size_t i = 0; i < data.rows; ++i) {
    for (size_t f = 0; f < data.columns.size(); ++f) row[f] = data.columns[f][i];
    pred[i] = model->predict_raw(row);
  }
  std::vector<double> residuals(data.rows);
  std::vector<double> leaf_out(data.rows);
  TreeBuilder builder(data, config);
  for (int r = 0; r < rounds; ++r) {
    for (size_t i = 0; i < data.rows; ++i) residuals[i] = data.targets[i] - pred[i];
    RegressionTree tree = builder.build(residuals, &leaf_out);
    for (size_t i = 0; i < data.rows; ++i) pred[i] += model->learning_rate * leaf_out[i];
    model->trees.push_back(std::move(tree));
  }
}

}  // namespace

GBDTModel train_gbdt(const Dataset& data, const GBDTConfig& config) {
  if (config.rounds <= 0) throw InvalidArgError("gbdt: rounds must be positive");
  if (data.rows == 0) throw InvalidArgError("gbdt: empty dataset");
  GBDTModel model;
  model.learning_rate = config.learning_rate;
  model.feature_count = data.columns.size();
  model.base = std::accumulate(data.targets.begin(), data.targets.end(), 0.0) /
               static_cast<double>(data.rows);
  run_boosting(&model, data, config, config.rounds);
  return model;
}

void boost_rounds(GBDTModel* model, const Dataset& data, const GBDTConfig& config,
                  int extra_rounds) {
  if (extra_rounds <= 0) return;
  GCSIM_CHECK(data.columns.size() == model->feature_count, "feature width mismatch");
  run_boosting(model, data, config, extra_rounds);
}

std::string gbdt_to_json(const GBDTModel& model) {
  json doc;
  doc["base"] = model.base;
  doc["learning_rate"] = model.learning_rate;
  doc["feature_count"] = model.feature_count;
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

GBDTModel gbdt_from_json(const std::string& text) {
  json doc = json::parse(text);
  GBDTModel model;
  model.base = doc["base"].get<double>();
  model.learning_rate = doc["learning_rate"].get<double>();
  model.feature_count = doc["feature_count"].get<size_t>();
  for (const auto& tree_json : doc["trees"]) {
    RegressionTree tree;
    for (const auto& n : tree_json) {
      TreeNode node;
      node.feature = n[0].get<int>();
      node.threshold = n[1].get<double>();
      node.left = n[2].get<int>();
      node.right = n[3].get<int>();
      node.value = n[4].get<double>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace gcsim
