#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "doctest.h"
#include "gcsim/common.hpp"
#include "gcsim/gbdt.hpp"

using namespace gcsim;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets) {
  Dataset d;
  for (size_t i = 0; i < rows.size(); ++i) d.add_row(rows[i], targets[i]);
  return d;
}

double predict_prefix(const GBDTModel& model, std::span<const double> row, size_t k) {
  double out = model.base;
  for (size_t i = 0; i < k && i < model.trees.size(); ++i)
    out += model.learning_rate * model.trees[i].predict(row);
  return out;
}

// Brute force over every feature and every midpoint between consecutive
// distinct values; max gain, ties broken by (feature, threshold) ascending.
struct BruteSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

BruteSplit brute_force_split(const Dataset& d, int min_leaf) {
  auto sse = [](const std::vector<double>& ys) {
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double s = 0.0;
    for (double y : ys) s += (y - mean) * (y - mean);
    return s;
  };
  std::vector<double> all(d.targets);
  double parent = sse(all);
  BruteSplit best;
  for (size_t f = 0; f < d.columns.size(); ++f) {
    std::vector<double> values(d.columns[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (size_t i = 0; i + 1 < values.size(); ++i) {
      double thr = values[i] + (values[i + 1] - values[i]) / 2.0;
      std::vector<double> left, right;
      for (size_t r = 0; r < d.rows; ++r)
        (d.columns[f][r] < thr ? left : right).push_back(d.targets[r]);
      if (left.size() < static_cast<size_t>(min_leaf) ||
          right.size() < static_cast<size_t>(min_leaf))
        continue;
      double gain = parent - sse(left) - sse(right);
      if (gain > best.gain + 1e-12) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = thr;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("constant target fits exactly with zero-valued trees") {
  Dataset d = make_dataset({{1.0}, {2.0}, {3.0}, {4.0}}, {7.5, 7.5, 7.5, 7.5});
  GBDTConfig cfg;
  cfg.rounds = 5;
  cfg.min_samples_leaf = 1;
  GBDTModel m = train_gbdt(d, cfg);
  CHECK(m.base == doctest::Approx(7.5));
  for (const auto& tree : m.trees) {
    REQUIRE(tree.nodes.size() == 1);  // no split has positive gain
    CHECK(tree.nodes[0].value == doctest::Approx(0.0));
  }
  for (double x : {-10.0, 0.0, 99.0})
    CHECK(m.predict_raw(std::vector<double>{x}) == doctest::Approx(7.5));
}

TEST_CASE("depth-1 single split reproduces a step function exactly") {
  Dataset d = make_dataset({{-2.0}, {-1.0}, {1.0}, {2.0}}, {0.0, 0.0, 10.0, 10.0});
  GBDTConfig cfg;
  cfg.rounds = 1;
  cfg.learning_rate = 1.0;
  cfg.max_depth = 1;
  cfg.min_samples_leaf = 1;
  GBDTModel m = train_gbdt(d, cfg);
  REQUIRE(m.trees.size() == 1);
  const auto& root = m.trees[0].nodes[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold == doctest::Approx(0.0));  // midpoint of -1 and 1
  CHECK(m.predict_raw(std::vector<double>{-5.0}) == doctest::Approx(0.0));
  CHECK(m.predict_raw(std::vector<double>{3.0}) == doctest::Approx(10.0));
}

TEST_CASE("chosen split equals brute-force enumeration on small instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 4 + rng.next_below(17);  // up to 20 samples
    size_t features = 1 + rng.next_below(2);
    std::vector<std::vector<double>> rows(n, std::vector<double>(features));
    std::vector<double> targets(n);
    for (size_t i = 0; i < n; ++i) {
      for (size_t f = 0; f < features; ++f)
        rows[i][f] = static_cast<double>(rng.next_below(12));
      targets[i] = static_cast<double>(rng.next_below(100));
    }
    Dataset d = make_dataset(rows, targets);
    BruteSplit expected = brute_force_split(d, 1);

    GBDTConfig cfg;
    cfg.rounds = 1;
    cfg.learning_rate = 1.0;
    cfg.max_depth = 1;
    cfg.min_samples_leaf = 1;
    GBDTModel m = train_gbdt(d, cfg);
    const auto& root = m.trees[0].nodes[0];
    CAPTURE(trial);
    if (expected.feature < 0) {
      CHECK(root.is_leaf());
    } else {
      CHECK(root.feature == expected.feature);
      CHECK(root.threshold == doctest::Approx(expected.threshold));
    }
  }
}

TEST_CASE("training RMSE is non-increasing in rounds") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Rng rng(seed);
    const size_t n = 300;
    std::vector<std::vector<double>> rows(n, std::vector<double>(2));
    std::vector<double> targets(n);
    for (size_t i = 0; i < n; ++i) {
      double x = rng.next_double() * 10.0;
      double z = rng.next_double() * 4.0;
      rows[i] = {x, z};
      targets[i] = std::sin(x) * 5.0 + z * z + rng.normal() * 0.3;
    }
    Dataset d = make_dataset(rows, targets);
    GBDTConfig cfg;
    cfg.rounds = 30;
    cfg.max_depth = 3;
    cfg.min_samples_leaf = 5;
    GBDTModel m = train_gbdt(d, cfg);

    double prev = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k <= m.trees.size(); ++k) {
      double se = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double p = predict_prefix(m, rows[i], k);
        se += (targets[i] - p) * (targets[i] - p);
      }
      double rmse = std::sqrt(se / static_cast<double>(n));
      CHECK(rmse <= prev + 1e-9);
      prev = rmse;
    }
  }
}

TEST_CASE("each tree's leaves are the means of the current residuals") {
  Rng rng(77);
  const size_t n = 120;
  std::vector<std::vector<double>> rows(n, std::vector<double>(1));
  std::vector<double> targets(n);
  for (size_t i = 0; i < n; ++i) {
    rows[i][0] = rng.next_double() * 8.0;
    targets[i] = rows[i][0] * 3.0 + rng.normal();
  }
  Dataset d = make_dataset(rows, targets);
  GBDTConfig cfg;
  cfg.rounds = 6;
  cfg.max_depth = 2;
  cfg.min_samples_leaf = 5;
  GBDTModel m = train_gbdt(d, cfg);

  for (size_t k = 0; k < m.trees.size(); ++k) {
    // residuals entering round k
    std::map<const TreeNode*, std::pair<double, size_t>> leaf_acc;
    for (size_t i = 0; i < n; ++i) {
      double resid = targets[i] - predict_prefix(m, rows[i], k);
      const auto& nodes = m.trees[k].nodes;
      int node = 0;
      while (!nodes[node].is_leaf())
        node = rows[i][nodes[node].feature] < nodes[node].threshold ? nodes[node].left
                                                                    : nodes[node].right;
      auto& [sum, count] = leaf_acc[&nodes[node]];
      sum += resid;
      count += 1;
    }
    for (const auto& [leaf, acc] : leaf_acc)
      CHECK(leaf->value == doctest::Approx(acc.first / static_cast<double>(acc.second)));
  }
}

TEST_CASE("model persists through json byte-stably") {
  Rng rng(3);
  std::vector<std::vector<double>> rows(50, std::vector<double>(3));
  std::vector<double> targets(50);
  for (size_t i = 0; i < 50; ++i) {
    for (auto& v : rows[i]) v = rng.next_double();
    targets[i] = rng.next_double() * 100.0;
  }
  Dataset d = make_dataset(rows, targets);
  GBDTConfig cfg;
  cfg.rounds = 8;
  cfg.max_depth = 3;
  cfg.min_samples_leaf = 2;
  GBDTModel m = train_gbdt(d, cfg);
  std::string blob = gbdt_to_json(m);
  GBDTModel back = gbdt_from_json(blob);
  CHECK(gbdt_to_json(back) == blob);
  for (size_t i = 0; i < 50; ++i)
    CHECK(back.predict_raw(rows[i]) == m.predict_raw(rows[i]));
}

TEST_CASE("error paths") {
  Dataset d = make_dataset({{1.0}}, {1.0});
  GBDTConfig cfg;
  cfg.rounds = 0;
  CHECK_THROWS_AS(train_gbdt(d, cfg), InvalidArgError);
  CHECK_THROWS_AS(train_gbdt(Dataset{}, GBDTConfig{}), InvalidArgError);

  GBDTModel m = train_gbdt(d, GBDTConfig{.rounds = 1, .min_samples_leaf = 1});
  CHECK_THROWS_AS(m.predict_raw(std::vector<double>{1.0, 2.0}), Error);
}
