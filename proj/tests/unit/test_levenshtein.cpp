#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "gcsim/common.hpp"
#include "gcsim/levenshtein.hpp"
#include "gcsim/name_cluster.hpp"

using namespace gcsim;

namespace {

// Independent full-matrix DP oracle.
int lev_oracle(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
    }
  }
  return d[a.size()][b.size()];
}

std::string random_string(Rng& rng, size_t max_len) {
  size_t len = rng.next_below(max_len + 1);
  std::string s;
  for (size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.next_below(6)));
  return s;
}

}  // namespace

TEST_CASE("levenshtein basics") {
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "") == 0);
}

TEST_CASE("levenshtein equals the DP oracle on random pairs") {
  Rng rng(12345);
  for (int i = 0; i < 3000; ++i) {
    std::string a = random_string(rng, 30);
    std::string b = random_string(rng, 30);
    CAPTURE(a);
    CAPTURE(b);
    int expected = lev_oracle(a, b);
    CHECK(levenshtein(a, b) == expected);
    // bounded variant is exact within the band and saturates beyond it
    for (int cap : {0, 1, 3, 10, 40}) {
      int got = levenshtein_bounded(a, b, cap);
      if (expected <= cap) CHECK(got == expected);
      else CHECK(got == cap + 1);
    }
  }
}

TEST_CASE("normalized distance") {
  CHECK(normalized_levenshtein("run1", "run2") == doctest::Approx(0.25));
  CHECK(normalized_levenshtein("", "") == 0.0);
  CHECK(normalized_levenshtein("a", "") == 1.0);
}

TEST_CASE("greedy leader clustering with tau=0.3") {
  NameClusterIndex idx(0.3);
  std::vector<std::string> names = {"run1", "run2", "eval"};
  auto ids = cluster_names(names, &idx);
  CHECK(ids[0] == ids[1]);  // distance 0.25 <= 0.3
  CHECK(ids[2] != ids[0]);  // distance 1.0
  CHECK(idx.cluster_count() == 2);
}

TEST_CASE("tau=0 reduces to exact-name groups") {
  NameClusterIndex idx(0.0);
  CHECK(idx.assign("alpha") == idx.assign("alpha"));
  CHECK(idx.assign("alpha") != idx.assign("alph"));
  CHECK(idx.cluster_count() == 2);
}

TEST_CASE("empty input leaves the index empty") {
  NameClusterIndex idx(0.3);
  std::vector<std::string> none;
  CHECK(cluster_names(none, &idx).empty());
  CHECK(idx.cluster_count() == 0);
}

TEST_CASE("identical names never split, regardless of insertion order") {
  // permute the order of the non-leader names; identical strings must always
  // land in one cluster
  std::vector<std::string> base = {"train_a", "train_b", "evaluate", "train_a", "evaluate",
                                   "train_b", "train_a"};
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> names = base;
    // leader stays first; shuffle the tail
    for (size_t i = names.size() - 1; i > 1; --i)
      std::swap(names[i], names[1 + rng.next_below(i)]);
    NameClusterIndex idx(0.3);
    std::map<std::string, std::set<int>> seen;
    for (const auto& n : names) seen[n].insert(idx.assign(n));
    for (const auto& [name, ids] : seen) {
      CAPTURE(name);
      CHECK(ids.size() == 1);
    }
  }
}

TEST_CASE("lookup is read-only and matches assignment behaviour") {
  NameClusterIndex idx(0.3);
  int run = idx.assign("run_001");
  CHECK(idx.lookup("run_002") == run);      // similar, would join
  CHECK(idx.lookup("zzzzzz") == -1);        // no match
  CHECK(idx.cluster_count() == 1);          // lookup did not insert
}

TEST_CASE("cluster index persists through json") {
  NameClusterIndex idx(0.3);
  idx.assign("train_resnet_01");
  idx.assign("train_resnet_02");
  idx.assign("preprocess");
  auto restored = NameClusterIndex::from_json(idx.to_json());
  CHECK(restored.cluster_count() == idx.cluster_count());
  CHECK(restored.lookup("train_resnet_03") == idx.lookup("train_resnet_03"));
  CHECK(restored.assign("train_resnet_01") == idx.assign("train_resnet_01"));
}
