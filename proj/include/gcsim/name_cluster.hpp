#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gcsim {

// Greedy leader clustering over job names: a name joins the first cluster
// whose leader is within normalized Levenshtein distance tau, otherwise it
// founds a new cluster. Identical names always share a cluster; assignment is
// deterministic in insertion order.
class NameClusterIndex {
 public:
  explicit NameClusterIndex(double tau = 0.3);

  // Insert-or-get; extends the index when no cluster matches.
  int assign(const std::string& name);
  // Read-only match; returns -1 when no cluster is within tau.
  int lookup(const std::string& name) const;

  size_t cluster_count() const { return leaders_.size(); }
  const std::vector<std::string>& leaders() const { return leaders_; }
  double tau() const { return tau_; }
  size_t known_names() const { return by_name_.size(); }

  // Persistence: leaders in cluster order plus the exact-name memo.
  std::string to_json() const;
  static NameClusterIndex from_json(const std::string& text);

 private:
  int match_leader(const std::string& name) const;

  double tau_;
  std::vector<std::string> leaders_;
  std::unordered_map<std::string, int> by_name_;
};

// Convenience wrapper: cluster a batch of names in order, returning per-name
// cluster ids alongside the index.
std::vector<int> cluster_names(const std::vector<std::string>& names, NameClusterIndex* index);

}  // namespace gcsim
