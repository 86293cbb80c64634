#include "gcsim/name_cluster.hpp"

#include <algorithm>
#include <cmath>

#include "gcsim/common.hpp"
#include "gcsim/levenshtein.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

NameClusterIndex::NameClusterIndex(double tau) : tau_(tau) {
  GCSIM_CHECK(tau >= 0.0 && tau <= 1.0, "tau must be in [0,1]");
}

int NameClusterIndex::match_leader(const std::string& name) const {
  const int ln = static_cast<int>(name.size());
  for (size_t c = 0; c < leaders_.size(); ++c) {
    const std::string& leader = leaders_[c];
    const int ml = std::max(ln, static_cast<int>(leader.size()));
    if (ml == 0) return static_cast<int>(c);  // both empty
    // normalized distance <= tau  <=>  lev <= floor(tau * maxlen)
    const int allowed = static_cast<int>(tau_ * ml + 1e-9);
    if (std::abs(ln - static_cast<int>(leader.size())) > allowed) continue;
    if (levenshtein_bounded(name, leader, allowed) <= allowed) return static_cast<int>(c);
  }
  return -1;
}

int NameClusterIndex::assign(const std::string& name) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) return it->second;
  int c = match_leader(name);
  if (c < 0) {
    c = static_cast<int>(leaders_.size());
    leaders_.push_back(name);
  }
  by_name_.emplace(name, c);
  return c;
}

int NameClusterIndex::lookup(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) return it->second;
  return match_leader(name);
}

std::string NameClusterIndex::to_json() const {
  json doc;
  doc["tau"] = tau_;
  doc["leaders"] = leaders_;
  json members = json::object();
  for (const auto& [name, c] : by_name_) members[name] = c;
  doc["members"] = std::move(members);
  return doc.dump();
}

NameClusterIndex NameClusterIndex::from_json(const std::string& text) {
  json doc = json::parse(text);
  NameClusterIndex idx(doc.value("tau", 0.3));
  idx.leaders_ = doc["leaders"].get<std::vector<std::string>>();
  for (auto& [name, c] : doc["members"].items())
    idx.by_name_.emplace(name, c.get<int>());
  return idx;
}

std::vector<int> cluster_names(const std::vector<std::string>& names, NameClusterIndex* index) {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(index->assign(n));
  return out;
}

}  // namespace gcsim
