#include "gcsim/levenshtein.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

namespace gcsim {

int levenshtein(std::string_view a, std::string_view b) {
  const size_t la = a.size(), lb = b.size();
  if (la == 0) return static_cast<int>(lb);
  if (lb == 0) return static_cast<int>(la);
  std::vector<int> prev(lb + 1), cur(lb + 1);
  for (size_t j = 0; j <= lb; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= la; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= lb; ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
    }
    std::swap(prev, cur);
  }
  return prev[lb];
}

int levenshtein_bounded(std::string_view a, std::string_view b, int max_dist) {
  if (max_dist < 0) return 0;
  const int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
  if (std::abs(la - lb) > max_dist) return max_dist + 1;
  const int big = max_dist + 1;
  std::vector<int> prev(lb + 1, big), cur(lb + 1, big);
  for (int j = 0; j <= std::min(lb, max_dist); ++j) prev[j] = j;
  for (int i = 1; i <= la; ++i) {
    const int lo = std::max(1, i - max_dist);
    const int hi = std::min(lb, i + max_dist);
    cur[lo - 1] = (lo == 1 && i <= max_dist) ? i : big;
    int row_min = cur[lo - 1];
    for (int j = lo; j <= hi; ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      int v = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      cur[j] = std::min(v, big);
      row_min = std::min(row_min, cur[j]);
    }
    if (hi + 1 <= lb) cur[hi + 1] = big;
    if (row_min >= big) return big;
    std::swap(prev, cur);
  }
  return std::min(prev[lb], big);
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
  size_t ml = std::max(a.size(), b.size());
  if (ml == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(ml);
}

}  // namespace gcsim
