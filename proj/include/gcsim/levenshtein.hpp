#pragma once

#include <string_view>

namespace gcsim {

// Minimum number of single-character insertions, deletions and substitutions.
int levenshtein(std::string_view a, std::string_view b);

// Banded variant: exact when the distance is <= max_dist, otherwise returns
// max_dist + 1.
int levenshtein_bounded(std::string_view a, std::string_view b, int max_dist);

// levenshtein / max(len); two empty strings have distance 0.
double normalized_levenshtein(std::string_view a, std::string_view b);

}  // namespace gcsim
