#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace impsep::detail {

struct SccResult {
  std::vector<int> comp;  // per node
  int count = 0;
};

// Iterative Tarjan over a dense-index digraph.
SccResult strongly_connected_components(const std::vector<std::vector<int>>& adj);

struct TransitionTriplets {
  std::vector<int> from, to;
  std::vector<double> prob;
};

// Stationary row vector of the chain given by triplets over n states.
// Requires a unique recurrent class (throws NonErgodicError otherwise).
// Dense linear solve for small n, damped power iteration as fallback.
std::vector<double> stationary_from_triplets(std::size_t n, const TransitionTriplets& t);

}  // namespace impsep::detail
