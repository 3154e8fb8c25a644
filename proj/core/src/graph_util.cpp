#include "graph_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "impsep/errors.hpp"

namespace impsep::detail {

SccResult strongly_connected_components(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  SccResult res;
  res.comp.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> num(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> onstack(static_cast<std::size_t>(n), 0);
  std::vector<int> sstack;
  int counter = 0;
  std::vector<std::pair<int, std::size_t>> dfs;
  for (int root = 0; root < n; ++root) {
    if (num[static_cast<std::size_t>(root)] >= 0) continue;
    num[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    sstack.push_back(root);
    onstack[static_cast<std::size_t>(root)] = 1;
    dfs.emplace_back(root, 0);
    while (!dfs.empty()) {
      const int u = dfs.back().first;
      const std::size_t ei = dfs.back().second;
      const auto ui = static_cast<std::size_t>(u);
      if (ei < adj[ui].size()) {
        ++dfs.back().second;
        const int v = adj[ui][ei];
        const auto vi = static_cast<std::size_t>(v);
        if (num[vi] < 0) {
          num[vi] = low[vi] = counter++;
          sstack.push_back(v);
          onstack[vi] = 1;
          dfs.emplace_back(v, 0);
        } else if (onstack[vi]) {
          low[ui] = std::min(low[ui], num[vi]);
        }
      } else {
        if (low[ui] == num[ui]) {
          while (true) {
            const int w = sstack.back();
            sstack.pop_back();
            onstack[static_cast<std::size_t>(w)] = 0;
            res.comp[static_cast<std::size_t>(w)] = res.count;
            if (w == u) break;
          }
          ++res.count;
        }
        dfs.pop_back();
        if (!dfs.empty()) {
          const auto pi = static_cast<std::size_t>(dfs.back().first);
          low[pi] = std::min(low[pi], low[ui]);
        }
      }
    }
  }
  return res;
}

namespace {

bool dense_stationary_solve(std::size_t n, const TransitionTriplets& t, std::vector<double>& pi) {
  // Balance equations for states 0..n-2 plus the normalization row.
  std::vector<double> a(n * n, 0.0);
  std::vector<double> b(n, 0.0);
  for (std::size_t e = 0; e < t.from.size(); ++e) {
    const std::size_t j = static_cast<std::size_t>(t.to[e]);
    if (j + 1 == n) continue;
    a[j * n + static_cast<std::size_t>(t.from[e])] += t.prob[e];
  }
  for (std::size_t j = 0; j + 1 < n; ++j) a[j * n + j] -= 1.0;
  for (std::size_t i = 0; i < n; ++i) a[(n - 1) * n + i] = 1.0;
  b[n - 1] = 1.0;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    double best_abs = std::fabs(a[perm[col] * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[perm[r] * n + col]);
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs < 1e-13) return false;
    std::swap(perm[col], perm[best]);
    const double pivot = a[perm[col] * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[perm[r] * n + col] / pivot;
      if (factor == 0.0) continue;
      a[perm[r] * n + col] = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) {
        a[perm[r] * n + c] -= factor * a[perm[col] * n + c];
      }
      b[perm[r]] -= factor * b[perm[col]];
    }
  }
  pi.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[perm[ri]];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[perm[ri] * n + c] * pi[c];
    pi[ri] = acc / a[perm[ri] * n + ri];
  }
  double sum = 0.0;
  for (double& v : pi) {
    if (v < 0.0) {
      if (v < -1e-8) return false;
      v = 0.0;
    }
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) return false;
  for (double& v : pi) v /= sum;
  return true;
}

std::vector<double> power_stationary(std::size_t n, const TransitionTriplets& t) {
  // Half-lazy iteration x <- (x + xT) / 2 removes periodicity.
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> y(n, 0.0);
  for (std::size_t iter = 0; iter < 5'000'000; ++iter) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t e = 0; e < t.from.size(); ++e) {
      y[static_cast<std::size_t>(t.to[e])] += x[static_cast<std::size_t>(t.from[e])] * t.prob[e];
    }
    double diff = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 0.5 * (y[i] + x[i]);
      diff += std::fabs(y[i] - x[i]);
      sum += y[i];
    }
    for (std::size_t i = 0; i < n; ++i) y[i] /= sum;
    x.swap(y);
    if (diff < 1e-14) return x;
  }
  throw Error("stationary iteration did not converge");
}

}  // namespace

std::vector<double> stationary_from_triplets(std::size_t n, const TransitionTriplets& t) {
  if (n == 0) throw ValidationError("stationary law of an empty chain");
  std::vector<std::vector<int>> adj(n);
  for (std::size_t e = 0; e < t.from.size(); ++e) {
    adj[static_cast<std::size_t>(t.from[e])].push_back(t.to[e]);
  }
  const SccResult scc = strongly_connected_components(adj);
  std::vector<char> terminal(static_cast<std::size_t>(scc.count), 1);
  for (std::size_t e = 0; e < t.from.size(); ++e) {
    const int cu = scc.comp[static_cast<std::size_t>(t.from[e])];
    const int cv = scc.comp[static_cast<std::size_t>(t.to[e])];
    if (cu != cv) terminal[static_cast<std::size_t>(cu)] = 0;
  }
  int terminal_count = 0;
  for (char c : terminal) terminal_count += c;
  if (terminal_count != 1) {
    throw NonErgodicError("stationary law is not unique: " + std::to_string(terminal_count) +
                          " recurrent classes");
  }
  if (n <= 2048) {
    std::vector<double> pi;
    if (dense_stationary_solve(n, t, pi)) return pi;
  }
  return power_stationary(n, t);
}

}  // namespace impsep::detail
