#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include <json.hpp>

#include "rubricnet/analysis.hpp"

namespace rubricnet {
namespace {

void check_square_symmetric(const Matrix& m, const char* what) {
  for (const auto& row : m) {
    if (row.size() != m.size()) throw Error(Errc::analysis, std::string(what) + " must be square");
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (!std::isfinite(m[i][j]) || std::abs(m[i][j] - m[j][i]) > 1e-12) {
        throw Error(Errc::analysis, std::string(what) + " is not symmetric at (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

Matrix correlation_to_distance(const Matrix& correlations) {
  check_square_symmetric(correlations, "correlation matrix");
  Matrix d = correlations;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) d[i][j] = i == j ? 0.0 : 1.0 - correlations[i][j];
  }
  return d;
}

Dendrogram agglomerative_cluster(const Matrix& distances) {
  check_square_symmetric(distances, "distance matrix");
  const int n = static_cast<int>(distances.size());
  Dendrogram out;
  out.leaves = n;
  if (n < 2) return out;

  // active cluster id -> size; pairwise distances keyed by (lower id, higher id)
  std::map<int, int> active;
  std::map<std::pair<int, int>, double> dist;
  for (int i = 0; i < n; ++i) {
    active[i] = 1;
    for (int j = i + 1; j < n; ++j) dist[{i, j}] = distances[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  auto get = [&](int a, int b) { return dist.at({std::min(a, b), std::max(a, b)}); };

  for (int step = 0; step < n - 1; ++step) {
    std::pair<int, int> best{-1, -1};
    double best_d = INFINITY;
    for (const auto& [key, d] : dist) {  // map order = lexicographic (a, b)
      if (d < best_d) {
        best_d = d;
        best = key;
      }
    }
    const auto [a, b] = best;
    const int size_a = active.at(a);
    const int size_b = active.at(b);
    const int merged = n + step;
    out.merges.push_back({a, b, best_d, size_a + size_b});

    std::vector<std::pair<int, double>> updated;
    for (const auto& [k, size] : active) {
      if (k == a || k == b) continue;
      const double d = (size_a * get(k, a) + size_b * get(k, b)) / (size_a + size_b);
      updated.emplace_back(k, d);
    }
    for (auto it = dist.begin(); it != dist.end();) {
      const bool touches = it->first.first == a || it->first.first == b || it->first.second == a || it->first.second == b;
      it = touches ? dist.erase(it) : std::next(it);
    }
    active.erase(a);
    active.erase(b);
    for (const auto& [k, d] : updated) dist[{k, merged}] = d;
    active[merged] = size_a + size_b;
  }
  return out;
}

std::vector<int> leaf_order(const Dendrogram& dendrogram) {
  const int n = dendrogram.leaves;
  if (dendrogram.merges.empty()) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    return order;
  }
  std::vector<int> order;
  std::function<void(int)> walk = [&](int id) {
    if (id < n) {
      order.push_back(id);
      return;
    }
    const auto& m = dendrogram.merges[static_cast<std::size_t>(id - n)];
    walk(m.a);
    walk(m.b);
  };
  walk(n + static_cast<int>(dendrogram.merges.size()) - 1);
  return order;
}

std::string dendrogram_json(const Dendrogram& dendrogram, std::span<const std::string> names) {
  using nlohmann::json;
  json doc;
  doc["leaves"] = std::vector<std::string>(names.begin(), names.end());
  json merges = json::array();
  for (const auto& m : dendrogram.merges) {
    merges.push_back({{"a", m.a}, {"b", m.b}, {"distance", m.distance}, {"size", m.size}});
  }
  doc["merges"] = std::move(merges);
  return doc.dump(1) + "\n";
}

}  // namespace rubricnet
