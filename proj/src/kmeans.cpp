#include "ltcnet/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ltcnet {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<std::vector<double>> kmeanspp_seed(
    const std::vector<std::vector<double>>& points, std::size_t k,
    std::mt19937_64& rng) {
  std::vector<std::vector<double>> centroids;
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centroids.push_back(points[first(rng)]);
  std::vector<double> d2(points.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    if (total == 0.0) {  // all remaining points coincide with centroids
      centroids.push_back(points[first(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      r -= d2[i];
      if (r <= 0.0) { pick = i; break; }
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

}  // namespace

KmeansResult kmeans_fixed(const std::vector<std::vector<double>>& points,
                          std::size_t k, std::uint64_t seed,
                          std::size_t restarts) {
  if (k == 0 || k > points.size())
    throw std::invalid_argument("kmeans: k must be in [1, point count]");
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t rs = 0; rs < restarts; ++rs) {
    std::mt19937_64 rng(seed + rs);
    auto centroids = kmeanspp_seed(points, k, rng);
    std::vector<std::size_t> assign(points.size(), 0);
    for (std::size_t iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t argmin = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          double d = sq_dist(points[i], centroids[c]);
          if (d < bestd) { bestd = d; argmin = c; }
        }
        if (assign[i] != argmin) { assign[i] = argmin; changed = true; }
      }
      std::vector<std::vector<double>> next(
          k, std::vector<double>(points[0].size(), 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < points.size(); ++i) {
        ++counts[assign[i]];
        for (std::size_t d = 0; d < points[i].size(); ++d)
          next[assign[i]][d] += points[i][d];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) { next[c] = centroids[c]; continue; }
        for (auto& v : next[c]) v /= static_cast<double>(counts[c]);
      }
      centroids = std::move(next);
      if (!changed && iter > 0) break;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      inertia += sq_dist(points[i], centroids[assign[i]]);
    if (inertia < best.inertia) {
      best.k = k;
      best.assignment = std::move(assign);
      best.centroids = std::move(centroids);
      best.inertia = inertia;
    }
  }
  best.silhouette = mean_silhouette(points, best.assignment, k);
  return best;
}

double mean_silhouette(const std::vector<std::vector<double>>& points,
                       const std::vector<std::size_t>& assignment,
                       std::size_t k) {
  if (k < 2) return -1.0;
  std::size_t n = points.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mean_dist(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_dist[assignment[j]] += std::sqrt(sq_dist(points[i], points[j]));
      ++counts[assignment[j]];
    }
    std::size_t own = assignment[i];
    if (counts[own] == 0) continue;  // singleton cluster contributes 0
    double a = mean_dist[own] / static_cast<double>(counts[own]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, mean_dist[c] / static_cast<double>(counts[c]));
    }
    if (!std::isfinite(b)) continue;
    double s = (b - a) / std::max(a, b);
    if (std::isfinite(s)) total += s;
  }
  return total / static_cast<double>(n);
}

KmeansResult kmeans_cluster(const std::vector<std::vector<double>>& points,
                            const std::vector<std::size_t>& k_candidates,
                            std::uint64_t seed, std::size_t restarts) {
  if (k_candidates.empty())
    throw std::invalid_argument("kmeans_cluster: no k candidates");
  KmeansResult best;
  bool have = false;
  for (std::size_t k : k_candidates) {
    KmeansResult r = kmeans_fixed(points, k, seed, restarts);
    if (!have || r.silhouette > best.silhouette) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace ltcnet
