#pragma once

#include <cstdint>
#include <vector>

namespace ltcnet {

struct KmeansResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  double silhouette = 0.0;
};

// Lloyd's algorithm with k-means++ seeding and `restarts` seeded restarts,
// keeping the lowest-inertia run.
KmeansResult kmeans_fixed(const std::vector<std::vector<double>>& points,
                          std::size_t k, std::uint64_t seed,
                          std::size_t restarts = 20);

// Picks k from the candidates by maximum mean silhouette score.
KmeansResult kmeans_cluster(const std::vector<std::vector<double>>& points,
                            const std::vector<std::size_t>& k_candidates,
                            std::uint64_t seed, std::size_t restarts = 20);

double mean_silhouette(const std::vector<std::vector<double>>& points,
                       const std::vector<std::size_t>& assignment,
                       std::size_t k);

}  // namespace ltcnet
