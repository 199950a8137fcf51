#pragma once

#include <cstddef>
#include <vector>

#include "manquant/geometry.hpp"

namespace manquant {

/// Small clustering instance that can be solved exactly by enumerating
/// every partition of the points into at most k non-empty groups.
struct TinyInstance {
  static constexpr std::size_t kMaxPoints = 12;
  static constexpr std::size_t kMaxK = 4;
  static constexpr std::size_t kMaxFlatDim = 2;
  static constexpr double kMaxPartitions = 1e6;

  Dataset data;
  std::size_t k = 1;
  std::size_t d = 0;

  /// Throws ComputeError (with the partition count) when a limit is exceeded.
  void validate() const;
};

/// Number of partitions of n items into at most k non-empty blocks:
/// sum over j <= k of the Stirling numbers S(n, j).
double partition_count(std::size_t n, std::size_t k);

struct OracleResult {
  double objective = 0.0;
  // Group index per point (restricted-growth string).
  std::vector<std::size_t> partition;
};

/// Exact global k-means optimum: every group represented by its mean.
OracleResult global_kmeans(const TinyInstance& inst);

/// Exact global k-flats optimum: every group represented by its
/// d-truncated PCA flat (inst.d).
OracleResult global_kflats(const TinyInstance& inst);

}  // namespace manquant
