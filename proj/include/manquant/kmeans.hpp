#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "manquant/geometry.hpp"
#include "manquant/random.hpp"

namespace manquant {

enum class EmptyCellPolicy {
  // Move the center of an empty cell onto the training point that is
  // currently worst represented by its own cell.
  ReseedFarthest,
};

struct FitConfig {
  std::size_t max_iters = 200;
  // Stop once (previous - current) / previous objective falls below this.
  double rel_tol = 1e-10;
  std::size_t restarts = 20;
  EmptyCellPolicy empty_cell_policy = EmptyCellPolicy::ReseedFarthest;
  // Workers for independent restarts; 0 means hardware concurrency.
  unsigned threads = 1;

  void validate() const;
};

/// Result of k-means: k centers (rows) plus fit diagnostics.
///
/// `trace` holds the objective after every assignment step of the kept run;
/// `restart_traces` holds the same sequence for every restart, in restart
/// order (the warm-started candidate, if any, comes last).
struct MeansModel {
  Matrix centers;
  double objective = 0.0;
  std::size_t iterations = 0;
  RngSeed seed;
  std::vector<double> trace;
  std::vector<std::vector<double>> restart_traces;

  std::size_t k() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(centers.cols()); }
};

struct Assignment {
  std::vector<std::size_t> labels;
  std::vector<double> sq_dists;
};

/// Nearest center per point; ties go to the lowest center index.
Assignment assign_to_centers(const Dataset& data, const Matrix& centers);

/// Mean squared distance to the nearest center, compensated summation.
double empirical_error(const Dataset& data, const Matrix& centers);
double empirical_error(const Dataset& data, const MeansModel& model);

/// k-means++ seeding: rows of `data` drawn one at a time, the first
/// uniformly and each later one with probability proportional to its squared
/// distance to the nearest row already chosen. Returns the chosen row indices.
std::vector<std::size_t> seed_kmeanspp_indices(const Dataset& data, std::size_t k, Rng& rng);
Matrix seed_kmeanspp(const Dataset& data, std::size_t k, RngSeed seed);

struct LloydRun {
  Matrix centers;
  Assignment assignment;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

/// Lloyd iterations from the given initial centers.
LloydRun lloyd(const Dataset& data, Matrix centers, const FitConfig& cfg);

/// Best of cfg.restarts k-means++ seeded Lloyd runs.
///
/// Restart r uses derive_seed(seed, {r}). When `warm_start` is given (fewer
/// than k centers, typically the solution for a smaller k), one extra
/// candidate is run from those centers completed by k-means++ draws, so the
/// returned objective never exceeds the warm start's.
MeansModel fit_kmeans(const Dataset& data, std::size_t k, const FitConfig& cfg, RngSeed seed,
                      const std::optional<Matrix>& warm_start = std::nullopt);

}  // namespace manquant
