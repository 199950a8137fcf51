#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "manquant/geometry.hpp"
#include "manquant/kmeans.hpp"
#include "manquant/random.hpp"

namespace manquant {

/// Affine d-flat: offset + span(basis).
///
/// `basis` is D x d with orthonormal non-degenerate columns. Columns flagged
/// in `degenerate` are exactly zero; they stand for directions the fitted
/// cell had no variance along and contribute nothing to projections.
struct Flat {
  Vector offset;
  Eigen::MatrixXd basis;
  std::vector<bool> degenerate;

  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(offset.size()); }

  /// B B^T over the non-degenerate columns.
  Eigen::MatrixXd projector() const;

  /// A flat through `point` whose d directions are all degenerate.
  static Flat degenerate_at(const Eigen::Ref<const Vector>& point, std::size_t d);
};

struct FlatsModel {
  std::vector<Flat> flats;
  std::size_t d = 0;
  double objective = 0.0;
  std::size_t iterations = 0;
  RngSeed seed;
  std::vector<double> trace;
  std::vector<std::vector<double>> restart_traces;

  std::size_t k() const { return flats.size(); }
  std::size_t ambient_dim() const { return flats.empty() ? 0 : flats.front().ambient_dim(); }
};

/// ||x - m||^2 - ||B^T (x - m)||^2, clamped at zero.
double flat_distance_sq(const Eigen::Ref<const Vector>& x, const Flat& flat);

/// Relative eigenvalue cutoff below which a principal direction is treated
/// as degenerate (lambda <= kRankTolerance * lambda_max).
inline constexpr double kRankTolerance = 1e-12;

/// d-truncated PCA of the rows of `points`: offset is the row mean, basis the
/// top-d eigenvectors of the cell covariance. Uses the m x m Gram matrix when
/// the cell has fewer rows than columns. Throws ParameterError on an empty
/// cell or d > D.
Flat refit_cell(const Matrix& points, std::size_t d);

/// Nearest flat per point; ties to the lowest flat index.
Assignment assign_to_flats(const Dataset& data, std::span<const Flat> flats);

double empirical_error(const Dataset& data, std::span<const Flat> flats);
double empirical_error(const Dataset& data, const FlatsModel& model);

struct FlatsRun {
  std::vector<Flat> flats;
  Assignment assignment;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

/// Alternating refit/assign starting from a labelling of the points into
/// k cells. The first refit is iteration 0; up to cfg.max_iters further
/// refit+assign passes follow.
FlatsRun lloyd_flats(const Dataset& data, std::vector<std::size_t> labels, std::size_t k,
                     std::size_t d, const FitConfig& cfg);

/// Best of cfg.restarts runs, each initialised by k-means++ centers whose
/// Voronoi cells are refit as flats. Restart r uses derive_seed(seed, {r}).
FlatsModel fit_kflats(const Dataset& data, std::size_t k, std::size_t d, const FitConfig& cfg,
                      RngSeed seed);

}  // namespace manquant
