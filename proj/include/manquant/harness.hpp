#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "manquant/bounds.hpp"
#include "manquant/geometry.hpp"
#include "manquant/kflats.hpp"
#include "manquant/kmeans.hpp"

namespace manquant {

enum class Algorithm { KMeans, KMeansPPSeedingOnly, KFlats };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

/// Monte-Carlo estimate of the expected reconstruction error: mean squared
/// distance from hold-out points to the model set (compensated summation).
double holdout_error(const MeansModel& model, const Dataset& holdout);
double holdout_error(const FlatsModel& model, const Dataset& holdout);
double holdout_error(const Matrix& centers, const Dataset& holdout);

struct Example1Result {
  double e_k1 = 0.0;  // single mean at the midpoint of the two samples
  double e_k2 = 0.0;  // the two samples themselves
  double inner_product = 0.0;
};

/// Two samples on S^100 in R^101; the exact k = 1 and k = 2 solutions are
/// scored on `holdout_size` fresh points from the same sphere.
Example1Result example1(RngSeed seed, std::size_t holdout_size = 100000);

struct ExperimentSpec {
  ManifoldSpec manifold = ManifoldSpec::unit_sphere(19, 20);
  // When set, training sets and the hold-out set are drawn without
  // replacement from this pool instead of from the manifold sampler.
  std::shared_ptr<const Dataset> pool;
  std::vector<std::size_t> train_sizes;
  std::vector<std::size_t> k_grid;
  std::size_t holdout_size = 100000;
  Algorithm algorithm = Algorithm::KMeans;
  std::size_t repeats = 5;
  RngSeed base_seed;
  FitConfig fit;
  // Flat dimension for KFlats; defaults to manifold.intrinsic_dim.
  std::optional<std::size_t> flat_dim;
  // Sweep k upward and offer each fit the previous k's centers as an extra
  // candidate start (k-means only), making training error monotone in k.
  bool nested_warm_start = true;
  double delta = 0.05;
  // Workers over (n, repeat) jobs; 0 means hardware concurrency.
  unsigned threads = 1;

  void validate() const;
};

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t repeat = 0;
  double empirical = 0.0;
  double holdout = 0.0;
  double seconds = 0.0;
  // Per-iteration objectives of every restart, for descent audits.
  std::vector<std::vector<double>> traces;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual in log space
  bool degenerate = false;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::optional<RateFit> rate_fit;
  std::vector<BoundReport> bound_rows;
};

/// Stream tags mixed into the base seed (see derive_seed).
inline constexpr std::uint64_t kHoldoutTag = 0x686f6c646f7574ULL;
inline constexpr std::uint64_t kTrainTag = 0x747261696eULL;

/// Seed for one grid cell: derive_seed(base, {n, k, repeat}).
RngSeed cell_seed(RngSeed base, std::size_t n, std::size_t k, std::size_t repeat);

/// Full (n, k, repeat) grid: for every (n, repeat) one training set is drawn
/// (seed derive_seed(base, {kTrainTag, n, repeat})) and fitted for every k
/// in ascending order; all cells are scored on one shared hold-out set
/// (seed derive_seed(base, {kHoldoutTag})). Rows come back ordered by
/// (n, k, repeat) regardless of execution order.
ExperimentReport tradeoff_experiment(const ExperimentSpec& spec);

/// Mean hold-out error per k for one training size, in k_grid order.
std::vector<double> mean_holdout_curve(const ExperimentReport& report, std::size_t n,
                                       std::span<const std::size_t> k_grid);

/// Index of the smallest error; ties resolve to the earliest (smallest k
/// when the grid is ascending).
std::size_t argmin_index(std::span<const double> errors);

struct SelectKResult {
  std::size_t k = 0;
  std::vector<double> validation_errors;  // aligned with the k grid
};

/// Hold-out model selection: fits on `train` for each k of the grid and
/// returns the k with the smallest error on `validation` (ties -> smallest k).
SelectKResult select_k(const Dataset& train, const Dataset& validation,
                       std::span<const std::size_t> k_grid, Algorithm algorithm,
                       const FitConfig& cfg, RngSeed seed, std::size_t flat_dim = 0);

/// Same, splitting `data` into its first (1 - validation_fraction) rows for
/// training and the remaining rows for validation.
SelectKResult select_k(const Dataset& data, double validation_fraction,
                       std::span<const std::size_t> k_grid, Algorithm algorithm,
                       const FitConfig& cfg, RngSeed seed, std::size_t flat_dim = 0);

enum class Schedule { KMeans, KFlats };

/// Least-squares line through (ln n, ln error). Flags `degenerate` when all
/// errors are equal or fewer than two distinct n are given.
RateFit fit_power_law(std::span<const double> n, std::span<const double> errors);

struct RateRow {
  std::size_t n = 0;
  double k_n = 0.0;
  std::size_t k = 0;
  double mean_holdout = 0.0;
};

struct RateExperimentResult {
  std::vector<RateRow> rows;
  RateFit fit;
  ExperimentReport report;
};

/// Sets k = max(1, round(k_n)) from the chosen schedule for every n in
/// spec.train_sizes (k-means schedule fits k-means, k-flats schedule fits
/// k-flats of the manifold's intrinsic dimension), averages the hold-out
/// error over repeats and fits the log-log slope. Needs at least four
/// training sizes spanning two decades.
RateExperimentResult rate_experiment(const ExperimentSpec& spec, Schedule schedule);

/// Schedule value k_n for a manifold with the surrogate quantization constant.
double schedule_kn(const ManifoldSpec& manifold, Schedule schedule, double n);

/// Rounded schedule: max(1, round(k_n)), capped at n.
std::size_t schedule_k(const ManifoldSpec& manifold, Schedule schedule, std::size_t n);

/// Writers for experiment artifacts.
void write_report_csv(const ExperimentReport& report, const std::string& path);
/// "k mean_holdout" lines per training size: one file per n, named
/// <prefix>_n<N>.dat.
void write_curve_files(const ExperimentReport& report, std::span<const std::size_t> k_grid,
                       const std::string& prefix);
/// "ln_n ln_error" lines.
void write_rate_file(const RateExperimentResult& result, const std::string& path);

}  // namespace manquant
