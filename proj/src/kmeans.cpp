#include "manquant/kmeans.hpp"

#include <limits>
#include <string>

#include "manquant/error.hpp"
#include "manquant/numeric.hpp"
#include "manquant/parallel.hpp"

namespace manquant {

void FitConfig::validate() const {
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(rel_tol >= 0.0)) throw ParameterError("rel_tol must be >= 0");
  if (restarts < 1) throw ParameterError("restarts must be >= 1");
}

namespace {

void check_k(const Dataset& data, std::size_t k) {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (k > data.size()) {
    throw ParameterError("k = " + std::to_string(k) + " exceeds the number of points n = " +
                         std::to_string(data.size()));
  }
}

void check_dims(const Dataset& data, const Matrix& centers) {
  if (static_cast<std::size_t>(centers.cols()) != data.ambient_dim()) {
    throw ParameterError("center dimension " + std::to_string(centers.cols()) +
                         " does not match data dimension " + std::to_string(data.ambient_dim()));
  }
  if (centers.rows() < 1) throw ParameterError("model has no centers");
}

// Squared distance accumulated coordinate by coordinate, so identical rows
// give exactly zero.
double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double diff = a(i, c) - b(j, c);
    s += diff * diff;
  }
  return s;
}

// Recomputes centers as cell means and reseeds empty cells in ascending
// index order at the point farthest from its own (updated) center.
void update_centers(const Dataset& data, const std::vector<std::size_t>& labels, Matrix& centers) {
  const Matrix& x = data.points();
  const Eigen::Index k = centers.rows();
  Matrix sums = Matrix::Zero(k, centers.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.row(static_cast<Eigen::Index>(labels[i])) += x.row(static_cast<Eigen::Index>(i));
    ++counts[labels[i]];
  }
  bool any_empty = false;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) {
      centers.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
    } else {
      any_empty = true;
    }
  }
  if (!any_empty) return;

  std::vector<double> residual(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    residual[i] = sq_dist(x, static_cast<Eigen::Index>(i), centers,
                          static_cast<Eigen::Index>(labels[i]));
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < residual.size(); ++i) {
      if (residual[i] > residual[worst]) worst = i;
    }
    centers.row(j) = x.row(static_cast<Eigen::Index>(worst));
    residual[worst] = -1.0;
  }
}

double mean_of(const std::vector<double>& values) { return compensated_mean(values); }

}  // namespace

Assignment assign_to_centers(const Dataset& data, const Matrix& centers) {
  check_dims(data, centers);
  const Matrix& x = data.points();
  Assignment out;
  out.labels.resize(data.size());
  out.sq_dists.resize(data.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
      const double dist = sq_dist(x, i, centers, j);
      if (dist < best_d) {
        best_d = dist;
        best = static_cast<std::size_t>(j);
      }
    }
    out.labels[static_cast<std::size_t>(i)] = best;
    out.sq_dists[static_cast<std::size_t>(i)] = best_d;
  }
  return out;
}

double empirical_error(const Dataset& data, const Matrix& centers) {
  return mean_of(assign_to_centers(data, centers).sq_dists);
}

double empirical_error(const Dataset& data, const MeansModel& model) {
  return empirical_error(data, model.centers);
}

std::vector<std::size_t> seed_kmeanspp_indices(const Dataset& data, std::size_t k, Rng& rng) {
  check_k(data, k);
  const Matrix& x = data.points();
  const std::size_t n = data.size();
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(rng.index(n));

  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const auto last = static_cast<Eigen::Index>(chosen.back());
    CompensatedSum total;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(x, static_cast<Eigen::Index>(i), x, last));
      total.add(nearest[i]);
    }
    const double mass = total.value();
    std::size_t pick = n;
    if (mass > 0.0) {
      const double target = rng.uniform01() * mass;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        running += nearest[i];
        pick = i;
        if (running > target) break;
      }
    } else {
      // Every row coincides with a chosen center; fall back to uniform.
      pick = rng.index(n);
    }
    chosen.push_back(pick);
  }
  return chosen;
}

Matrix seed_kmeanspp(const Dataset& data, std::size_t k, RngSeed seed) {
  Rng rng(seed);
  const auto rows = seed_kmeanspp_indices(data, k, rng);
  Matrix centers(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(data.ambient_dim()));
  for (std::size_t j = 0; j < k; ++j) {
    centers.row(static_cast<Eigen::Index>(j)) = data.row(rows[j]);
  }
  return centers;
}

LloydRun lloyd(const Dataset& data, Matrix centers, const FitConfig& cfg) {
  cfg.validate();
  check_dims(data, centers);
  LloydRun run;
  run.assignment = assign_to_centers(data, centers);
  run.objective = mean_of(run.assignment.sq_dists);
  run.trace.push_back(run.objective);

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    update_centers(data, run.assignment.labels, centers);
    Assignment next = assign_to_centers(data, centers);
    const double objective = mean_of(next.sq_dists);
    const bool changed = next.labels != run.assignment.labels;
    const double decrease = run.objective - objective;
    const double rel = run.objective > 0.0 ? decrease / run.objective : 0.0;
    run.assignment = std::move(next);
    run.objective = objective;
    run.trace.push_back(objective);
    run.iterations = it;
    if (!changed || rel < cfg.rel_tol) break;
  }
  run.centers = std::move(centers);
  return run;
}

namespace {

// Completes a partial center set with k-means++ draws against the existing
// centers.
Matrix complete_centers(const Dataset& data, const Matrix& partial, std::size_t k, Rng& rng) {
  const Matrix& x = data.points();
  Matrix centers(static_cast<Eigen::Index>(k), x.cols());
  centers.topRows(partial.rows()) = partial;
  std::vector<double> nearest = assign_to_centers(data, partial).sq_dists;
  for (Eigen::Index j = partial.rows(); j < static_cast<Eigen::Index>(k); ++j) {
    CompensatedSum total;
    for (const double v : nearest) total.add(v);
    std::size_t pick = 0;
    if (total.value() > 0.0) {
      const double target = rng.uniform01() * total.value();
      double running = 0.0;
      for (std::size_t i = 0; i < nearest.size(); ++i) {
        if (nearest[i] <= 0.0) continue;
        running += nearest[i];
        pick = i;
        if (running > target) break;
      }
    } else {
      pick = rng.index(data.size());
    }
    centers.row(j) = x.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < nearest.size(); ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(x, static_cast<Eigen::Index>(i), centers, j));
    }
  }
  return centers;
}

}  // namespace

MeansModel fit_kmeans(const Dataset& data, std::size_t k, const FitConfig& cfg, RngSeed seed,
                      const std::optional<Matrix>& warm_start) {
  cfg.validate();
  check_k(data, k);
  if (warm_start) {
    check_dims(data, *warm_start);
    if (static_cast<std::size_t>(warm_start->rows()) > k) {
      throw ParameterError("warm start has more centers than k");
    }
  }
  const std::size_t candidates = cfg.restarts + (warm_start ? 1 : 0);
  std::vector<LloydRun> runs(candidates);
  parallel_for(candidates, cfg.threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {r}));
    Matrix init = r < cfg.restarts ? seed_kmeanspp(data, k, derive_seed(seed, {r}))
                                   : complete_centers(data, *warm_start, k, rng);
    runs[r] = lloyd(data, std::move(init), cfg);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < candidates; ++r) {
    if (runs[r].objective < runs[best].objective) best = r;
  }
  MeansModel model;
  model.seed = seed;
  for (auto& run : runs) model.restart_traces.push_back(run.trace);
  model.centers = std::move(runs[best].centers);
  model.objective = runs[best].objective;
  model.iterations = runs[best].iterations;
  model.trace = std::move(runs[best].trace);
  return model;
}

}  // namespace manquant
