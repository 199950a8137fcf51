#include "manquant/kflats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "manquant/error.hpp"
#include "manquant/numeric.hpp"
#include "manquant/parallel.hpp"

namespace manquant {

Eigen::MatrixXd Flat::projector() const {
  const Eigen::Index D = offset.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(D, D);
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    if (!degenerate[static_cast<std::size_t>(c)]) p += basis.col(c) * basis.col(c).transpose();
  }
  return p;
}

Flat Flat::degenerate_at(const Eigen::Ref<const Vector>& point, std::size_t d) {
  Flat f;
  f.offset = point;
  f.basis = Eigen::MatrixXd::Zero(point.size(), static_cast<Eigen::Index>(d));
  f.degenerate.assign(d, true);
  return f;
}

double flat_distance_sq(const Eigen::Ref<const Vector>& x, const Flat& flat) {
  if (x.size() != flat.offset.size()) {
    throw ParameterError("point dimension " + std::to_string(x.size()) +
                         " does not match flat dimension " + std::to_string(flat.offset.size()));
  }
  const Vector r = x - flat.offset;
  const double along = flat.basis.cols() == 0 ? 0.0 : (flat.basis.transpose() * r).squaredNorm();
  return std::max(0.0, r.squaredNorm() - along);
}

Flat refit_cell(const Matrix& points, std::size_t d) {
  const Eigen::Index m = points.rows();
  const Eigen::Index D = points.cols();
  if (m < 1) throw ParameterError("refit_cell called on an empty cell");
  if (static_cast<Eigen::Index>(d) > D) throw ParameterError("flat dimension exceeds ambient dimension");

  Flat flat;
  flat.offset = points.colwise().mean().transpose();
  flat.basis = Eigen::MatrixXd::Zero(D, static_cast<Eigen::Index>(d));
  flat.degenerate.assign(d, true);
  if (d == 0) return flat;

  const Eigen::MatrixXd centered = points.rowwise() - flat.offset.transpose();
  const double inv_m = 1.0 / static_cast<double>(m);

  // Eigenpairs of the covariance in descending order: values[i], vectors.col(i).
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (m < D) {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    values = solver.eigenvalues().reverse() * inv_m;
    const Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();
    vectors = centered.transpose() * u;
  } else {
    const Eigen::MatrixXd cov = centered.transpose() * centered * inv_m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    values = solver.eigenvalues().reverse();
    vectors = solver.eigenvectors().rowwise().reverse();
  }

  const double top = std::max(0.0, values(0));
  const Eigen::Index available = std::min<Eigen::Index>(static_cast<Eigen::Index>(d), values.size());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < available; ++i) {
    if (!(values(i) > kRankTolerance * top) || top == 0.0) break;
    // Modified Gram-Schmidt against earlier columns; in the Gram branch the
    // lifted vectors are only orthogonal up to round-off.
    Vector v = vectors.col(i);
    for (Eigen::Index c = 0; c < kept; ++c) v -= flat.basis.col(c).dot(v) * flat.basis.col(c);
    const double norm = v.norm();
    if (!(norm > 0.0)) break;
    flat.basis.col(kept) = v / norm;
    flat.degenerate[static_cast<std::size_t>(kept)] = false;
    ++kept;
  }
  return flat;
}

namespace {

void check_flats(const Dataset& data, std::span<const Flat> flats) {
  if (flats.empty()) throw ParameterError("model has no flats");
  for (const auto& f : flats) {
    if (f.ambient_dim() != data.ambient_dim()) {
      throw ParameterError("flat dimension " + std::to_string(f.ambient_dim()) +
                           " does not match data dimension " + std::to_string(data.ambient_dim()));
    }
  }
}

Matrix gather(const Dataset& data, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.ambient_dim()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
  return out;
}

// Refits every non-empty cell; each empty cell (ascending index) becomes a
// degenerate flat at the point worst represented by its own refit flat.
std::vector<Flat> refit_all(const Dataset& data, const std::vector<std::size_t>& labels,
                            std::size_t k, std::size_t d) {
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::vector<Flat> flats(k);
  bool any_empty = false;
  for (std::size_t j = 0; j < k; ++j) {
    if (members[j].empty()) {
      any_empty = true;
    } else {
      flats[j] = refit_cell(gather(data, members[j]), d);
    }
  }
  if (!any_empty) return flats;

  std::vector<double> residual(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    residual[i] = flat_distance_sq(data.row(i).transpose(), flats[labels[i]]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!members[j].empty()) continue;
    const auto worst = static_cast<std::size_t>(
        std::max_element(residual.begin(), residual.end()) - residual.begin());
    flats[j] = Flat::degenerate_at(data.row(worst).transpose(), d);
    residual[worst] = -1.0;
  }
  return flats;
}

}  // namespace

Assignment assign_to_flats(const Dataset& data, std::span<const Flat> flats) {
  check_flats(data, flats);
  const Matrix& x = data.points();
  const std::size_t n = data.size();
  Assignment out;
  out.labels.assign(n, 0);
  out.sq_dists.assign(n, std::numeric_limits<double>::infinity());
  // One flat at a time over all points; strict < keeps the lowest index on ties.
  Eigen::MatrixXd residual(x.rows(), x.cols());
  Eigen::MatrixXd along;
  for (std::size_t j = 0; j < flats.size(); ++j) {
    const Flat& f = flats[j];
    residual.noalias() = x;
    residual.rowwise() -= f.offset.transpose();
    const Eigen::VectorXd total = residual.rowwise().squaredNorm();
    Eigen::VectorXd dist = total;
    if (f.basis.cols() > 0) {
      along.noalias() = residual * f.basis;
      dist -= along.rowwise().squaredNorm();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::max(0.0, dist(static_cast<Eigen::Index>(i)));
      if (v < out.sq_dists[i]) {
        out.sq_dists[i] = v;
        out.labels[i] = j;
      }
    }
  }
  return out;
}

double empirical_error(const Dataset& data, std::span<const Flat> flats) {
  return compensated_mean(assign_to_flats(data, flats).sq_dists);
}

double empirical_error(const Dataset& data, const FlatsModel& model) {
  return empirical_error(data, std::span<const Flat>(model.flats));
}

FlatsRun lloyd_flats(const Dataset& data, std::vector<std::size_t> labels, std::size_t k,
                     std::size_t d, const FitConfig& cfg) {
  cfg.validate();
  if (labels.size() != data.size()) throw ParameterError("label count does not match data size");
  FlatsRun run;
  run.flats = refit_all(data, labels, k, d);
  run.assignment = assign_to_flats(data, run.flats);
  run.objective = compensated_mean(run.assignment.sq_dists);
  run.trace.push_back(run.objective);

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    std::vector<Flat> flats = refit_all(data, run.assignment.labels, k, d);
    Assignment next = assign_to_flats(data, flats);
    const double objective = compensated_mean(next.sq_dists);
    const bool changed = next.labels != run.assignment.labels;
    const double rel = run.objective > 0.0 ? (run.objective - objective) / run.objective : 0.0;
    run.flats = std::move(flats);
    run.assignment = std::move(next);
    run.objective = objective;
    run.trace.push_back(objective);
    run.iterations = it;
    if (!changed || rel < cfg.rel_tol) break;
  }
  return run;
}

FlatsModel fit_kflats(const Dataset& data, std::size_t k, std::size_t d, const FitConfig& cfg,
                      RngSeed seed) {
  cfg.validate();
  if (k < 1) throw ParameterError("k must be >= 1");
  if (k > data.size()) {
    throw ParameterError("k = " + std::to_string(k) + " exceeds the number of points n = " +
                         std::to_string(data.size()));
  }
  if (d > data.ambient_dim()) throw ParameterError("flat dimension exceeds ambient dimension");

  std::vector<FlatsRun> runs(cfg.restarts);
  parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
    const Matrix centers = seed_kmeanspp(data, k, derive_seed(seed, {r}));
    runs[r] = lloyd_flats(data, assign_to_centers(data, centers).labels, k, d, cfg);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].objective < runs[best].objective) best = r;
  }
  FlatsModel model;
  model.d = d;
  model.seed = seed;
  for (auto& run : runs) model.restart_traces.push_back(run.trace);
  model.flats = std::move(runs[best].flats);
  model.objective = runs[best].objective;
  model.iterations = runs[best].iterations;
  model.trace = std::move(runs[best].trace);
  return model;
}

}  // namespace manquant
