#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "manquant/error.hpp"
#include "manquant/kflats.hpp"
#include "manquant/kmeans.hpp"
#include "manquant/oracle.hpp"

namespace manquant {
namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (const double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Eigen::MatrixXd random_orthonormal(Rng& rng, Eigen::Index D, Eigen::Index d) {
  Eigen::MatrixXd g(D, d);
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(D, d);
}

Flat random_flat(Rng& rng, Eigen::Index D, Eigen::Index d) {
  Flat f;
  f.offset = Vector(D);
  for (Eigen::Index i = 0; i < D; ++i) f.offset(i) = 0.3 * rng.normal();
  f.basis = random_orthonormal(rng, D, d);
  f.degenerate.assign(static_cast<std::size_t>(d), false);
  return f;
}

Dataset parallel_lines(std::size_t per_line) {
  Matrix m(static_cast<Eigen::Index>(2 * per_line), 2);
  for (std::size_t i = 0; i < per_line; ++i) {
    const double x = -0.6 + 1.2 * static_cast<double>(i) / static_cast<double>(per_line - 1);
    m(static_cast<Eigen::Index>(i), 0) = x;
    m(static_cast<Eigen::Index>(i), 1) = 0.0;
    m(static_cast<Eigen::Index>(per_line + i), 0) = x;
    m(static_cast<Eigen::Index>(per_line + i), 1) = 0.7;
  }
  return Dataset(std::move(m));
}

TEST(FlatDistance, PointOnFlatIsZero) {
  Rng rng(RngSeed{1});
  for (int t = 0; t < 50; ++t) {
    const Flat f = random_flat(rng, 5, 2);
    Vector u(2);
    u << rng.normal(), rng.normal();
    const Vector x = f.offset + f.basis * u;
    EXPECT_NEAR(flat_distance_sq(x, f), 0.0, 1e-12);
  }
}

TEST(FlatDistance, OffsetAboveCoordinatePlane) {
  Flat plane;
  plane.offset = Vector::Zero(3);
  plane.basis = Eigen::MatrixXd::Identity(3, 2);
  plane.degenerate = {false, false};
  Vector x(3);
  x << 0.0, 0.0, 1.0;
  EXPECT_DOUBLE_EQ(flat_distance_sq(x, plane), 1.0);
}

TEST(FlatDistance, MatchesExplicitProjector) {
  Rng rng(RngSeed{2});
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index D = 2 + static_cast<Eigen::Index>(rng.index(6));
    const Eigen::Index d = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(D) + 1));
    const Flat f = random_flat(rng, D, d);
    Vector x(D);
    for (Eigen::Index i = 0; i < D; ++i) x(i) = rng.normal();
    const Eigen::MatrixXd complement = Eigen::MatrixXd::Identity(D, D) - f.basis * f.basis.transpose();
    const double expected = (complement * (x - f.offset)).squaredNorm();
    EXPECT_NEAR(flat_distance_sq(x, f), expected, 1e-10);
  }
}

TEST(FlatDistance, DimensionMismatch) {
  Flat f = Flat::degenerate_at(Vector::Zero(3), 1);
  EXPECT_THROW(flat_distance_sq(Vector::Zero(2), f), ParameterError);
}

TEST(RefitCell, CollinearPointsInR3) {
  const Matrix pts = rows({{0.1, 0.2, 0.3}, {0.2, 0.3, 0.4}, {-0.1, 0.0, 0.1}, {0.4, 0.5, 0.6}});
  const Flat f = refit_cell(pts, 1);
  EXPECT_FALSE(f.degenerate[0]);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) EXPECT_NEAR(flat_distance_sq(pts.row(i).transpose(), f), 0.0, 1e-12);
}

TEST(RefitCell, TiedEigenvaluesAnyDirectionSameResidual) {
  const double h = 1.0 / std::sqrt(2.0);
  const Matrix pts = rows({{h, h}, {h, -h}, {-h, h}, {-h, -h}});
  const Flat f = refit_cell(pts, 1);
  EXPECT_NEAR(f.offset.norm(), 0.0, 1e-15);
  EXPECT_NEAR(f.basis.col(0).norm(), 1.0, 1e-12);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) sum += flat_distance_sq(pts.row(i).transpose(), f);
  // Each corner sits h^2 = 1/2 off any line through the origin.
  EXPECT_NEAR(sum, 2.0, 1e-12);
  // Any other unit direction gives the same residual sum.
  Flat rotated = f;
  rotated.basis.col(0) << std::cos(0.3), std::sin(0.3);
  double rotated_sum = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) rotated_sum += flat_distance_sq(pts.row(i).transpose(), rotated);
  EXPECT_NEAR(rotated_sum, 2.0, 1e-12);
}

TEST(RefitCell, SinglePointIsDegenerate) {
  const Matrix pts = rows({{0.1, -0.2, 0.3}});
  const Flat f = refit_cell(pts, 2);
  EXPECT_EQ(f.degenerate, (std::vector<bool>{true, true}));
  EXPECT_EQ(f.basis.norm(), 0.0);
  EXPECT_EQ(flat_distance_sq(pts.row(0).transpose(), f), 0.0);
}

TEST(RefitCell, RankDeficientCellPadsWithDegenerateColumns) {
  const Matrix pts = rows({{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}});
  const Flat f = refit_cell(pts, 2);
  EXPECT_EQ(f.degenerate, (std::vector<bool>{false, true}));
  EXPECT_EQ(f.basis.col(1).norm(), 0.0);
}

TEST(RefitCell, OrthonormalBasisAndTopSubspace) {
  Rng rng(RngSeed{3});
  // Anisotropic cloud with well separated variances 0.04, 0.01, 0.0025, ...
  Matrix pts(300, 6);
  const Eigen::MatrixXd rotation = random_orthonormal(rng, 6, 6);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Vector z(6);
    for (Eigen::Index j = 0; j < 6; ++j) z(j) = rng.normal() * 0.2 * std::pow(0.5, static_cast<double>(j));
    pts.row(i) = (rotation * z).transpose();
  }
  const Flat f = refit_cell(pts, 3);
  EXPECT_LT((f.basis.transpose() * f.basis - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-9);
  // Eigen-residual check against the covariance.
  const Eigen::MatrixXd centered = pts.rowwise() - f.offset.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(pts.rows());
  for (Eigen::Index c = 0; c < 3; ++c) {
    const Vector v = f.basis.col(c);
    const double lambda = v.dot(cov * v);
    EXPECT_LT((cov * v - lambda * v).norm(), 1e-10);
  }
  // Gram path (fewer rows than columns) spans the same subspace.
  const Matrix few = pts.topRows(4);
  const Flat via_gram = refit_cell(few, 2);
  const Eigen::MatrixXd c4 = (few.rowwise() - few.colwise().mean()).transpose() *
                             (few.rowwise() - few.colwise().mean()) / 4.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c4);
  const Eigen::MatrixXd top = es.eigenvectors().rightCols(2);
  EXPECT_LT((via_gram.projector() - top * top.transpose()).norm(), 1e-9);
}

TEST(RefitCell, Errors) {
  EXPECT_THROW(refit_cell(Matrix(0, 3), 1), ParameterError);
  EXPECT_THROW(refit_cell(rows({{0.1, 0.2}}), 3), ParameterError);
}

TEST(FitKflats, SingleFlatDataIsExact) {
  const Dataset data = sample_flat_disk(2, 5, 300, RngSeed{4});
  FitConfig cfg;
  cfg.restarts = 2;
  const FlatsModel m = fit_kflats(data, 1, 2, cfg, RngSeed{1});
  EXPECT_LT(m.objective, 1e-12);
  const Dataset line = sample_flat_disk(1, 2, 50, RngSeed{5});
  EXPECT_LT(fit_kflats(line, 1, 1, cfg, RngSeed{1}).objective, 1e-18);
}

TEST(FitKflats, ParallelLinesAreSeparated) {
  const Dataset data = parallel_lines(50);
  const FlatsModel m = fit_kflats(data, 2, 1, FitConfig{}, RngSeed{2});
  EXPECT_LT(m.objective, 1e-10);
  const Assignment a = assign_to_flats(data, m.flats);
  for (std::size_t i = 1; i < 50; ++i) {
    EXPECT_EQ(a.labels[i], a.labels[0]);
    EXPECT_EQ(a.labels[50 + i], a.labels[50]);
  }
  EXPECT_NE(a.labels[0], a.labels[50]);
}

TEST(FitKflats, BeatsKmeansOnSphere) {
  const Dataset data = sample_sphere(2, 3, 2000, RngSeed{6});
  FitConfig cfg;
  cfg.restarts = 3;
  const FlatsModel flats = fit_kflats(data, 20, 2, cfg, RngSeed{7});
  const MeansModel means = fit_kmeans(data, 20, cfg, RngSeed{7});
  EXPECT_LT(flats.objective, means.objective);
}

TEST(FitKflats, DescentRefitCertificateAndFixedPoint) {
  const Dataset data = sample_sphere(2, 3, 500, RngSeed{8});
  FitConfig cfg;
  cfg.restarts = 5;
  const FlatsModel m = fit_kflats(data, 8, 2, cfg, RngSeed{9});
  for (const auto& trace : m.restart_traces) {
    for (std::size_t t = 1; t < trace.size(); ++t) EXPECT_LE(trace[t], trace[t - 1] + 1e-12);
  }
  EXPECT_NEAR(m.objective, empirical_error(data, m), 1e-12);

  const Assignment a = assign_to_flats(data, m.flats);
  for (std::size_t j = 0; j < m.k(); ++j) {
    const Flat& f = m.flats[j];
    EXPECT_LT((f.basis.transpose() * f.basis - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-9);
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (a.labels[i] == j) members.push_back(i);
    }
    if (members.empty()) continue;
    const Flat refit = refit_cell(data.subset(members).points(), 2);
    EXPECT_LT((refit.offset - f.offset).norm(), 1e-6);
    EXPECT_LT((refit.projector() - f.projector()).norm(), 1e-6);
  }

  FitConfig one = cfg;
  one.max_iters = 1;
  const FlatsRun pass = lloyd_flats(data, a.labels, m.k(), 2, one);
  EXPECT_LT(std::abs(pass.trace.front() - m.objective), 1e-9);
}

TEST(FitKflats, ObjectiveInvariantUnderBasisRotation) {
  const Dataset data = sample_sphere(3, 4, 300, RngSeed{10});
  FitConfig cfg;
  cfg.restarts = 2;
  FlatsModel m = fit_kflats(data, 5, 2, cfg, RngSeed{11});
  Rng rng(RngSeed{12});
  for (auto& f : m.flats) {
    bool full = std::none_of(f.degenerate.begin(), f.degenerate.end(), [](bool b) { return b; });
    if (full) f.basis = f.basis * random_orthonormal(rng, 2, 2);
  }
  EXPECT_NEAR(empirical_error(data, m), m.objective, 1e-12);
}

TEST(FitKflats, ZeroDimensionalFlatsAreMeans) {
  const Dataset data = sample_sphere(2, 3, 200, RngSeed{13});
  FitConfig cfg;
  cfg.restarts = 4;
  const FlatsModel m = fit_kflats(data, 4, 0, cfg, RngSeed{14});
  Matrix centers(4, 3);
  for (std::size_t j = 0; j < 4; ++j) centers.row(static_cast<Eigen::Index>(j)) = m.flats[j].offset.transpose();
  EXPECT_NEAR(empirical_error(data, centers), m.objective, 1e-12);
}

TEST(FitKflats, NeverBeatsOracle) {
  Rng rng(RngSeed{15});
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 5 + rng.index(3);
    Matrix m(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) m(i, j) = rng.uniform01() - 0.5;
    }
    const Dataset data(m);
    const double oracle = global_kflats(TinyInstance{data, 2, 1}).objective;
    const double fitted = fit_kflats(data, 2, 1, FitConfig{}, RngSeed{static_cast<std::uint64_t>(t)}).objective;
    EXPECT_LE(oracle, fitted + 1e-9);
  }
}

TEST(FitKflats, Errors) {
  const Dataset data = sample_sphere(1, 2, 3, RngSeed{});
  EXPECT_THROW(fit_kflats(data, 4, 1, FitConfig{}, RngSeed{}), ParameterError);
  EXPECT_THROW(fit_kflats(data, 1, 3, FitConfig{}, RngSeed{}), ParameterError);
  EXPECT_THROW(fit_kflats(data, 0, 1, FitConfig{}, RngSeed{}), ParameterError);
}

}  // namespace
}  // namespace manquant
