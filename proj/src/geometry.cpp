#include "manquant/geometry.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "manquant/bounds.hpp"
#include "manquant/error.hpp"

namespace manquant {

Dataset::Dataset(Matrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw ParameterError("dataset needs at least one row and one column");
  }
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    if (!points_.row(i).allFinite()) {
      throw ParameterError("dataset row " + std::to_string(i) + " has a non-finite entry");
    }
    const double norm = points_.row(i).norm();
    if (norm > 1.0 + kUnitBallSlack) {
      throw ParameterError("dataset row " + std::to_string(i) + " has norm " +
                           std::to_string(norm) + " outside the unit ball");
    }
  }
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > size() || count == 0) throw ParameterError("slice out of range");
  return Dataset(points_.middleRows(static_cast<Eigen::Index>(first),
                                    static_cast<Eigen::Index>(count)));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix out(static_cast<Eigen::Index>(rows.size()), points_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) throw ParameterError("subset row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = points_.row(static_cast<Eigen::Index>(rows[i]));
  }
  return Dataset(std::move(out));
}

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::UnitSphere: return "sphere";
    case ManifoldKind::UnitCircle: return "circle";
    case ManifoldKind::FlatDisk: return "disk";
    case ManifoldKind::Custom: return "custom";
  }
  return "custom";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
  if (name == "sphere") return ManifoldKind::UnitSphere;
  if (name == "circle") return ManifoldKind::UnitCircle;
  if (name == "disk") return ManifoldKind::FlatDisk;
  if (name == "custom") return ManifoldKind::Custom;
  throw ParameterError("unknown manifold kind '" + name + "'");
}

ManifoldSpec ManifoldSpec::unit_sphere(std::size_t d, std::size_t D) {
  ManifoldSpec spec{ManifoldKind::UnitSphere, d, D, std::nullopt, std::nullopt};
  spec.validate();
  // Uniform density p = 1/Vol, so the integral of p^{d/(d+2)} is Vol^{2/(d+2)}.
  const double volume = sphere_curvature(d);
  spec.density_norm = std::pow(volume, 2.0 / static_cast<double>(d + 2));
  spec.curvature = volume;
  return spec;
}

ManifoldSpec ManifoldSpec::unit_circle(std::size_t D) {
  ManifoldSpec spec = unit_sphere(1, D);
  spec.kind = ManifoldKind::UnitCircle;
  return spec;
}

ManifoldSpec ManifoldSpec::flat_disk(std::size_t d, std::size_t D) {
  ManifoldSpec spec{ManifoldKind::FlatDisk, d, D, std::nullopt, 0.0};
  spec.validate();
  spec.density_norm = std::pow(unit_ball_volume(d), 2.0 / static_cast<double>(d + 2));
  return spec;
}

void ManifoldSpec::validate() const {
  const std::size_t d = intrinsic_dim;
  const std::size_t D = ambient_dim;
  if (d < 1 || D < 1) throw ParameterError("manifold dimensions must be positive");
  switch (kind) {
    case ManifoldKind::UnitSphere:
      if (d > D - 1) throw ParameterError("unit sphere needs 1 <= d <= D - 1");
      break;
    case ManifoldKind::UnitCircle:
      if (d != 1 || D < 2) throw ParameterError("unit circle needs d = 1 and D >= 2");
      break;
    case ManifoldKind::FlatDisk:
    case ManifoldKind::Custom:
      if (d > D) throw ParameterError("intrinsic dimension exceeds ambient dimension");
      break;
  }
  if (density_norm && !(*density_norm > 0.0)) throw ParameterError("density_norm must be > 0");
  if (curvature && !(*curvature >= 0.0)) throw ParameterError("curvature must be >= 0");
}

namespace {

// Fills row i with a normalized Gaussian vector in its first m coordinates.
// Rejects the (measure zero) all-zero draw.
void gaussian_direction(Rng& rng, Matrix& out, Eigen::Index i, std::size_t m) {
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double g = rng.normal();
      out(i, static_cast<Eigen::Index>(j)) = g;
      norm_sq += g * g;
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (std::size_t j = 0; j < m; ++j) out(i, static_cast<Eigen::Index>(j)) *= inv;
}

}  // namespace

Dataset sample_sphere(std::size_t d, std::size_t D, std::size_t n, RngSeed seed) {
  if (d < 1 || D < 2 || d > D - 1) throw ParameterError("sample_sphere needs 1 <= d <= D - 1");
  if (n < 1) throw ParameterError("sample_sphere needs n >= 1");
  Matrix points = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(D));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < points.rows(); ++i) gaussian_direction(rng, points, i, d + 1);
  return Dataset(std::move(points));
}

Dataset sample_flat_disk(std::size_t d, std::size_t D, std::size_t n, RngSeed seed) {
  if (d < 1 || d > D) throw ParameterError("sample_flat_disk needs 1 <= d <= D");
  if (n < 1) throw ParameterError("sample_flat_disk needs n >= 1");
  Matrix points = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(D));
  Rng rng(seed);
  const double inv_d = 1.0 / static_cast<double>(d);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    gaussian_direction(rng, points, i, d);
    const double radius = std::pow(rng.uniform01(), inv_d);
    points.row(i).head(static_cast<Eigen::Index>(d)) *= radius;
  }
  return Dataset(std::move(points));
}

Dataset sample_manifold(const ManifoldSpec& spec, std::size_t n, RngSeed seed) {
  spec.validate();
  switch (spec.kind) {
    case ManifoldKind::UnitSphere:
    case ManifoldKind::UnitCircle:
      return sample_sphere(spec.intrinsic_dim, spec.ambient_dim, n, seed);
    case ManifoldKind::FlatDisk:
      return sample_flat_disk(spec.intrinsic_dim, spec.ambient_dim, n, seed);
    case ManifoldKind::Custom:
      break;
  }
  throw ParameterError("custom manifolds have no sampler");
}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("truncated IDX header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

Dataset parse_idx3(std::span<const std::uint8_t> bytes, std::optional<std::size_t> limit) {
  constexpr std::uint32_t kMagic = 0x00000803;
  constexpr std::size_t kHeader = 16;
  constexpr std::uint32_t kSide = 28;

  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kMagic) {
    throw FormatError("bad IDX3 magic number " + std::to_string(magic) + " (expected 2051)", 0);
  }
  const std::uint32_t count = read_be32(bytes, 4);
  const std::uint32_t rows = read_be32(bytes, 8);
  const std::uint32_t cols = read_be32(bytes, 12);
  if (rows != kSide) throw FormatError("IDX3 row count " + std::to_string(rows) + " != 28", 8);
  if (cols != kSide) throw FormatError("IDX3 column count " + std::to_string(cols) + " != 28", 12);

  std::size_t take = count;
  if (limit) take = std::min<std::size_t>(take, *limit);
  if (take == 0) throw FormatError("IDX3 file holds no images to read", 4);

  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t needed = kHeader + take * pixels;
  if (bytes.size() < needed) {
    throw FormatError("truncated IDX3 payload: need " + std::to_string(needed) + " bytes, have " +
                          std::to_string(bytes.size()),
                      bytes.size());
  }

  Matrix points(static_cast<Eigen::Index>(take), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < take; ++i) {
    const std::uint8_t* image = bytes.data() + kHeader + i * pixels;
    for (std::size_t j = 0; j < pixels; ++j) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(image[j]) * kMnistScale;
    }
  }
  return Dataset(std::move(points));
}

Dataset load_mnist(const std::filesystem::path& path, std::optional<std::size_t> limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open MNIST file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx3(bytes, limit);
}

}  // namespace manquant
