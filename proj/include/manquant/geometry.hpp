#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "manquant/random.hpp"

namespace manquant {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Point cloud of n rows in R^D, all inside the closed unit ball.
///
/// Construction validates the invariants (n >= 1, D >= 1, finite entries,
/// every row norm <= 1 + 1e-9) and throws ParameterError otherwise. The
/// contents are immutable afterwards, so a Dataset can be shared freely
/// between threads.
class Dataset {
 public:
  static constexpr double kUnitBallSlack = 1e-9;

  explicit Dataset(Matrix points);

  const Matrix& points() const { return points_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t ambient_dim() const { return static_cast<std::size_t>(points_.cols()); }
  auto row(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }

  /// Rows [first, first + count) as a new dataset.
  Dataset slice(std::size_t first, std::size_t count) const;
  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  Matrix points_;
};

enum class ManifoldKind { UnitSphere, UnitCircle, FlatDisk, Custom };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name);

/// Description of the support of the sampling distribution.
///
/// density_norm is the integral of p^{d/(d+2)} against the manifold volume
/// measure; curvature is the k-flats curvature constant. Both are optional
/// because only the bound evaluators need them.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::UnitSphere;
  std::size_t intrinsic_dim = 1;
  std::size_t ambient_dim = 2;
  std::optional<double> density_norm;
  std::optional<double> curvature;

  /// Uniform measure on the unit d-sphere in R^D, with the uniform-density
  /// norm Vol(S^d)^{2/(d+2)} and total root curvature Vol(S^d) filled in.
  static ManifoldSpec unit_sphere(std::size_t d, std::size_t D);
  static ManifoldSpec unit_circle(std::size_t D);
  /// Uniform unit d-ball; curvature 0.
  static ManifoldSpec flat_disk(std::size_t d, std::size_t D);

  /// Throws ParameterError if the fields are inconsistent.
  void validate() const;
};

/// n i.i.d. uniform points on the unit d-sphere spanned by the first d + 1
/// coordinates of R^D (normalized standard Gaussians, zero-padded).
Dataset sample_sphere(std::size_t d, std::size_t D, std::size_t n, RngSeed seed);

/// n i.i.d. uniform points in the unit d-ball spanned by the first d
/// coordinates of R^D (Gaussian direction times radius U^{1/d}).
Dataset sample_flat_disk(std::size_t d, std::size_t D, std::size_t n, RngSeed seed);

/// Dispatches on spec.kind. Custom manifolds cannot be sampled.
Dataset sample_manifold(const ManifoldSpec& spec, std::size_t n, RngSeed seed);

/// Scale applied to raw MNIST bytes so every flattened image lies in the
/// unit ball: 255 * sqrt(784) / (255 * 28) = 1.
inline constexpr double kMnistScale = 1.0 / (255.0 * 28.0);

/// Parses an IDX3 (magic 2051) unsigned-byte file of 28x28 images, flattened
/// row-major to D = 784 and multiplied by kMnistScale. Labels are never read.
/// Throws FormatError with the failing byte offset on a bad magic number,
/// image size other than 28x28, or truncated payload.
Dataset parse_idx3(std::span<const std::uint8_t> bytes, std::optional<std::size_t> limit = {});

/// Reads `path` and forwards to parse_idx3. Throws IoError if unreadable.
Dataset load_mnist(const std::filesystem::path& path, std::optional<std::size_t> limit = {});

}  // namespace manquant
