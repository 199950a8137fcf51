#pragma once

#include <cstddef>

namespace manquant {

/// Inputs shared by the bound evaluators.
///
/// density_norm is the integral of p^{d/(d+2)} over the manifold (not yet
/// raised to (d+2)/d); curvature is the k-flats curvature constant;
/// quantization_constant is the Zador-type constant (see
/// quantization_constant()).
struct BoundInputs {
  double n = 1.0;
  double k = 1.0;
  std::size_t d = 1;
  double delta = 0.05;
  double density_norm = 1.0;
  double curvature = 0.0;
  double quantization_constant = 1.0;

  void validate() const;
};

enum class ModelFamily { KMeans, KFlats };

struct BoundReport {
  ModelFamily family = ModelFamily::KMeans;
  BoundInputs inputs;
  double empirical = 0.0;
  double holdout = 0.0;
  double measured_gap = 0.0;   // |holdout - empirical|
  double statistical = 0.0;    // uniform deviation bound at confidence 1 - delta
  double approximation = 0.0;  // Zador-type approximation error at k
  double total = 0.0;          // 2 * statistical + approximation
  double k_n = 0.0;            // schedule value at n, before rounding
};

/// Asymptotic surrogate (d / (2 pi e))^{order / 2} for the quantization
/// constant; order 2 is used for k-means, 4 for k-flats.
double quantization_constant(std::size_t d, int order);

/// k sqrt(18 pi / n) + sqrt(8 ln(1/delta) / n).
double stat_kmeans(double n, double k, double delta);

/// k sqrt(2 pi d / n) + sqrt(ln(1/delta) / (2 n)).
double stat_kflats(double n, double k, std::size_t d, double delta);

/// ||p||_{d/(d+2)} = density_norm^{(d+2)/d}.
double density_lp_norm(std::size_t d, double density_norm);

/// C k^{-2/d} ||p||_{d/(d+2)}.
double approx_kmeans(double k, std::size_t d, double density_norm, double c);

/// C (curvature / k)^{4/d}.
double approx_kflats(double k, std::size_t d, double curvature, double c);

/// Model size balancing the k-means statistical and approximation terms:
/// n^{d/(2(d+2))} (C / (24 sqrt(pi)))^{d/(d+2)} density_norm.
double kn_kmeans(double n, std::size_t d, double density_norm, double c);

/// n^{d/(2(d+4))} (C / (2 sqrt(2 pi d)))^{d/(d+4)} curvature^{4/(d+4)}.
double kn_kflats(double n, std::size_t d, double curvature, double c);

/// The two summands that kn_kmeans equalizes (with the sqrt(ln 1/delta)
/// factor set to one): 24 sqrt(pi) k / sqrt(n) and C k^{-2/d} ||p||.
struct BalancedTerms {
  double statistical;
  double approximation;
};
BalancedTerms kmeans_balance_terms(double n, double k, std::size_t d, double density_norm, double c);
/// 2 sqrt(2 pi d) k / sqrt(n) and C (curvature / k)^{4/d}.
BalancedTerms kflats_balance_terms(double n, double k, std::size_t d, double curvature, double c);

/// k-means excess-risk rate at k = k_n:
///   2 sqrt(ln 1/delta) n^{-1/(d+2)} C^{d/(d+2)} (24 sqrt(pi))^{2/(d+2)} density_norm.
/// With `kmeanspp` set, the k-means++ form: 8 times the above times
///   [2 + d/(d+2) (ln(n)/2 + ln(C / (12 sqrt(pi))) + ln ||p||)].
double rate_kmeans(double n, std::size_t d, double delta, double density_norm, double c,
                   bool kmeanspp = false);

/// 2 (8 pi d)^{2/(d+4)} C^{d/(d+4)} n^{-2/(d+4)} sqrt(ln(1/delta)/2) curvature^{4/(d+4)}.
double rate_kflats(double n, std::size_t d, double delta, double curvature, double c);

/// Volume of the unit d-sphere S^d in R^{d+1}: 2 pi^{(d+1)/2} / Gamma((d+1)/2).
/// For hypersurfaces this is the total root curvature (Gaussian curvature 1).
double sphere_curvature(std::size_t d);

/// Volume of the unit d-ball: pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(std::size_t d);

/// Density-free upper bound omega_d^{2/(d+2)} on density_norm.
double holder_density_bound(std::size_t d);

/// Bound decomposition for a fitted model: measured empirical/hold-out gap,
/// the statistical bound, the approximation term at k and the schedule k_n.
BoundReport decompose(double empirical, double holdout, const BoundInputs& inputs,
                      ModelFamily family = ModelFamily::KMeans);

}  // namespace manquant
