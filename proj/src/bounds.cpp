#include "manquant/bounds.hpp"

#include <cmath>
#include <numbers>

#include "manquant/error.hpp"

namespace manquant {

namespace {

constexpr double kPi = std::numbers::pi;

double as_real(std::size_t d) { return static_cast<double>(d); }

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
}

void check_nk(double n, double k) {
  if (!(n >= 1.0)) throw ParameterError("n must be >= 1");
  if (!(k >= 1.0)) throw ParameterError("k must be >= 1");
}

void check_d(std::size_t d) {
  if (d < 1) throw ParameterError("intrinsic dimension must be >= 1");
}

}  // namespace

void BoundInputs::validate() const {
  check_nk(n, k);
  check_d(d);
  check_delta(delta);
  if (!(density_norm > 0.0)) throw ParameterError("density_norm must be > 0");
  if (!(curvature >= 0.0)) throw ParameterError("curvature must be >= 0");
  if (!(quantization_constant > 0.0)) throw ParameterError("quantization constant must be > 0");
}

double quantization_constant(std::size_t d, int order) {
  check_d(d);
  if (order != 2 && order != 4) throw ParameterError("quantization order must be 2 or 4");
  return std::pow(as_real(d) / (2.0 * kPi * std::numbers::e), order / 2.0);
}

double stat_kmeans(double n, double k, double delta) {
  check_nk(n, k);
  check_delta(delta);
  return k * std::sqrt(18.0 * kPi / n) + std::sqrt(8.0 * std::log(1.0 / delta) / n);
}

double stat_kflats(double n, double k, std::size_t d, double delta) {
  check_nk(n, k);
  check_d(d);
  check_delta(delta);
  return k * std::sqrt(2.0 * kPi * as_real(d) / n) + std::sqrt(std::log(1.0 / delta) / (2.0 * n));
}

double density_lp_norm(std::size_t d, double density_norm) {
  check_d(d);
  return std::pow(density_norm, (as_real(d) + 2.0) / as_real(d));
}

double approx_kmeans(double k, std::size_t d, double density_norm, double c) {
  return c * std::pow(k, -2.0 / as_real(d)) * density_lp_norm(d, density_norm);
}

double approx_kflats(double k, std::size_t d, double curvature, double c) {
  check_d(d);
  return c * std::pow(curvature / k, 4.0 / as_real(d));
}

double kn_kmeans(double n, std::size_t d, double density_norm, double c) {
  check_d(d);
  const double dd = as_real(d);
  return std::pow(n, dd / (2.0 * (dd + 2.0))) *
         std::pow(c / (24.0 * std::sqrt(kPi)), dd / (dd + 2.0)) * density_norm;
}

double kn_kflats(double n, std::size_t d, double curvature, double c) {
  check_d(d);
  const double dd = as_real(d);
  return std::pow(n, dd / (2.0 * (dd + 4.0))) *
         std::pow(c / (2.0 * std::sqrt(2.0 * kPi * dd)), dd / (dd + 4.0)) *
         std::pow(curvature, 4.0 / (dd + 4.0));
}

BalancedTerms kmeans_balance_terms(double n, double k, std::size_t d, double density_norm, double c) {
  return {24.0 * std::sqrt(kPi) * k / std::sqrt(n), approx_kmeans(k, d, density_norm, c)};
}

BalancedTerms kflats_balance_terms(double n, double k, std::size_t d, double curvature, double c) {
  return {2.0 * std::sqrt(2.0 * kPi * as_real(d)) * k / std::sqrt(n),
          approx_kflats(k, d, curvature, c)};
}

double rate_kmeans(double n, std::size_t d, double delta, double density_norm, double c,
                   bool kmeanspp) {
  check_nk(n, 1.0);
  check_d(d);
  check_delta(delta);
  const double dd = as_real(d);
  const double base = 2.0 * std::sqrt(std::log(1.0 / delta)) * std::pow(n, -1.0 / (dd + 2.0)) *
                      std::pow(c, dd / (dd + 2.0)) *
                      std::pow(24.0 * std::sqrt(kPi), 2.0 / (dd + 2.0)) * density_norm;
  if (!kmeanspp) return base;
  const double log_terms = 0.5 * std::log(n) + std::log(c / (12.0 * std::sqrt(kPi))) +
                           std::log(density_lp_norm(d, density_norm));
  return 8.0 * base * (2.0 + dd / (dd + 2.0) * log_terms);
}

double rate_kflats(double n, std::size_t d, double delta, double curvature, double c) {
  check_nk(n, 1.0);
  check_d(d);
  check_delta(delta);
  const double dd = as_real(d);
  return 2.0 * std::pow(8.0 * kPi * dd, 2.0 / (dd + 4.0)) * std::pow(c, dd / (dd + 4.0)) *
         std::pow(n, -2.0 / (dd + 4.0)) * std::sqrt(0.5 * std::log(1.0 / delta)) *
         std::pow(curvature, 4.0 / (dd + 4.0));
}

double sphere_curvature(std::size_t d) {
  check_d(d);
  const double half = (as_real(d) + 1.0) / 2.0;
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

double unit_ball_volume(std::size_t d) {
  check_d(d);
  const double half = as_real(d) / 2.0;
  return std::exp(half * std::log(kPi) - std::lgamma(half + 1.0));
}

double holder_density_bound(std::size_t d) {
  return std::pow(unit_ball_volume(d), 2.0 / (as_real(d) + 2.0));
}

BoundReport decompose(double empirical, double holdout, const BoundInputs& inputs,
                      ModelFamily family) {
  inputs.validate();
  if (!std::isfinite(empirical) || !std::isfinite(holdout)) {
    throw ParameterError("decompose needs finite error values");
  }
  BoundReport report;
  report.family = family;
  report.inputs = inputs;
  report.empirical = empirical;
  report.holdout = holdout;
  report.measured_gap = std::abs(holdout - empirical);
  const double c = inputs.quantization_constant;
  if (family == ModelFamily::KMeans) {
    report.statistical = stat_kmeans(inputs.n, inputs.k, inputs.delta);
    report.approximation = approx_kmeans(inputs.k, inputs.d, inputs.density_norm, c);
    report.k_n = kn_kmeans(inputs.n, inputs.d, inputs.density_norm, c);
  } else {
    report.statistical = stat_kflats(inputs.n, inputs.k, inputs.d, inputs.delta);
    report.approximation = approx_kflats(inputs.k, inputs.d, inputs.curvature, c);
    report.k_n = kn_kflats(inputs.n, inputs.d, inputs.curvature, c);
  }
  report.total = 2.0 * report.statistical + report.approximation;
  return report;
}

}  // namespace manquant
