#include "manquant/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include "manquant/error.hpp"
#include "manquant/numeric.hpp"
#include "manquant/parallel.hpp"

namespace manquant {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::KMeans: return "kmeans";
    case Algorithm::KMeansPPSeedingOnly: return "kmeanspp-seeding";
    case Algorithm::KFlats: return "kflats";
  }
  return "kmeans";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "kmeans") return Algorithm::KMeans;
  if (name == "kmeanspp-seeding") return Algorithm::KMeansPPSeedingOnly;
  if (name == "kflats") return Algorithm::KFlats;
  throw ParameterError("unknown algorithm '" + name + "'");
}

double holdout_error(const Matrix& centers, const Dataset& holdout) {
  return empirical_error(holdout, centers);
}

double holdout_error(const MeansModel& model, const Dataset& holdout) {
  return empirical_error(holdout, model.centers);
}

double holdout_error(const FlatsModel& model, const Dataset& holdout) {
  return empirical_error(holdout, model);
}

Example1Result example1(RngSeed seed, std::size_t holdout_size) {
  constexpr std::size_t kSphereDim = 100;
  constexpr std::size_t kAmbient = 101;
  const Dataset samples = sample_sphere(kSphereDim, kAmbient, 2, seed);
  const Dataset holdout = sample_sphere(kSphereDim, kAmbient, holdout_size, derive_seed(seed, {kHoldoutTag}));

  const Matrix midpoint = samples.points().colwise().mean();
  Example1Result out;
  out.e_k1 = holdout_error(midpoint, holdout);
  out.e_k2 = holdout_error(samples.points(), holdout);
  out.inner_product = samples.row(0).dot(samples.row(1));
  return out;
}

void ExperimentSpec::validate() const {
  if (!pool) manifold.validate();
  if (train_sizes.empty()) throw ParameterError("experiment needs at least one training size");
  if (k_grid.empty()) throw ParameterError("experiment needs a non-empty k grid");
  if (holdout_size < 1000) throw ParameterError("holdout_size must be >= 1000");
  if (repeats < 1) throw ParameterError("repeats must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  for (const auto n : train_sizes) {
    if (n < 1) throw ParameterError("training sizes must be >= 1");
  }
  for (const auto k : k_grid) {
    if (k < 1) throw ParameterError("k grid entries must be >= 1");
  }
  if (pool) {
    const std::size_t largest = *std::max_element(train_sizes.begin(), train_sizes.end());
    if (pool->size() < holdout_size + largest) {
      throw ParameterError("data pool of " + std::to_string(pool->size()) +
                           " rows cannot supply a hold-out of " + std::to_string(holdout_size) +
                           " plus a training set of " + std::to_string(largest));
    }
  }
  fit.validate();
}

RngSeed cell_seed(RngSeed base, std::size_t n, std::size_t k, std::size_t repeat) {
  return derive_seed(base, {n, k, repeat});
}

namespace {

std::vector<std::size_t> shuffled(std::size_t count, RngSeed seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  return order;
}

// Training and hold-out sources for one experiment.
class DataSource {
 public:
  explicit DataSource(const ExperimentSpec& spec) : spec_(spec) {
    if (spec_.pool) {
      const auto order = shuffled(spec_.pool->size(), derive_seed(spec_.base_seed, {kHoldoutTag}));
      holdout_rows_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec_.holdout_size));
      train_rows_.assign(order.begin() + static_cast<std::ptrdiff_t>(spec_.holdout_size), order.end());
    }
  }

  Dataset holdout() const {
    if (spec_.pool) return spec_.pool->subset(holdout_rows_);
    return sample_manifold(spec_.manifold, spec_.holdout_size, derive_seed(spec_.base_seed, {kHoldoutTag}));
  }

  Dataset train(std::size_t n, std::size_t repeat) const {
    const RngSeed seed = derive_seed(spec_.base_seed, {kTrainTag, n, repeat});
    if (!spec_.pool) return sample_manifold(spec_.manifold, n, seed);
    // Partial Fisher-Yates over the non-hold-out rows.
    std::vector<std::size_t> rows = train_rows_;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) std::swap(rows[i], rows[i + rng.index(rows.size() - i)]);
    rows.resize(n);
    return spec_.pool->subset(rows);
  }

 private:
  const ExperimentSpec& spec_;
  std::vector<std::size_t> holdout_rows_;
  std::vector<std::size_t> train_rows_;
};

struct Job {
  std::size_t n;
  std::size_t repeat;
  std::vector<std::size_t> ks;  // ascending
};

std::size_t flat_dim_of(const ExperimentSpec& spec) {
  return spec.flat_dim.value_or(spec.manifold.intrinsic_dim);
}

std::vector<ExperimentRow> run_job(const ExperimentSpec& spec, Algorithm algorithm, const Job& job,
                                   const DataSource& source, const Dataset& holdout) {
  std::vector<ExperimentRow> rows;
  const Dataset train = source.train(job.n, job.repeat);
  std::optional<Matrix> previous;
  for (const std::size_t k : job.ks) {
    ExperimentRow row;
    row.n = job.n;
    row.k = k;
    row.repeat = job.repeat;
    const RngSeed seed = cell_seed(spec.base_seed, job.n, k, job.repeat);
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (algorithm) {
        case Algorithm::KMeans: {
          const bool warm = spec.nested_warm_start && previous && previous->rows() < static_cast<Eigen::Index>(k);
          MeansModel model = fit_kmeans(train, k, spec.fit, seed, warm ? previous : std::optional<Matrix>{});
          row.empirical = model.objective;
          row.holdout = holdout_error(model, holdout);
          row.traces = std::move(model.restart_traces);
          previous = std::move(model.centers);
          break;
        }
        case Algorithm::KMeansPPSeedingOnly: {
          Matrix best;
          double best_obj = std::numeric_limits<double>::infinity();
          for (std::size_t r = 0; r < spec.fit.restarts; ++r) {
            Matrix centers = seed_kmeanspp(train, k, derive_seed(seed, {r}));
            const double obj = empirical_error(train, centers);
            row.traces.push_back({obj});
            if (obj < best_obj) {
              best_obj = obj;
              best = std::move(centers);
            }
          }
          row.empirical = best_obj;
          row.holdout = holdout_error(best, holdout);
          break;
        }
        case Algorithm::KFlats: {
          FlatsModel model = fit_kflats(train, k, flat_dim_of(spec), spec.fit, seed);
          row.empirical = model.objective;
          row.holdout = holdout_error(model, holdout);
          row.traces = std::move(model.restart_traces);
          break;
        }
      }
    } catch (const ParameterError& e) {
      throw ParameterError("cell (n=" + std::to_string(job.n) + ", k=" + std::to_string(k) +
                           ", repeat=" + std::to_string(job.repeat) + "): " + e.what());
    } catch (const Error& e) {
      throw ComputeError("cell (n=" + std::to_string(job.n) + ", k=" + std::to_string(k) +
                         ", repeat=" + std::to_string(job.repeat) + "): " + e.what());
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentReport run_jobs(const ExperimentSpec& spec, Algorithm algorithm, const std::vector<Job>& jobs) {
  const DataSource source(spec);
  const Dataset holdout = source.holdout();
  std::vector<std::vector<ExperimentRow>> results(jobs.size());
  parallel_for(jobs.size(), spec.threads,
               [&](std::size_t j) { results[j] = run_job(spec, algorithm, jobs[j], source, holdout); });

  ExperimentReport report;
  for (auto& r : results) {
    for (auto& row : r) report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return std::tie(a.n, a.k, a.repeat) < std::tie(b.n, b.k, b.repeat);
  });
  return report;
}

void attach_bounds(const ExperimentSpec& spec, ExperimentReport& report) {
  const bool flats = spec.algorithm == Algorithm::KFlats;
  const ManifoldSpec& m = spec.manifold;
  if (spec.pool || (!flats && !m.density_norm) || (flats && !m.curvature)) return;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<CompensatedSum, CompensatedSum>> sums;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
  for (const auto& row : report.rows) {
    auto& s = sums[{row.n, row.k}];
    s.first.add(row.empirical);
    s.second.add(row.holdout);
    ++counts[{row.n, row.k}];
  }
  const std::size_t d = flats ? flat_dim_of(spec) : m.intrinsic_dim;
  for (auto& [key, s] : sums) {
    const double c = static_cast<double>(counts[key]);
    BoundInputs in;
    in.n = static_cast<double>(key.first);
    in.k = static_cast<double>(key.second);
    in.d = std::max<std::size_t>(d, 1);
    in.delta = spec.delta;
    in.density_norm = m.density_norm.value_or(1.0);
    in.curvature = m.curvature.value_or(0.0);
    in.quantization_constant = quantization_constant(in.d, flats ? 4 : 2);
    report.bound_rows.push_back(decompose(s.first.value() / c, s.second.value() / c, in,
                                          flats ? ModelFamily::KFlats : ModelFamily::KMeans));
  }
}

}  // namespace

ExperimentReport tradeoff_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::size_t> ks = spec.k_grid;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<Job> jobs;
  for (const auto n : spec.train_sizes) {
    for (std::size_t r = 0; r < spec.repeats; ++r) jobs.push_back({n, r, ks});
  }
  ExperimentReport report = run_jobs(spec, spec.algorithm, jobs);
  attach_bounds(spec, report);
  return report;
}

std::vector<double> mean_holdout_curve(const ExperimentReport& report, std::size_t n,
                                       std::span<const std::size_t> k_grid) {
  std::vector<double> curve;
  for (const auto k : k_grid) {
    CompensatedSum sum;
    std::size_t count = 0;
    for (const auto& row : report.rows) {
      if (row.n == n && row.k == k) {
        sum.add(row.holdout);
        ++count;
      }
    }
    if (count == 0) {
      throw ParameterError("report has no rows for n=" + std::to_string(n) + ", k=" + std::to_string(k));
    }
    curve.push_back(sum.value() / static_cast<double>(count));
  }
  return curve;
}

std::size_t argmin_index(std::span<const double> errors) {
  if (errors.empty()) throw ParameterError("argmin of an empty list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] < errors[best]) best = i;
  }
  return best;
}

SelectKResult select_k(const Dataset& train, const Dataset& validation,
                       std::span<const std::size_t> k_grid, Algorithm algorithm,
                       const FitConfig& cfg, RngSeed seed, std::size_t flat_dim) {
  if (k_grid.empty()) throw ParameterError("select_k needs a non-empty k grid");
  // Ascending order so that ties resolve to the smallest k.
  std::vector<std::size_t> ks(k_grid.begin(), k_grid.end());
  std::sort(ks.begin(), ks.end());
  std::vector<double> errors;
  for (const auto k : ks) {
    const RngSeed s = derive_seed(seed, {k});
    switch (algorithm) {
      case Algorithm::KMeans:
        errors.push_back(holdout_error(fit_kmeans(train, k, cfg, s), validation));
        break;
      case Algorithm::KMeansPPSeedingOnly:
        errors.push_back(holdout_error(seed_kmeanspp(train, k, s), validation));
        break;
      case Algorithm::KFlats:
        errors.push_back(holdout_error(fit_kflats(train, k, flat_dim, cfg, s), validation));
        break;
    }
  }
  SelectKResult out;
  out.k = ks[argmin_index(errors)];
  // Report errors aligned with the caller's grid order.
  for (const auto k : k_grid) {
    const auto pos = static_cast<std::size_t>(std::find(ks.begin(), ks.end(), k) - ks.begin());
    out.validation_errors.push_back(errors[pos]);
  }
  return out;
}

SelectKResult select_k(const Dataset& data, double validation_fraction,
                       std::span<const std::size_t> k_grid, Algorithm algorithm,
                       const FitConfig& cfg, RngSeed seed, std::size_t flat_dim) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ParameterError("validation fraction must lie in (0, 1)");
  }
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(data.size())));
  if (n_val < 1 || n_val >= data.size()) throw ParameterError("validation split leaves an empty side");
  const std::size_t n_train = data.size() - n_val;
  return select_k(data.slice(0, n_train), data.slice(n_train, n_val), k_grid, algorithm, cfg, seed,
                  flat_dim);
}

RateFit fit_power_law(std::span<const double> n, std::span<const double> errors) {
  if (n.size() != errors.size() || n.empty()) throw ParameterError("rate fit needs matching non-empty series");
  const std::size_t m = n.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(n[i] > 0.0) || !(errors[i] > 0.0)) throw ParameterError("rate fit needs positive n and errors");
    x[i] = std::log(n[i]);
    y[i] = std::log(errors[i]);
  }
  RateFit fit;
  const double x_mean = compensated_mean(x);
  const double y_mean = compensated_mean(y);
  CompensatedSum sxx, sxy;
  for (std::size_t i = 0; i < m; ++i) {
    sxx.add((x[i] - x_mean) * (x[i] - x_mean));
    sxy.add((x[i] - x_mean) * (y[i] - y_mean));
  }
  const bool all_equal = std::all_of(errors.begin(), errors.end(), [&](double e) { return e == errors[0]; });
  if (sxx.value() <= 0.0 || all_equal) {
    fit.degenerate = true;
    fit.intercept = y_mean;
    return fit;
  }
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = y_mean - fit.slope * x_mean;
  CompensatedSum sse;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse.add(r * r);
  }
  fit.residual = std::sqrt(sse.value() / static_cast<double>(m));
  return fit;
}

double schedule_kn(const ManifoldSpec& manifold, Schedule schedule, double n) {
  const std::size_t d = manifold.intrinsic_dim;
  if (schedule == Schedule::KMeans) {
    if (!manifold.density_norm) throw ParameterError("k-means schedule needs the manifold's density_norm");
    return kn_kmeans(n, d, *manifold.density_norm, quantization_constant(d, 2));
  }
  if (!manifold.curvature) throw ParameterError("k-flats schedule needs the manifold's curvature");
  return kn_kflats(n, d, *manifold.curvature, quantization_constant(d, 4));
}

std::size_t schedule_k(const ManifoldSpec& manifold, Schedule schedule, std::size_t n) {
  const double kn = schedule_kn(manifold, schedule, static_cast<double>(n));
  const auto rounded = static_cast<std::size_t>(std::max(1.0, std::round(kn)));
  return std::min(rounded, n);
}

RateExperimentResult rate_experiment(const ExperimentSpec& spec, Schedule schedule) {
  ExperimentSpec s = spec;
  s.k_grid = {1};  // placeholder for validation; k comes from the schedule
  s.validate();
  if (s.pool) throw ParameterError("rate experiments need a manifold sampler");
  if (s.train_sizes.size() < 4) throw ParameterError("rate experiment needs at least four training sizes");
  const auto [lo, hi] = std::minmax_element(s.train_sizes.begin(), s.train_sizes.end());
  if (static_cast<double>(*hi) < 100.0 * static_cast<double>(*lo)) {
    throw ParameterError("rate experiment training sizes must span at least two decades");
  }
  s.algorithm = schedule == Schedule::KMeans ? Algorithm::KMeans : Algorithm::KFlats;

  RateExperimentResult out;
  std::vector<Job> jobs;
  for (const auto n : s.train_sizes) {
    RateRow row;
    row.n = n;
    row.k_n = schedule_kn(s.manifold, schedule, static_cast<double>(n));
    row.k = schedule_k(s.manifold, schedule, n);
    out.rows.push_back(row);
    for (std::size_t r = 0; r < s.repeats; ++r) jobs.push_back({n, r, {row.k}});
  }
  out.report = run_jobs(s, s.algorithm, jobs);
  attach_bounds(s, out.report);

  std::vector<double> ns, errs;
  for (auto& row : out.rows) {
    CompensatedSum sum;
    std::size_t count = 0;
    for (const auto& r : out.report.rows) {
      if (r.n == row.n) {
        sum.add(r.holdout);
        ++count;
      }
    }
    row.mean_holdout = sum.value() / static_cast<double>(count);
    ns.push_back(static_cast<double>(row.n));
    errs.push_back(row.mean_holdout);
  }
  out.fit = fit_power_law(ns, errs);
  out.report.rate_fit = out.fit;
  return out;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  out << "n,k,repeat,empirical,holdout,seconds\n";
  for (const auto& row : report.rows) {
    out << row.n << ',' << row.k << ',' << row.repeat << ',' << row.empirical << ',' << row.holdout
        << ',' << row.seconds << '\n';
  }
}

void write_curve_files(const ExperimentReport& report, std::span<const std::size_t> k_grid,
                       const std::string& prefix) {
  std::vector<std::size_t> ns;
  for (const auto& row : report.rows) {
    if (std::find(ns.begin(), ns.end(), row.n) == ns.end()) ns.push_back(row.n);
  }
  for (const auto n : ns) {
    const auto curve = mean_holdout_curve(report, n, k_grid);
    const std::string path = prefix + "_n" + std::to_string(n) + ".dat";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    for (std::size_t i = 0; i < k_grid.size(); ++i) out << k_grid[i] << ' ' << curve[i] << '\n';
  }
}

void write_rate_file(const RateExperimentResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (const auto& row : result.rows) {
    out << std::log(static_cast<double>(row.n)) << ' ' << std::log(row.mean_holdout) << '\n';
  }
}

}  // namespace manquant
