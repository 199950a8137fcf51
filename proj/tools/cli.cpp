#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "manquant/bounds.hpp"
#include "manquant/dataset_io.hpp"
#include "manquant/error.hpp"
#include "manquant/geometry.hpp"
#include "manquant/harness.hpp"
#include "manquant/kflats.hpp"
#include "manquant/kmeans.hpp"
#include "manquant/oracle.hpp"
#include "manquant/serialize.hpp"

namespace manquant::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // common
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 1;

  // data / manifold
  std::string data;
  std::string manifold = "sphere";
  std::size_t d = 2;
  std::size_t ambient = 0;  // 0: d + 1 for spheres, d for disks
  std::size_t n = 1000;
  std::string format = "mrc";
  std::string mnist;
  std::size_t limit = 0;

  // fitting
  std::size_t k = 1;
  std::size_t flat_dim = 1;
  std::size_t restarts = 20;
  std::size_t max_iters = 200;
  double rel_tol = 1e-10;

  // bounds
  std::string preset = "sphere";
  std::string family = "kmeans";
  double delta = 0.05;
  std::optional<double> density_norm;
  std::optional<double> curvature;
  std::optional<double> quantization;
  std::optional<double> empirical;
  std::optional<double> holdout_value;

  // experiments
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> ks;
  std::size_t k_min = 2;
  std::size_t k_max = 40;
  std::size_t holdout = 100000;
  std::size_t repeats = 5;
  std::string algorithm = "kmeans";
  std::string schedule = "kmeans";
  double validation_fraction = 0.2;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file; flags override its keys");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--threads", o.threads, "Worker cap (0 = all cores)");
}

void add_manifold(CLI::App* cmd, Options& o) {
  cmd->add_option("--manifold", o.manifold, "sphere | circle | disk")
      ->check(CLI::IsMember({"sphere", "circle", "disk"}));
  cmd->add_option("--d", o.d, "Intrinsic dimension");
  cmd->add_option("--D", o.ambient, "Ambient dimension (default d+1 for spheres, d for disks)");
}

void add_fit(CLI::App* cmd, Options& o) {
  cmd->add_option("--restarts", o.restarts, "Independent seeded restarts");
  cmd->add_option("--max-iters", o.max_iters, "Lloyd iteration cap");
  cmd->add_option("--rel-tol", o.rel_tol, "Relative objective decrease stopping threshold");
}

ManifoldSpec manifold_of(const Options& o) {
  const ManifoldKind kind = manifold_kind_from_string(o.manifold);
  switch (kind) {
    case ManifoldKind::UnitCircle:
      return ManifoldSpec::unit_circle(o.ambient == 0 ? 2 : o.ambient);
    case ManifoldKind::FlatDisk:
      return ManifoldSpec::flat_disk(o.d, o.ambient == 0 ? o.d : o.ambient);
    default:
      return ManifoldSpec::unit_sphere(o.d, o.ambient == 0 ? o.d + 1 : o.ambient);
  }
}

FitConfig fit_config(const Options& o) {
  FitConfig cfg;
  cfg.restarts = o.restarts;
  cfg.max_iters = o.max_iters;
  cfg.rel_tol = o.rel_tol;
  cfg.threads = o.threads;
  return cfg;
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_json(const Json& j, const fs::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

Dataset require_data(const Options& o) {
  if (o.data.empty()) throw ParameterError("--data is required");
  try {
    return read_dataset(o.data);
  } catch (const ParameterError& e) {
    // Loaded points violating the dataset invariants are bad input data.
    throw FormatError(o.data + ": " + e.what(), 0);
  }
}

std::vector<std::size_t> k_grid_of(const Options& o) {
  if (!o.ks.empty()) return o.ks;
  if (o.k_min < 1 || o.k_max < o.k_min) throw ParameterError("need 1 <= --k-min <= --k-max");
  std::vector<std::size_t> grid;
  for (std::size_t k = o.k_min; k <= o.k_max; ++k) grid.push_back(k);
  return grid;
}

int cmd_sample(const Options& o, std::ostream& out) {
  const ManifoldSpec spec = manifold_of(o);
  const Dataset data = sample_manifold(spec, o.n, RngSeed{o.seed});
  const fs::path dir = prepare_out(o);
  fs::path path;
  if (o.format == "csv") {
    path = dir / "dataset.csv";
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < data.ambient_dim(); ++j) f << (j ? "," : "") << data.points()(i, j);
      f << '\n';
    }
  } else {
    path = dir / "dataset.mrc";
    write_container(data, path);
  }
  out << "sample: " << data.size() << " points in R^" << data.ambient_dim() << " -> " << path.string() << '\n';
  return kOk;
}

int cmd_fit_kmeans(const Options& o, std::ostream& out) {
  const Dataset data = require_data(o);
  const MeansModel model = fit_kmeans(data, o.k, fit_config(o), RngSeed{o.seed});
  const fs::path path = prepare_out(o) / "model.json";
  write_json(to_json(model), path);
  out << "fit-kmeans: k=" << model.k() << " objective=" << model.objective << " -> " << path.string() << '\n';
  return kOk;
}

int cmd_fit_kflats(const Options& o, std::ostream& out) {
  const Dataset data = require_data(o);
  const FlatsModel model = fit_kflats(data, o.k, o.flat_dim, fit_config(o), RngSeed{o.seed});
  const fs::path path = prepare_out(o) / "model.json";
  write_json(to_json(model), path);
  out << "fit-kflats: k=" << model.k() << " d=" << model.d << " objective=" << model.objective << " -> "
      << path.string() << '\n';
  return kOk;
}

int cmd_bounds(const Options& o, std::ostream& out) {
  const bool flats = o.family == "kflats";
  BoundInputs in;
  in.n = static_cast<double>(o.n);
  in.k = static_cast<double>(o.k);
  in.d = o.d;
  in.delta = o.delta;
  if (o.preset == "sphere") {
    const ManifoldSpec m = ManifoldSpec::unit_sphere(o.d, o.d + 1);
    in.density_norm = *m.density_norm;
    in.curvature = *m.curvature;
  } else if (o.preset == "disk") {
    const ManifoldSpec m = ManifoldSpec::flat_disk(o.d, o.d);
    in.density_norm = *m.density_norm;
    in.curvature = 0.0;
  } else if (o.preset == "holder") {
    in.density_norm = holder_density_bound(o.d);
  } else if (o.preset != "custom") {
    throw ParameterError("unknown --preset '" + o.preset + "'");
  }
  if (o.density_norm) in.density_norm = *o.density_norm;
  if (o.curvature) in.curvature = *o.curvature;
  in.quantization_constant = o.quantization.value_or(quantization_constant(o.d, flats ? 4 : 2));
  const BoundReport report = decompose(o.empirical.value_or(0.0), o.holdout_value.value_or(0.0), in,
                                       flats ? ModelFamily::KFlats : ModelFamily::KMeans);
  const fs::path path = prepare_out(o) / "bounds.json";
  write_json(to_json(report), path);
  out << "bounds: statistical=" << report.statistical << " approximation=" << report.approximation
      << " k_n=" << report.k_n << " -> " << path.string() << '\n';
  return kOk;
}

int cmd_example1(const Options& o, std::ostream& out) {
  const Example1Result r = example1(RngSeed{o.seed}, o.holdout);
  const fs::path path = prepare_out(o) / "example1.json";
  write_json(to_json(r), path);
  out << "example1: e_k1=" << r.e_k1 << " e_k2=" << r.e_k2 << (r.e_k1 < r.e_k2 ? " (k=1 better)" : " (k=2 better)")
      << " -> " << path.string() << '\n';
  return kOk;
}

ExperimentSpec experiment_of(const Options& o) {
  ExperimentSpec spec;
  if (!o.mnist.empty()) {
    spec.pool = std::make_shared<const Dataset>(
        load_mnist(o.mnist, o.limit == 0 ? std::nullopt : std::optional<std::size_t>(o.limit)));
  } else {
    spec.manifold = manifold_of(o);
  }
  spec.train_sizes = o.sizes.empty() ? std::vector<std::size_t>{50, 200, 1000, 5000} : o.sizes;
  spec.k_grid = k_grid_of(o);
  spec.holdout_size = o.holdout;
  spec.algorithm = algorithm_from_string(o.algorithm);
  spec.repeats = o.repeats;
  spec.base_seed = RngSeed{o.seed};
  spec.fit = fit_config(o);
  spec.fit.threads = 1;
  spec.threads = o.threads;
  spec.delta = o.delta;
  if (spec.algorithm == Algorithm::KFlats) spec.flat_dim = o.flat_dim;
  return spec;
}

int cmd_tradeoff(const Options& o, std::ostream& out) {
  const ExperimentSpec spec = experiment_of(o);
  const ExperimentReport report = tradeoff_experiment(spec);
  const fs::path dir = prepare_out(o);
  write_report_csv(report, (dir / "report.csv").string());
  write_json(summary_json(report), dir / "summary.json");
  std::vector<std::size_t> grid = spec.k_grid;
  std::sort(grid.begin(), grid.end());
  write_curve_files(report, grid, (dir / "curve").string());
  out << "tradeoff: " << report.rows.size() << " cells -> " << (dir / "report.csv").string() << '\n';
  return kOk;
}

int cmd_rates(const Options& o, std::ostream& out) {
  Options opts = o;
  if (opts.sizes.empty()) opts.sizes = {100, 1000, 10000, 100000};
  ExperimentSpec spec = experiment_of(opts);
  spec.flat_dim = spec.manifold.intrinsic_dim;
  const Schedule schedule = o.schedule == "kflats" ? Schedule::KFlats : Schedule::KMeans;
  if (o.schedule != "kflats" && o.schedule != "kmeans") throw ParameterError("--schedule must be kmeans or kflats");
  const RateExperimentResult result = rate_experiment(spec, schedule);
  const fs::path dir = prepare_out(o);
  write_report_csv(result.report, (dir / "report.csv").string());
  write_json(to_json(result), dir / "rates.json");
  write_rate_file(result, (dir / "rates.dat").string());
  out << "rates: slope=" << result.fit.slope << " residual=" << result.fit.residual
      << (result.fit.degenerate ? " (degenerate)" : "") << " -> " << (dir / "rates.json").string() << '\n';
  return kOk;
}

int cmd_select_k(const Options& o, std::ostream& out) {
  const Dataset data = require_data(o);
  const auto grid = k_grid_of(o);
  const SelectKResult r = select_k(data, o.validation_fraction, grid, algorithm_from_string(o.algorithm),
                                   fit_config(o), RngSeed{o.seed}, o.flat_dim);
  Json j;
  j["k"] = r.k;
  j["k_grid"] = grid;
  j["validation_errors"] = r.validation_errors;
  const fs::path path = prepare_out(o) / "select_k.json";
  write_json(j, path);
  out << "select-k: k=" << r.k << " -> " << path.string() << '\n';
  return kOk;
}

int cmd_oracle_check(const Options& o, std::ostream& out) {
  const Dataset data = require_data(o);
  const bool flats = o.family == "kflats";
  const TinyInstance inst{data, o.k, flats ? o.flat_dim : 0};
  const OracleResult oracle = flats ? global_kflats(inst) : global_kmeans(inst);
  const double fitted = flats ? fit_kflats(data, o.k, o.flat_dim, fit_config(o), RngSeed{o.seed}).objective
                              : fit_kmeans(data, o.k, fit_config(o), RngSeed{o.seed}).objective;
  Json j;
  j["family"] = o.family;
  j["k"] = o.k;
  j["oracle_objective"] = oracle.objective;
  j["oracle_partition"] = oracle.partition;
  j["fit_objective"] = fitted;
  j["matches"] = std::abs(fitted - oracle.objective) <= 1e-9;
  const fs::path path = prepare_out(o) / "oracle.json";
  write_json(j, path);
  out << "oracle-check: oracle=" << oracle.objective << " fit=" << fitted << " -> " << path.string() << '\n';
  return kOk;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"sample", "fit-kmeans", "fit-kflats", "bounds", "example1",
                                                 "tradeoff", "rates", "select-k", "oracle-check"};
  return names;
}

// Turns config-file keys into flags that precede the command-line flags, so
// explicit flags win. A "command" key selects the subcommand when none is
// given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  const auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end() || std::next(it) == args.end()) return args;
  const std::string path = *std::next(it);
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path);
  Json cfg;
  try {
    cfg = Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  if (!cfg.is_object()) throw FormatError("config must be a JSON object", 0);

  const auto& names = command_names();
  auto cmd = std::find_if(args.begin(), args.end(),
                          [&](const std::string& a) { return std::find(names.begin(), names.end(), a) != names.end(); });
  if (cmd == args.end()) {
    if (!cfg.contains("command")) throw ParameterError("no command given on the command line or in the config");
    args.insert(args.begin(), cfg["command"].get<std::string>());
    cmd = args.begin();
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    const std::string flag = "--" + key;
    if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
    injected.push_back(flag);
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      injected.push_back(joined);
    } else {
      injected.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  args.insert(std::next(cmd), injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fit and evaluate k-means / k-flats approximations of manifold data"};
  app.name("manquant");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* sample = app.add_subcommand("sample", "Sample a synthetic manifold dataset");
  add_common(sample, o);
  add_manifold(sample, o);
  sample->add_option("--n", o.n, "Number of points");
  sample->add_option("--format", o.format, "mrc | csv")->check(CLI::IsMember({"mrc", "csv"}));

  auto* fit_km = app.add_subcommand("fit-kmeans", "Fit k-means (best of restarts)");
  add_common(fit_km, o);
  add_fit(fit_km, o);
  fit_km->add_option("--data", o.data, "Dataset file (MRC1, IDX3 or CSV)");
  fit_km->add_option("--k", o.k, "Number of centers");

  auto* fit_kf = app.add_subcommand("fit-kflats", "Fit k-flats (best of restarts)");
  add_common(fit_kf, o);
  add_fit(fit_kf, o);
  fit_kf->add_option("--data", o.data, "Dataset file (MRC1, IDX3 or CSV)");
  fit_kf->add_option("--k", o.k, "Number of flats");
  fit_kf->add_option("--d", o.flat_dim, "Flat dimension");

  auto* bounds = app.add_subcommand("bounds", "Evaluate the bound decomposition");
  add_common(bounds, o);
  bounds->add_option("--preset", o.preset, "sphere | disk | holder | custom");
  bounds->add_option("--family", o.family, "kmeans | kflats")->check(CLI::IsMember({"kmeans", "kflats"}));
  bounds->add_option("--d", o.d, "Intrinsic dimension");
  bounds->add_option("--n", o.n, "Sample size");
  bounds->add_option("--k", o.k, "Model size");
  bounds->add_option("--delta", o.delta, "Confidence parameter");
  bounds->add_option("--density-norm", o.density_norm, "Integral of p^{d/(d+2)}");
  bounds->add_option("--curvature", o.curvature, "Curvature constant");
  bounds->add_option("--C", o.quantization, "Quantization constant override");
  bounds->add_option("--empirical", o.empirical, "Measured training error");
  bounds->add_option("--holdout", o.holdout_value, "Measured hold-out error");

  auto* ex1 = app.add_subcommand("example1", "Two samples on S^100: k=1 vs k=2");
  add_common(ex1, o);
  ex1->add_option("--holdout", o.holdout, "Hold-out size");

  auto* trade = app.add_subcommand("tradeoff", "Hold-out error as a function of k");
  add_common(trade, o);
  add_manifold(trade, o);
  add_fit(trade, o);
  trade->add_option("--n", o.sizes, "Training sizes (comma separated)")->delimiter(',');
  trade->add_option("--k", o.ks, "Explicit k grid (comma separated)")->delimiter(',');
  trade->add_option("--k-min", o.k_min, "Smallest k");
  trade->add_option("--k-max", o.k_max, "Largest k");
  trade->add_option("--holdout", o.holdout, "Hold-out size");
  trade->add_option("--repeats", o.repeats, "Repeats per cell");
  trade->add_option("--algorithm", o.algorithm, "kmeans | kmeanspp-seeding | kflats");
  trade->add_option("--flat-dim", o.flat_dim, "Flat dimension for kflats");
  trade->add_option("--mnist", o.mnist, "IDX3 image file used as the data pool");
  trade->add_option("--limit", o.limit, "Read at most this many MNIST images");
  trade->add_option("--delta", o.delta, "Confidence parameter for bound rows");

  auto* rates = app.add_subcommand("rates", "Hold-out error along the theoretical k_n schedule");
  add_common(rates, o);
  add_manifold(rates, o);
  add_fit(rates, o);
  rates->add_option("--n", o.sizes, "Training sizes (comma separated)")->delimiter(',');
  rates->add_option("--schedule", o.schedule, "kmeans | kflats");
  rates->add_option("--holdout", o.holdout, "Hold-out size");
  rates->add_option("--repeats", o.repeats, "Repeats per training size");
  rates->add_option("--delta", o.delta, "Confidence parameter for bound rows");

  auto* select = app.add_subcommand("select-k", "Choose k by hold-out validation");
  add_common(select, o);
  add_fit(select, o);
  select->add_option("--data", o.data, "Dataset file");
  select->add_option("--k", o.ks, "k grid (comma separated)")->delimiter(',');
  select->add_option("--k-min", o.k_min, "Smallest k");
  select->add_option("--k-max", o.k_max, "Largest k");
  select->add_option("--validation-fraction", o.validation_fraction, "Fraction of rows held out");
  select->add_option("--algorithm", o.algorithm, "kmeans | kmeanspp-seeding | kflats");
  select->add_option("--flat-dim", o.flat_dim, "Flat dimension for kflats");

  auto* oracle = app.add_subcommand("oracle-check", "Compare a fit against the exact optimum");
  add_common(oracle, o);
  add_fit(oracle, o);
  oracle->add_option("--data", o.data, "Tiny dataset file");
  oracle->add_option("--k", o.k, "Model size");
  oracle->add_option("--family", o.family, "kmeans | kflats")->check(CLI::IsMember({"kmeans", "kflats"}));
  oracle->add_option("--flat-dim", o.flat_dim, "Flat dimension for kflats");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const FormatError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*sample) return cmd_sample(o, out);
    if (*fit_km) return cmd_fit_kmeans(o, out);
    if (*fit_kf) return cmd_fit_kflats(o, out);
    if (*bounds) return cmd_bounds(o, out);
    if (*ex1) return cmd_example1(o, out);
    if (*trade) return cmd_tradeoff(o, out);
    if (*rates) return cmd_rates(o, out);
    if (*select) return cmd_select_k(o, out);
    if (*oracle) return cmd_oracle_check(o, out);
  } catch (const ParameterError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "compute error: " << e.what() << '\n';
    return kCompute;
  }
  err << "usage error: no command\n";
  return kUsage;
}

}  // namespace manquant::cli
