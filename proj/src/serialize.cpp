#include "manquant/serialize.hpp"

#include <string>

#include "manquant/error.hpp"

namespace manquant {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("model JSON lacks '") + key + "'", 0);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model JSON field '") + key + "': " + e.what(), 0);
  }
}

const char* family_name(ModelFamily family) {
  return family == ModelFamily::KMeans ? "kmeans" : "kflats";
}

}  // namespace

Json to_json(const MeansModel& model) {
  Json centers = Json::array();
  for (Eigen::Index i = 0; i < model.centers.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.centers.cols(); ++j) centers.push_back(model.centers(i, j));
  }
  Json out;
  out["k"] = model.k();
  out["ambient_dim"] = model.ambient_dim();
  out["centers"] = std::move(centers);
  out["objective"] = model.objective;
  out["iterations"] = model.iterations;
  out["seed"] = model.seed.value;
  return out;
}

MeansModel means_model_from_json(const Json& j) {
  const auto k = field<std::size_t>(j, "k");
  const auto dim = field<std::size_t>(j, "ambient_dim");
  const auto values = field<std::vector<double>>(j, "centers");
  if (values.size() != k * dim) throw FormatError("model JSON centers length does not equal k * ambient_dim", 0);
  MeansModel model;
  model.centers.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      model.centers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values[i * dim + c];
    }
  }
  model.objective = field<double>(j, "objective");
  model.iterations = field<std::size_t>(j, "iterations");
  model.seed = RngSeed{field<std::uint64_t>(j, "seed")};
  return model;
}

Json to_json(const FlatsModel& model) {
  Json flats = Json::array();
  for (const auto& f : model.flats) {
    Json basis = Json::array();
    for (Eigen::Index c = 0; c < f.basis.cols(); ++c) {
      for (Eigen::Index r = 0; r < f.basis.rows(); ++r) basis.push_back(f.basis(r, c));
    }
    Json offset = Json::array();
    for (Eigen::Index r = 0; r < f.offset.size(); ++r) offset.push_back(f.offset(r));
    Json mask = Json::array();
    for (const bool b : f.degenerate) mask.push_back(b);
    flats.push_back({{"offset", std::move(offset)}, {"basis", std::move(basis)}, {"degenerate_mask", std::move(mask)}});
  }
  Json out;
  out["k"] = model.k();
  out["d"] = model.d;
  out["ambient_dim"] = model.ambient_dim();
  out["flats"] = std::move(flats);
  out["objective"] = model.objective;
  out["iterations"] = model.iterations;
  out["seed"] = model.seed.value;
  return out;
}

FlatsModel flats_model_from_json(const Json& j) {
  FlatsModel model;
  const auto k = field<std::size_t>(j, "k");
  model.d = field<std::size_t>(j, "d");
  const auto dim = field<std::size_t>(j, "ambient_dim");
  const Json flats = field<Json>(j, "flats");
  if (!flats.is_array() || flats.size() != k) throw FormatError("model JSON flats length does not equal k", 0);
  for (const auto& jf : flats) {
    const auto offset = field<std::vector<double>>(jf, "offset");
    const auto basis = field<std::vector<double>>(jf, "basis");
    const auto mask = field<std::vector<bool>>(jf, "degenerate_mask");
    if (offset.size() != dim || basis.size() != dim * model.d || mask.size() != model.d) {
      throw FormatError("model JSON flat has inconsistent sizes", 0);
    }
    Flat f;
    f.offset = Eigen::Map<const Vector>(offset.data(), static_cast<Eigen::Index>(dim));
    f.basis = Eigen::Map<const Eigen::MatrixXd>(basis.data(), static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(model.d));
    f.degenerate = mask;
    model.flats.push_back(std::move(f));
  }
  model.objective = field<double>(j, "objective");
  model.iterations = field<std::size_t>(j, "iterations");
  model.seed = RngSeed{field<std::uint64_t>(j, "seed")};
  return model;
}

Json to_json(const BoundReport& report) {
  const BoundInputs& in = report.inputs;
  Json inputs;
  inputs["n"] = in.n;
  inputs["k"] = in.k;
  inputs["d"] = in.d;
  inputs["delta"] = in.delta;
  inputs["density_norm"] = in.density_norm;
  inputs["curvature"] = in.curvature;
  inputs["quantization_constant"] = in.quantization_constant;
  Json out;
  out["family"] = family_name(report.family);
  out["inputs"] = std::move(inputs);
  out["empirical"] = report.empirical;
  out["holdout"] = report.holdout;
  out["measured_gap"] = report.measured_gap;
  out["statistical"] = report.statistical;
  out["approximation"] = report.approximation;
  out["total"] = report.total;
  out["k_n"] = report.k_n;
  return out;
}

Json to_json(const RateFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}, {"degenerate", fit.degenerate}};
}

Json to_json(const Example1Result& result) {
  return {{"e_k1", result.e_k1},
          {"e_k2", result.e_k2},
          {"inner_product", result.inner_product},
          {"k1_better", result.e_k1 < result.e_k2}};
}

Json summary_json(const ExperimentReport& report) {
  Json out;
  out["rows"] = report.rows.size();
  out["rate_fit"] = report.rate_fit ? to_json(*report.rate_fit) : Json(nullptr);
  Json bounds = Json::array();
  for (const auto& b : report.bound_rows) bounds.push_back(to_json(b));
  out["bound_rows"] = std::move(bounds);
  return out;
}

Json to_json(const RateExperimentResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"n", r.n}, {"k_n", r.k_n}, {"k", r.k}, {"mean_holdout", r.mean_holdout}});
  }
  Json out = summary_json(result.report);
  out["schedule_rows"] = std::move(rows);
  return out;
}

}  // namespace manquant
