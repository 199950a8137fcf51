#pragma once

#include <json.hpp>

#include "manquant/bounds.hpp"
#include "manquant/harness.hpp"
#include "manquant/kflats.hpp"
#include "manquant/kmeans.hpp"

namespace manquant {

using Json = nlohmann::ordered_json;

// MeansModel: {k, ambient_dim, centers (row-major), objective, iterations, seed}.
Json to_json(const MeansModel& model);
MeansModel means_model_from_json(const Json& j);

// FlatsModel: {k, d, ambient_dim, flats: [{offset, basis (column-major),
// degenerate_mask}], objective, iterations, seed}.
Json to_json(const FlatsModel& model);
FlatsModel flats_model_from_json(const Json& j);

// BoundReport with every input echoed.
Json to_json(const BoundReport& report);

Json to_json(const RateFit& fit);
Json to_json(const Example1Result& result);

// Summary of an experiment: rate_fit (or null) and bound_rows. Row-level
// data goes to CSV.
Json summary_json(const ExperimentReport& report);
Json to_json(const RateExperimentResult& result);

}  // namespace manquant
