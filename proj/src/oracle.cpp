#include "manquant/oracle.hpp"

#include <limits>
#include <string>

#include "manquant/error.hpp"
#include "manquant/kflats.hpp"
#include "manquant/numeric.hpp"

namespace manquant {

double partition_count(std::size_t n, std::size_t k) {
  // stirling[j] holds S(i, j) for the current i.
  std::vector<double> stirling(k + 1, 0.0);
  stirling[0] = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = std::min(i, k); j >= 1; --j) {
      stirling[j] = static_cast<double>(j) * stirling[j] + stirling[j - 1];
    }
    stirling[0] = 0.0;
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= k; ++j) total += stirling[j];
  return total;
}

void TinyInstance::validate() const {
  const std::size_t n = data.size();
  const double cost = partition_count(n, k);
  const std::string estimate = " (enumeration cost " + std::to_string(static_cast<long long>(cost)) +
                               " partitions)";
  if (k < 1) throw ParameterError("oracle needs k >= 1");
  if (n > kMaxPoints) throw ComputeError("oracle refuses n = " + std::to_string(n) + " > 12" + estimate);
  if (k > kMaxK) throw ComputeError("oracle refuses k = " + std::to_string(k) + " > 4" + estimate);
  if (d > kMaxFlatDim) throw ComputeError("oracle refuses flat dimension > 2");
  if (cost >= kMaxPartitions) throw ComputeError("oracle refuses instance" + estimate);
}

namespace {

// Visits every restricted-growth string a[0..n) with a[0] = 0,
// a[i] <= 1 + max(a[0..i)) and max < k, i.e. each set partition into at most
// k blocks exactly once.
template <typename Visit>
void for_each_partition(std::size_t n, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> a(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  while (true) {
    visit(a, prefix_max[n - 1] + 1);
    // Rightmost position that can still be incremented.
    std::size_t i = n - 1;
    while (i > 0 && (a[i] > prefix_max[i - 1] || a[i] + 1 >= k)) --i;
    if (i == 0) return;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      prefix_max[j] = prefix_max[j - 1];
    }
  }
}

template <typename GroupCost>
OracleResult enumerate(const TinyInstance& inst, GroupCost&& group_cost) {
  inst.validate();
  const std::size_t n = inst.data.size();
  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::size_t>> groups;
  for_each_partition(n, inst.k, [&](const std::vector<std::size_t>& labels, std::size_t blocks) {
    groups.assign(blocks, {});
    for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);
    CompensatedSum total;
    for (const auto& g : groups) total.add(group_cost(g));
    const double objective = total.value() / static_cast<double>(n);
    if (objective < best.objective) {
      best.objective = objective;
      best.partition = labels;
    }
  });
  return best;
}

Matrix rows_of(const Dataset& data, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.ambient_dim()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
  return out;
}

}  // namespace

OracleResult global_kmeans(const TinyInstance& inst) {
  return enumerate(inst, [&](const std::vector<std::size_t>& group) {
    const Matrix pts = rows_of(inst.data, group);
    const Eigen::RowVectorXd mean = pts.colwise().mean();
    CompensatedSum s;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) s.add((pts.row(i) - mean).squaredNorm());
    return s.value();
  });
}

OracleResult global_kflats(const TinyInstance& inst) {
  return enumerate(inst, [&](const std::vector<std::size_t>& group) {
    const Matrix pts = rows_of(inst.data, group);
    const Flat flat = refit_cell(pts, inst.d);
    CompensatedSum s;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) s.add(flat_distance_sq(pts.row(i).transpose(), flat));
    return s.value();
  });
}

}  // namespace manquant
