#pragma once

#include <cmath>
#include <cstddef>

namespace manquant {

// Neumaier-compensated running sum. Objectives and hold-out means go
// through this so reported values do not depend on accumulation order at
// the 1e-12 level.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

template <typename Range>
double compensated_mean(const Range& values) {
  CompensatedSum acc;
  std::size_t count = 0;
  for (const double v : values) {
    acc.add(v);
    ++count;
  }
  return count == 0 ? 0.0 : acc.value() / static_cast<double>(count);
}

}  // namespace manquant
