#pragma once

#include <cmath>

namespace tdnn {

// Neumaier-compensated accumulator. Keeps weighted sums stable enough that
// reordering the terms moves the result by at most ~1 ulp of the true sum,
// which is what the permutation-invariance contracts rely on.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace tdnn
