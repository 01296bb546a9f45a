#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

namespace specuq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum acc;
  for (double v : values) acc += v;
  return acc.value();
}

inline double compensated_mean(std::span<const double> values) noexcept {
  return values.empty() ? 0.0 : compensated_sum(values) / static_cast<double>(values.size());
}

}  // namespace specuq
