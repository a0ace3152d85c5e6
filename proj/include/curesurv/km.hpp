#pragma once

#include <span>
#include <vector>

namespace curesurv {

/// Product-limit estimate. Points are (0, 1) followed by one point per
/// distinct event time, plus the last observed time when it is censored.
struct KmCurve {
  std::vector<double> time;
  std::vector<double> surv;
  std::vector<int> at_risk;
  std::vector<int> events;

  /// Right-continuous step-function value at t.
  double at(double t) const;
};

KmCurve kaplan_meier(std::span<const double> time, std::span<const int> delta);

}  // namespace curesurv
