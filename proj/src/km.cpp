#include "curesurv/km.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace curesurv {

double KmCurve::at(double t) const {
  if (time.empty() || t < time.front()) return 1.0;
  const auto it = std::upper_bound(time.begin(), time.end(), t);
  return surv[static_cast<std::size_t>(std::distance(time.begin(), it)) - 1];
}

KmCurve kaplan_meier(std::span<const double> time, std::span<const int> delta) {
  if (time.size() != delta.size()) throw std::invalid_argument("kaplan_meier: length mismatch");
  if (time.empty()) throw std::invalid_argument("kaplan_meier: empty sample");
  const std::size_t n = time.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });

  KmCurve km;
  km.time.push_back(0.0);
  km.surv.push_back(1.0);
  km.at_risk.push_back(static_cast<int>(n));
  km.events.push_back(0);

  double s = 1.0;
  int risk = static_cast<int>(n);
  std::size_t i = 0;
  while (i < n) {
    const double t = time[order[i]];
    int d = 0, leaving = 0;
    for (; i < n && time[order[i]] == t; ++i, ++leaving) d += delta[order[i]];
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / risk;
      km.time.push_back(t);
      km.surv.push_back(s);
      km.at_risk.push_back(risk);
      km.events.push_back(d);
    } else if (i == n) {
      // censored tail: extend the last step to the largest time
      km.time.push_back(t);
      km.surv.push_back(s);
      km.at_risk.push_back(risk);
      km.events.push_back(0);
    }
    risk -= leaving;
  }
  return km;
}

}  // namespace curesurv
