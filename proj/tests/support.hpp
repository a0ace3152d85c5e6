// helpers shared by the unit tests
#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>

#include "curesurv/likelihood.hpp"
#include "curesurv/simulation.hpp"

namespace testing {

// integral of f over (0, inf)
inline double mass(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

inline curesurv::SurvivalDataset synthetic(curesurv::Model model, Eigen::Index n, std::uint64_t rep = 0,
                                           std::uint64_t seed = 777) {
  return curesurv::generate_dataset(curesurv::SimConfig::reference_design(model, n, 1, seed), rep);
}

}  // namespace testing
