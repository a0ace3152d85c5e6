#pragma once

#include <json.hpp>

#include <iosfwd>

#include "curesurv/io.hpp"

namespace curesurv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitWarning = 2;

/// Fits the configured model (and the nested base model for MO families),
/// writes report.json, residuals.csv, influence.csv, km_overlay.csv and
/// summary.txt into config.out_dir. Returns 0, 2 (convergence warning) or 1.
/// Errors are reported on `log` and, when possible, in report.json.
int run_fit(const RunConfig& config, std::ostream& log);

/// Report with every top-level key present and null placeholders.
nlohmann::json empty_report();

}  // namespace curesurv
