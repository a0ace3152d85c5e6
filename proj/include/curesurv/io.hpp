#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "curesurv/bayes.hpp"
#include "curesurv/km.hpp"
#include "curesurv/likelihood.hpp"

namespace curesurv {

/// Malformed input; the message names the file line when there is one.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row

  /// Column position; throws DataError naming the missing column.
  std::size_t column(const std::string& name) const;
};

/// Header row required. Double-quoted fields may contain commas.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

enum class EngineChoice { Frequentist, Bayesian, Both };

EngineChoice parse_engine(const std::string& name);
std::string engine_name(EngineChoice engine);

struct RunConfig {
  std::filesystem::path input;
  Model model = Model::MOGompertz;
  std::vector<std::string> alpha_covariates;
  std::vector<std::string> beta_covariates;
  std::string time_column = "time";
  std::string event_column = "status";
  std::optional<std::string> stratum_column;
  EngineChoice engine = EngineChoice::Frequentist;

  double prior_variance = 100.0;
  double lambda_shape = 0.01;
  double lambda_rate = 0.01;
  Kernel kernel = Kernel::Langevin;
  int iters = 8000;
  int burnin = 2000;
  std::uint64_t seed = 1;
  double level = 0.95;
  int threads = 0;  // 0 = runtime default
  bool influence = false;
  std::filesystem::path out_dir = "curesurv-out";

  /// Keys mirror the long flag names (alpha-covariates, iters, ...).
  static RunConfig from_json_file(const std::filesystem::path& path);
  void validate() const;
};

SurvivalDataset dataset_from_table(const CsvTable& table, const RunConfig& config);
SurvivalDataset load_dataset(const std::filesystem::path& path, const RunConfig& config);

/// Per-row labels of `column` (as written in the file).
std::vector<std::string> stratum_labels(const CsvTable& table, const std::string& column);

/// time, status, then the covariate columns, all with 17 significant digits.
void write_dataset(std::ostream& out, const SurvivalDataset& data);
void write_dataset(const std::filesystem::path& path, const SurvivalDataset& data);

struct KmSeries {
  std::string stratum;
  std::vector<Eigen::Index> rows;
  KmCurve km;
  std::vector<double> grid;        // shared across strata
  std::vector<double> model_surv;  // empty until a model is attached
};

struct KMOverlay {
  std::vector<KmSeries> strata;
};

/// Product-limit curve per stratum; one stratum "all" when `labels` is empty.
/// Throws when a stratum would be empty.
KMOverlay kaplan_meier(const SurvivalDataset& data, const std::vector<std::string>& labels,
                       int grid_points = 101);

/// Adds the fitted curve of each stratum: the average of S(t | x_i) over the
/// stratum's rows, on the shared grid.
void attach_model_curves(KMOverlay& overlay, const ParamVector& theta, const SurvivalDataset& data);

/// Long format: stratum,series,t,surv (series = km or model).
void write_km_overlay_csv(std::ostream& out, const KMOverlay& overlay);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace curesurv
