#include "curesurv/selection.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "curesurv/special.hpp"

namespace curesurv {

namespace {

void require_draws(const PosteriorSample& sample, const char* who) {
  if (sample.size() < kMinSummaryDraws)
    throw std::invalid_argument(std::string(who) + ": need at least " + std::to_string(kMinSummaryDraws) +
                                " posterior draws");
}

// Rows (draws) whose contributions are all finite.
std::vector<Eigen::Index> finite_rows(const Eigen::MatrixXd& m) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index s = 0; s < m.rows(); ++s)
    if (m.row(s).allFinite()) rows.push_back(s);
  return rows;
}

}  // namespace

InfoCriteria info_criteria(double loglik_max, std::size_t k, std::size_t n) {
  if (!(n > k + 1)) throw std::invalid_argument("info_criteria: need n > k + 1");
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  const double dev = -2.0 * loglik_max;
  InfoCriteria ic;
  ic.aicc = dev + 2.0 * kk + 2.0 * kk * (kk + 1.0) / (nn - kk - 1.0);
  ic.bic = dev + kk * std::log(nn);
  ic.hqic = dev + 2.0 * kk * std::log(std::log(nn));
  ic.caic = dev + kk * (std::log(nn) + 1.0);
  return ic;
}

Eigen::MatrixXd contribution_matrix(const PosteriorSample& sample, const SurvivalDataset& data,
                                    const ModelSpec& spec) {
  Eigen::MatrixXd m(sample.size(), data.size());
  for (Eigen::Index s = 0; s < sample.size(); ++s)
    m.row(s) = log_contributions(ParamVector::from_natural(spec, sample.draws.row(s).transpose()), data).transpose();
  return m;
}

CpoResult cpo_lpml(const Eigen::MatrixXd& log_contrib) {
  if (log_contrib.rows() == 0) throw std::invalid_argument("cpo_lpml: no draws");
  const double log_s = std::log(static_cast<double>(log_contrib.rows()));
  CpoResult out;
  out.log_cpo.resize(log_contrib.cols());
  std::vector<double> neg(static_cast<std::size_t>(log_contrib.rows()));
  std::vector<double> terms;
  for (Eigen::Index i = 0; i < log_contrib.cols(); ++i) {
    for (Eigen::Index s = 0; s < log_contrib.rows(); ++s) neg[static_cast<std::size_t>(s)] = -log_contrib(s, i);
    // harmonic mean of the contributions, in log space
    out.log_cpo[i] = -(log_sum_exp(neg) - log_s);
    if (std::isfinite(out.log_cpo[i])) terms.push_back(out.log_cpo[i]);
    else out.flagged.push_back(i);
  }
  out.lpml = pairwise_sum(terms);
  return out;
}

DicResult dic_from_deviance(std::span<const double> deviance) {
  std::vector<double> d;
  DicResult out;
  for (double v : deviance) {
    if (std::isfinite(v)) d.push_back(v);
    else ++out.excluded;
  }
  if (d.empty()) throw std::invalid_argument("dic: no finite deviance draws");
  const double n = static_cast<double>(d.size());
  // shifted by the first draw: exact for constant chains
  const double shift = d.front();
  std::vector<double> centred(d.size());
  for (std::size_t s = 0; s < d.size(); ++s) centred[s] = d[s] - shift;
  out.mean_deviance = shift + pairwise_sum(centred) / n;
  double ss = 0.0;
  for (double v : d) ss += (v - out.mean_deviance) * (v - out.mean_deviance);
  out.var_deviance = d.size() > 1 ? ss / (n - 1.0) : 0.0;
  out.dic = out.mean_deviance + 0.5 * out.var_deviance;
  return out;
}

DicResult dic(const Eigen::MatrixXd& log_contrib) {
  std::vector<double> dev(static_cast<std::size_t>(log_contrib.rows()));
  for (Eigen::Index s = 0; s < log_contrib.rows(); ++s) {
    const Eigen::VectorXd row = log_contrib.row(s).transpose();
    dev[static_cast<std::size_t>(s)] =
        row.allFinite() ? -2.0 * pairwise_sum(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())))
                        : std::numeric_limits<double>::quiet_NaN();
  }
  return dic_from_deviance(dev);
}

WaicResult waic(const Eigen::MatrixXd& log_contrib) {
  const std::vector<Eigen::Index> rows = finite_rows(log_contrib);
  if (rows.empty()) throw std::invalid_argument("waic: no finite draws");
  const Eigen::MatrixXd m = log_contrib(rows, Eigen::all);
  WaicResult out;
  out.excluded = log_contrib.rows() - m.rows();
  const double S = static_cast<double>(m.rows());
  const double log_s = std::log(S);
  std::vector<double> lpd(static_cast<std::size_t>(m.cols())), pd(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    const Eigen::VectorXd c = m.col(i);
    const double l = log_sum_exp(std::span<const double>(c.data(), static_cast<std::size_t>(c.size()))) - log_s;
    lpd[static_cast<std::size_t>(i)] = l;
    pd[static_cast<std::size_t>(i)] = 2.0 * (l - c.sum() / S);
  }
  out.lpd = pairwise_sum(lpd);
  out.pd = pairwise_sum(pd);
  out.waic = out.lpd - out.pd;
  return out;
}

CpoResult cpo_lpml(const PosteriorSample& sample, const SurvivalDataset& data, const ModelSpec& spec) {
  require_draws(sample, "cpo_lpml");
  return cpo_lpml(contribution_matrix(sample, data, spec));
}

DicResult dic(const PosteriorSample& sample, const SurvivalDataset& data, const ModelSpec& spec) {
  require_draws(sample, "dic");
  return dic(contribution_matrix(sample, data, spec));
}

WaicResult waic(const PosteriorSample& sample, const SurvivalDataset& data, const ModelSpec& spec) {
  require_draws(sample, "waic");
  return waic(contribution_matrix(sample, data, spec));
}

std::optional<double> CriteriaReport::minus2_lpml() const {
  if (!lpml) return std::nullopt;
  return -2.0 * *lpml;
}

std::optional<double> CriteriaReport::minus2_waic() const {
  if (!waic) return std::nullopt;
  return -2.0 * *waic;
}

CriteriaReport criteria_report(const FitResult* fit, const PosteriorSample* sample,
                               const SurvivalDataset& data, const ModelSpec& spec) {
  CriteriaReport r;
  if (fit && std::isfinite(fit->loglik_max)) {
    const InfoCriteria ic = info_criteria(fit->loglik_max, static_cast<std::size_t>(fit->n_params()),
                                          static_cast<std::size_t>(fit->n_obs));
    r.aicc = ic.aicc;
    r.bic = ic.bic;
    r.hqic = ic.hqic;
    r.caic = ic.caic;
  }
  if (sample) {
    require_draws(*sample, "criteria_report");
    const Eigen::MatrixXd m = contribution_matrix(*sample, data, spec);
    r.lpml = cpo_lpml(m).lpml;
    r.dic = dic(m).dic;
    r.waic = waic(m).waic;
  }
  return r;
}

}  // namespace curesurv
