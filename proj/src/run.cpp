#include "curesurv/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "curesurv/bayes.hpp"
#include "curesurv/diagnostics.hpp"
#include "curesurv/mle.hpp"
#include "curesurv/selection.hpp"

namespace curesurv {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

json cures_json(const std::vector<PatternCure>& cures) {
  json a = json::array();
  for (const auto& c : cures)
    a.push_back({{"x1", vector_json(c.x1)}, {"x2", vector_json(c.x2)}, {"count", c.count}, {"p", c.cure.p},
                 {"p0", c.cure.p0}});
  return a;
}

json frequentist_json(const FitResult& fit, const std::optional<FitResult>& base,
                      const std::optional<LrTestResult>& lr) {
  json j;
  j["converged"] = fit.converged;
  j["loglik"] = fit.loglik_max;
  j["level"] = fit.level;
  const auto names = fit.spec.param_names();
  const Eigen::VectorXd est = fit.theta_hat.natural();
  json params = json::array();
  for (std::size_t s = 0; s < names.size(); ++s) {
    const auto k = static_cast<Eigen::Index>(s);
    params.push_back({{"name", names[s]},
                      {"estimate", est[k]},
                      {"se", fit.std_errors[k]},
                      {"ci_lo", fit.ci[s].first},
                      {"ci_hi", fit.ci[s].second}});
  }
  j["params"] = params;
  j["covariance"] = fit.covariance ? matrix_json(*fit.covariance) : json(nullptr);
  j["pseudo_covariance"] = fit.pseudo_covariance ? matrix_json(*fit.pseudo_covariance) : json(nullptr);
  const CriteriaReport cr = criteria_report(&fit, nullptr, SurvivalDataset{}, fit.spec);
  j["criteria"] = {{"aicc", opt(cr.aicc)}, {"bic", opt(cr.bic)}, {"hqic", opt(cr.hqic)}, {"caic", opt(cr.caic)}};
  j["cure_fractions"] = cures_json(fit.cure_estimates);
  if (base && lr) {
    j["lr_test"] = {{"restricted_model", model_name(base->spec.model)},
                    {"restricted_loglik", base->loglik_max},
                    {"statistic", lr->statistic},
                    {"df", lr->df},
                    {"p_value", lr->p_value},
                    {"warnings", lr->warnings}};
  } else {
    j["lr_test"] = nullptr;
  }
  j["clamped_rows"] = fit.clamped_rows;
  j["iterations"] = fit.iterations;
  j["starts_tried"] = fit.starts_tried;
  j["grad_norm"] = fit.grad_norm;
  j["warnings"] = fit.warnings;
  return j;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

json empty_report() {
  json r;
  r["model"] = nullptr;
  r["engine"] = nullptr;
  r["data"] = nullptr;
  r["frequentist"] = nullptr;
  r["bayesian"] = nullptr;
  r["influence"] = nullptr;
  r["residuals"] = nullptr;
  r["km_overlay"] = nullptr;
  r["warnings"] = json::array();
  r["error"] = nullptr;
  r["exit_code"] = nullptr;
  return r;
}

int run_fit(const RunConfig& config, std::ostream& log) {
  json report = empty_report();
  int exit_code = kExitOk;
  std::filesystem::path out_dir = config.out_dir;
  auto write_report = [&] {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream out(out_dir / "report.json");
    if (out) out << report.dump(2) << '\n';
  };

  try {
    config.validate();
#ifdef _OPENMP
    if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
    const CsvTable table = read_csv(config.input);
    const SurvivalDataset data = dataset_from_table(table, config);
    const std::vector<std::string> labels =
        config.stratum_column ? stratum_labels(table, *config.stratum_column) : std::vector<std::string>{};
    std::filesystem::create_directories(out_dir);

    const double cens = 100.0 * data.censoring_fraction();
    log << "loaded " << data.size() << " rows from " << config.input.string() << ", censoring "
        << fmt("%.4f", cens) << "%\n";

    const ModelSpec spec = ModelSpec::for_design(config.model, data.x);
    report["model"] = model_name(config.model);
    report["engine"] = engine_name(config.engine);
    report["data"] = {{"path", config.input.string()},
                      {"n", data.size()},
                      {"censoring_pct", cens},
                      {"time_column", config.time_column},
                      {"event_column", config.event_column},
                      {"alpha_covariates", config.alpha_covariates},
                      {"beta_covariates", config.beta_covariates}};

    std::ostringstream summary;
    summary << "model " << model_name(config.model) << ", n = " << data.size() << ", censoring "
            << fmt("%.4f", cens) << "%\n";

    std::optional<FitResult> fit;
    if (config.engine != EngineChoice::Bayesian) {
      MleOptions mopts;
      mopts.level = config.level;
      mopts.seed = config.seed;
      fit = fit_mle(data, spec, std::nullopt, mopts);
      std::optional<FitResult> base;
      std::optional<LrTestResult> lr;
      if (spec.has_lambda()) {
        base = fit_mle(data, spec.base(), std::nullopt, mopts);
        if (std::isfinite(base->loglik_max) && std::isfinite(fit->loglik_max)) lr = lr_test(*base, *fit);
      }
      report["frequentist"] = frequentist_json(*fit, base, lr);
      if (!fit->converged) exit_code = kExitWarning;

      summary << "\nmaximum likelihood (" << (fit->converged ? "converged" : "NOT converged")
              << "), log-likelihood " << fmt("%.4f", fit->loglik_max) << "\n";
      summary << "  param        estimate          se                 interval\n";
      const auto names = spec.param_names();
      const Eigen::VectorXd est = fit->theta_hat.natural();
      for (std::size_t s = 0; s < names.size(); ++s) {
        const auto k = static_cast<Eigen::Index>(s);
        summary << "  " << names[s] << std::string(10 - std::min<std::size_t>(names[s].size(), 9), ' ')
                << fmt("%12.4f", est[k]) << fmt("%12.4f", fit->std_errors[k]) << "    ("
                << fmt("%.4f", fit->ci[s].first) << " ; " << fmt("%.4f", fit->ci[s].second) << ")\n";
      }
      const auto& crit = report["frequentist"]["criteria"];
      if (!crit["aicc"].is_null())
        summary << "  AICc " << fmt("%.2f", crit["aicc"].get<double>()) << "  BIC " << fmt("%.2f", crit["bic"].get<double>())
                << "  HQIC " << fmt("%.2f", crit["hqic"].get<double>()) << "  CAIC "
                << fmt("%.2f", crit["caic"].get<double>()) << "\n";
      if (lr)
        summary << "  LR test vs " << model_name(base->spec.model) << ": statistic " << fmt("%.4f", lr->statistic)
                << ", df " << lr->df << ", p " << fmt("%.4g", lr->p_value) << "\n";
      for (const auto& c : fit->cure_estimates)
        summary << "  cure fraction at pattern " << c.count << " rows: p = " << fmt("%.4f", c.cure.p)
                << " (p0 = " << fmt("%.5f", c.cure.p0) << ")\n";
      for (const auto& w : fit->warnings) summary << "  warning: " << w << "\n";
    }

    std::optional<PosteriorSample> sample;
    std::optional<ParamVector> post_mean;
    if (config.engine != EngineChoice::Frequentist) {
      PriorSpec prior = PriorSpec::vague(spec, config.prior_variance);
      prior.lambda_shape = config.lambda_shape;
      prior.lambda_rate = config.lambda_rate;
      SamplerOptions so;
      so.n_iter = config.iters;
      so.burn_in = config.burnin;
      so.seed = config.seed;
      so.kernel = config.kernel;
      sample = sample_posterior(data, spec, prior, so);
      post_mean = posterior_mean(*sample, spec);
      if (!sample->passed_convergence_gate) exit_code = kExitWarning;

      json b;
      b["kernel"] = kernel_name(config.kernel);
      b["n_iter"] = config.iters;
      b["burn_in"] = config.burnin;
      b["seed"] = config.seed;
      b["acceptance_rate"] = sample->acceptance_rate;
      b["passed_convergence_gate"] = sample->passed_convergence_gate;
      b["level"] = config.level;
      json params = json::array();
      summary << "\nposterior (" << sample->size() << " draws, acceptance " << fmt("%.3f", sample->acceptance_rate)
              << (sample->passed_convergence_gate ? ", gate passed" : ", gate FAILED") << ")\n";
      summary << "  param          mean          sd                 interval      ess   rhat\n";
      if (sample->size() >= kMinSummaryDraws) {
        const auto summ = posterior_summary(*sample, config.level);
        for (std::size_t s = 0; s < summ.size(); ++s) {
          const auto k = static_cast<Eigen::Index>(s);
          params.push_back({{"name", summ[s].name},
                            {"mean", summ[s].mean},
                            {"sd", summ[s].sd},
                            {"lo", summ[s].lo},
                            {"hi", summ[s].hi},
                            {"ess", sample->ess[k]},
                            {"rhat", sample->rhat[k]}});
          summary << "  " << summ[s].name << std::string(10 - std::min<std::size_t>(summ[s].name.size(), 9), ' ')
                  << fmt("%12.4f", summ[s].mean) << fmt("%12.4f", summ[s].sd) << "    (" << fmt("%.4f", summ[s].lo)
                  << " ; " << fmt("%.4f", summ[s].hi) << ")" << fmt("%9.0f", sample->ess[k])
                  << fmt("%7.3f", sample->rhat[k]) << "\n";
        }
        const CriteriaReport cr = criteria_report(nullptr, &*sample, data, spec);
        b["criteria"] = {{"lpml", opt(cr.lpml)},
                         {"minus2_lpml", opt(cr.minus2_lpml())},
                         {"dic", opt(cr.dic)},
                         {"waic", opt(cr.waic)},
                         {"minus2_waic", opt(cr.minus2_waic())}};
        summary << "  -2 LPML " << fmt("%.2f", *cr.minus2_lpml()) << "  -2 WAIC " << fmt("%.2f", *cr.minus2_waic())
                << "  DIC " << fmt("%.2f", *cr.dic) << "\n";
      } else {
        b["criteria"] = nullptr;
        sample->warnings.emplace_back("fewer than 1000 retained draws: summaries and criteria skipped");
      }
      b["params"] = params;
      b["cure_fractions"] = cures_json(pattern_cures(*post_mean, data.x));
      b["warnings"] = sample->warnings;
      for (const auto& w : sample->warnings) summary << "  warning: " << w << "\n";
      report["bayesian"] = b;
    }

    const ParamVector& theta = fit ? fit->theta_hat : *post_mean;
    {
      const ResidualReport rr = residuals(theta, data);
      std::ofstream out(out_dir / "residuals.csv");
      out << "index,time,status,martingale,deviance\n";
      for (Eigen::Index i = 0; i < data.size(); ++i)
        out << (i + 1) << ',' << format_double(data.t[i]) << ',' << data.delta[static_cast<std::size_t>(i)] << ','
            << format_double(rr.martingale[i]) << ',' << format_double(rr.deviance[i]) << '\n';
      report["residuals"] = {{"engine", fit ? "frequentist" : "bayesian"}, {"file", "residuals.csv"}};
    }

    {
      std::ofstream out(out_dir / "influence.csv");
      out << "index,gd,ld,flagged\n";
      if (config.influence) {
        if (fit && fit->converged && fit->covariance_internal) {
          const InfluenceReport inf = case_deletion_influence(*fit, data);
          std::vector<Eigen::Index> flagged1, failed1;
          for (Eigen::Index i : inf.flagged) flagged1.push_back(i + 1);
          for (Eigen::Index i : inf.failed) failed1.push_back(i + 1);
          for (Eigen::Index i = 0; i < data.size(); ++i) {
            const bool f = std::binary_search(inf.flagged.begin(), inf.flagged.end(), i);
            out << (i + 1) << ',' << format_double(inf.gd[i]) << ',' << format_double(inf.ld[i]) << ',' << (f ? 1 : 0)
                << '\n';
          }
          report["influence"] = {{"gd_threshold", inf.gd_threshold},
                                 {"ld_threshold", inf.ld_threshold},
                                 {"flagged", flagged1},
                                 {"failed", failed1},
                                 {"file", "influence.csv"}};
          summary << "\ninfluential cases (1-based):";
          for (auto i : flagged1) summary << ' ' << i;
          summary << "\n";
        } else {
          report["warnings"].push_back("influence requested but no converged frequentist fit with covariance");
        }
      }
    }

    {
      KMOverlay ov = kaplan_meier(data, labels);
      attach_model_curves(ov, theta, data);
      std::ofstream out(out_dir / "km_overlay.csv");
      write_km_overlay_csv(out, ov);
      report["km_overlay"] = {{"file", "km_overlay.csv"}, {"strata", ov.strata.size()}};
    }

    report["exit_code"] = exit_code;
    write_report();
    std::ofstream(out_dir / "summary.txt") << summary.str();
    log << summary.str();
    return exit_code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    report["error"] = e.what();
    report["exit_code"] = kExitError;
    if (!config.out_dir.empty()) write_report();
    return kExitError;
  }
}

}  // namespace curesurv
