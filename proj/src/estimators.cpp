#include "rmstpo/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "rmstpo/errors.hpp"
#include "rmstpo/stats.hpp"

namespace rmstpo {

namespace {

void require_two_arms(const PseudoDataset& po) {
  if (po.arm_count(1) < 2 || po.arm_count(0) < 2) {
    throw EstimationError("estimator needs at least 2 subjects per arm");
  }
}

EstimateReport make_report(Method method, const PseudoDataset& po,
                           double estimate, double se) {
  EstimateReport r;
  r.method = method;
  r.tau = po.tau;
  r.estimate = estimate;
  r.se = se;
  r.ci_low = estimate - 1.96 * se;
  r.ci_high = estimate + 1.96 * se;
  r.p_value = wald_p_value(estimate, se);
  r.n1 = po.arm_count(1);
  r.n0 = po.arm_count(0);
  return r;
}

// Outcome design: treatment indicator first, then the covariates.
BaseDesign outcome_design(const PseudoDataset& po) {
  const Eigen::Index n = static_cast<Eigen::Index>(po.rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(po.covariate_names.size());
  BaseDesign design;
  design.columns.resize(n, d + 1);
  design.names.push_back("arm");
  design.treatment_column = 0;
  for (const auto& name : po.covariate_names) design.names.push_back(name);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PseudoRow& row = po.rows[static_cast<std::size_t>(i)];
    design.columns(i, 0) = row.arm;
    for (Eigen::Index j = 0; j < d; ++j) {
      design.columns(i, j + 1) = row.covariates[static_cast<std::size_t>(j)];
    }
  }
  return design;
}

BaseDesign propensity_design(const PseudoDataset& po) {
  const Eigen::Index n = static_cast<Eigen::Index>(po.rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(po.covariate_names.size());
  BaseDesign design;
  design.columns.resize(n, d);
  design.names = po.covariate_names;
  for (Eigen::Index i = 0; i < n; ++i) {
    const PseudoRow& row = po.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      design.columns(i, j) = row.covariates[static_cast<std::size_t>(j)];
    }
  }
  return design;
}

Eigen::VectorXd pseudo_vector(const PseudoDataset& po) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(po.rows.size()));
  for (std::size_t i = 0; i < po.rows.size(); ++i) {
    p[static_cast<Eigen::Index>(i)] = po.rows[i].pseudo_value;
  }
  return p;
}

std::vector<int> arm_vector(const PseudoDataset& po) {
  std::vector<int> a(po.rows.size());
  for (std::size_t i = 0; i < po.rows.size(); ++i) a[i] = po.rows[i].arm;
  return a;
}

struct FittedNuisances {
  std::vector<double> g;   // truncated propensity
  std::vector<double> q1;  // outcome predictions at arm = 1
  std::vector<double> q0;  // outcome predictions at arm = 0
  Diagnostics diagnostics;
};

void record_weights(const EnsembleModel& model,
                    std::map<std::string, double>& out) {
  for (std::size_t l = 0; l < model.library.size(); ++l) {
    out[model.library[l].name()] =
        model.weights[static_cast<Eigen::Index>(l)];
  }
}

FittedNuisances fit_nuisances(const PseudoDataset& po,
                              const Eigen::VectorXd& response,
                              const NuisanceConfig& config) {
  const std::size_t n = po.rows.size();
  const std::vector<int> arm = arm_vector(po);
  const FoldPlan folds =
      make_stratified_folds(arm, config.folds, config.seed);

  FittedNuisances fit;

  // Propensity model on the covariates alone.
  const BaseDesign gd = propensity_design(po);
  Eigen::VectorXd a(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) a[static_cast<Eigen::Index>(i)] = arm[i];
  const EnsembleModel gmodel =
      fit_super_learner(gd, a, config.propensity_learners, folds,
                        Family::binomial_logit);
  const Eigen::VectorXd graw = predict(gmodel, gd);
  fit.g.resize(n);
  int truncated = 0, low = 0, high = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = graw[static_cast<Eigen::Index>(i)];
    if (gi < config.g_lower) ++low;
    if (gi > config.g_upper) ++high;
    fit.g[i] = std::clamp(gi, config.g_lower, config.g_upper);
    if (fit.g[i] != gi) ++truncated;
  }
  fit.diagnostics.g_min = graw.minCoeff();
  fit.diagnostics.g_max = graw.maxCoeff();
  fit.diagnostics.g_truncated = truncated;
  if (low == static_cast<int>(n)) {
    fit.diagnostics.notes.push_back("all propensities truncated at the lower bound");
  }
  if (high == static_cast<int>(n)) {
    fit.diagnostics.notes.push_back("all propensities truncated at the upper bound");
  }
  record_weights(gmodel, fit.diagnostics.propensity_weights);

  // Outcome model on (arm, X), then counterfactual predictions per arm.
  const BaseDesign qd = outcome_design(po);
  const EnsembleModel qmodel = fit_super_learner(
      qd, response, config.outcome_learners, folds, Family::gaussian_identity);
  BaseDesign qd1 = qd, qd0 = qd;
  qd1.columns.col(0).setOnes();
  qd0.columns.col(0).setZero();
  const Eigen::VectorXd q1 = predict(qmodel, qd1);
  const Eigen::VectorXd q0 = predict(qmodel, qd0);
  fit.q1.assign(q1.data(), q1.data() + q1.size());
  fit.q0.assign(q0.data(), q0.data() + q0.size());
  record_weights(qmodel, fit.diagnostics.outcome_weights);
  for (const auto& note : gmodel.dropped) {
    fit.diagnostics.notes.push_back("propensity learner dropped: " + note);
  }
  for (const auto& note : qmodel.dropped) {
    fit.diagnostics.notes.push_back("outcome learner dropped: " + note);
  }
  return fit;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::unadjusted: return "unadjusted";
    case Method::gee: return "gee";
    case Method::aiptw: return "aiptw";
    case Method::tmle: return "tmle";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "unadjusted") return Method::unadjusted;
  if (name == "gee") return Method::gee;
  if (name == "aiptw") return Method::aiptw;
  if (name == "tmle") return Method::tmle;
  throw ValidationError("unknown method: '" + name + "'");
}

nlohmann::ordered_json EstimateReport::to_json() const {
  nlohmann::ordered_json diag;
  if (diagnostics.g_min) diag["g_min"] = *diagnostics.g_min;
  if (diagnostics.g_max) diag["g_max"] = *diagnostics.g_max;
  if (diagnostics.g_truncated) diag["g_truncated"] = *diagnostics.g_truncated;
  if (diagnostics.epsilon) diag["epsilon"] = *diagnostics.epsilon;
  if (diagnostics.eif_score_mean) {
    diag["eif_score_mean"] = *diagnostics.eif_score_mean;
  }
  if (!diagnostics.outcome_weights.empty()) {
    diag["outcome_weights"] = diagnostics.outcome_weights;
  }
  if (!diagnostics.propensity_weights.empty()) {
    diag["propensity_weights"] = diagnostics.propensity_weights;
  }
  if (!diagnostics.notes.empty()) diag["notes"] = diagnostics.notes;

  nlohmann::ordered_json j;
  j["method"] = method_name(method);
  j["tau"] = tau;
  j["estimate"] = estimate;
  j["se"] = se;
  j["ci_low"] = ci_low;
  j["ci_high"] = ci_high;
  j["p_value"] = p_value;
  j["n1"] = n1;
  j["n0"] = n0;
  j["diagnostics"] = diag;
  return j;
}

EstimateReport estimate_unadjusted(const PseudoDataset& po) {
  require_two_arms(po);
  std::vector<double> p1, p0;
  for (const PseudoRow& row : po.rows) {
    (row.arm == 1 ? p1 : p0).push_back(row.pseudo_value);
  }
  const double psi = jackknife_mean(p1) - jackknife_mean(p0);
  const double se =
      std::sqrt(jackknife_variance(p1) + jackknife_variance(p0));
  return make_report(Method::unadjusted, po, psi, se);
}

EstimateReport estimate_gee(const PseudoDataset& po) {
  require_two_arms(po);
  const BaseDesign design = outcome_design(po);
  const Eigen::VectorXd y = pseudo_vector(po);
  const GlmFit fit = fit_glm(design.columns, y, Family::gaussian_identity,
                             design.names);

  const Eigen::Index n = design.columns.rows();
  Eigen::MatrixXd F(n, design.columns.cols() + 1);
  F.col(0).setOnes();
  F.rightCols(design.columns.cols()) = design.columns;
  const Eigen::VectorXd resid = y - F * fit.coefficients;

  // Robust sandwich with independence working covariance.
  const Eigen::MatrixXd bread = (F.transpose() * F).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(F.cols(), F.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    meat.noalias() += resid[i] * resid[i] * F.row(i).transpose() * F.row(i);
  }
  const Eigen::MatrixXd cov = bread * meat * bread;
  const double se = std::sqrt(std::max(0.0, cov(1, 1)));  // arm coefficient
  return make_report(Method::gee, po, fit.coefficients[1], se);
}

EstimateReport aiptw_from_nuisances(const PseudoDataset& po,
                                    const std::vector<double>& g,
                                    const std::vector<double>& q1,
                                    const std::vector<double>& q0) {
  require_two_arms(po);
  const std::size_t n = po.rows.size();
  if (g.size() != n || q1.size() != n || q0.size() != n) {
    throw ValidationError("aiptw: nuisance vectors do not match the data size");
  }
  std::vector<double> influence(n);
  double psi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PseudoRow& row = po.rows[i];
    const double treated =
        row.arm == 1 ? (row.pseudo_value - q1[i]) / g[i] : 0.0;
    const double control =
        row.arm == 0 ? (row.pseudo_value - q0[i]) / (1.0 - g[i]) : 0.0;
    influence[i] = treated + q1[i] - control - q0[i];
    psi += influence[i];
  }
  psi /= static_cast<double>(n);
  for (double& d : influence) d -= psi;
  double ss = 0.0;
  for (double d : influence) ss += d * d;
  const double se =
      std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  return make_report(Method::aiptw, po, psi, se);
}

EstimateReport estimate_aiptw(const PseudoDataset& po,
                              const NuisanceConfig& config) {
  require_two_arms(po);
  const FittedNuisances nuis = fit_nuisances(po, pseudo_vector(po), config);
  EstimateReport report = aiptw_from_nuisances(po, nuis.g, nuis.q1, nuis.q0);
  report.diagnostics = nuis.diagnostics;
  return report;
}

EstimateReport estimate_tmle(const PseudoDataset& po,
                             const NuisanceConfig& config) {
  require_two_arms(po);
  const std::size_t n = po.rows.size();
  const Eigen::VectorXd p = pseudo_vector(po);
  const double pmin = p.minCoeff();
  const double pmax = p.maxCoeff();
  const double range = pmax - pmin;
  if (range < 1e-12) {
    // Constant pseudo-values: no scale to work on, the contrast is zero.
    EstimateReport r = make_report(Method::tmle, po, 0.0, 0.0);
    r.diagnostics.notes.push_back("constant pseudo-values; trivial fit");
    return r;
  }
  const Eigen::VectorXd ps = (p.array() - pmin) / range;

  const FittedNuisances nuis = fit_nuisances(po, ps, config);

  // Initial outcome predictions on the scaled response, kept off the
  // boundary so the logit is finite.
  auto clip01 = [](double v) { return std::clamp(v, 0.005, 0.995); };
  std::vector<double> q1s(n), q0s(n), qa(n), h1(n), h0(n), ha(n);
  for (std::size_t i = 0; i < n; ++i) {
    q1s[i] = clip01(nuis.q1[i]);
    q0s[i] = clip01(nuis.q0[i]);
    qa[i] = po.rows[i].arm == 1 ? q1s[i] : q0s[i];
    h1[i] = 1.0 / nuis.g[i];
    h0[i] = -1.0 / (1.0 - nuis.g[i]);
    ha[i] = po.rows[i].arm == 1 ? h1[i] : h0[i];
  }

  // One-parameter fluctuation: logistic regression of the scaled response
  // on the clever covariate with offset logit(Q) and no intercept.
  double eps = 0.0;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    double score = 0.0, info = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = expit(logit(qa[i]) + eps * ha[i]);
      score += ha[i] * (ps[static_cast<Eigen::Index>(i)] - mu);
      info += ha[i] * ha[i] * mu * (1.0 - mu);
    }
    if (info < 1e-12) {
      converged = std::abs(score) / static_cast<double>(n) < 1e-10;
      break;
    }
    const double delta = score / info;
    eps += delta;
    if (std::abs(delta) < 1e-11 * std::max(1.0, std::abs(eps))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw EstimationError(
        "tmle: fluctuation did not converge (epsilon=" + std::to_string(eps) +
        ")");
  }

  // Targeted update and the contrast, mapped back to days.
  double contrast = 0.0, score_mean = 0.0;
  std::vector<double> q1_star(n), q0_star(n);
  for (std::size_t i = 0; i < n; ++i) {
    q1_star[i] = expit(logit(q1s[i]) + eps * h1[i]);
    q0_star[i] = expit(logit(q0s[i]) + eps * h0[i]);
    const double qa_star = po.rows[i].arm == 1 ? q1_star[i] : q0_star[i];
    score_mean += ha[i] * (ps[static_cast<Eigen::Index>(i)] - qa_star);
    contrast += q1_star[i] - q0_star[i];
  }
  contrast /= static_cast<double>(n);
  score_mean /= static_cast<double>(n);
  const double psi = contrast * range;

  // Efficient influence function on the original scale.
  std::vector<double> influence(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q1o = pmin + range * q1_star[i];
    const double q0o = pmin + range * q0_star[i];
    const double qao = po.rows[i].arm == 1 ? q1o : q0o;
    influence[i] =
        ha[i] * (po.rows[i].pseudo_value - qao) + (q1o - q0o) - psi;
  }
  double ss = 0.0;
  for (double d : influence) ss += d * d;
  const double se =
      std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));

  EstimateReport report = make_report(Method::tmle, po, psi, se);
  report.diagnostics = nuis.diagnostics;
  report.diagnostics.epsilon = eps;
  report.diagnostics.eif_score_mean = score_mean;
  return report;
}

EstimateReport estimate(const PseudoDataset& po, Method method,
                        const NuisanceConfig& config) {
  switch (method) {
    case Method::unadjusted: return estimate_unadjusted(po);
    case Method::gee: return estimate_gee(po);
    case Method::aiptw: return estimate_aiptw(po, config);
    case Method::tmle: return estimate_tmle(po, config);
  }
  throw ValidationError("unknown method");
}

}  // namespace rmstpo
