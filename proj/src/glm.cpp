#include "rmstpo/glm.hpp"

#include <cmath>

#include "rmstpo/errors.hpp"
#include "rmstpo/stats.hpp"

namespace rmstpo {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& design, bool intercept) {
  if (!intercept) return design;
  Eigen::MatrixXd full(design.rows(), design.cols() + 1);
  full.col(0).setOnes();
  if (design.cols() > 0) full.rightCols(design.cols()) = design;
  return full;
}

std::vector<std::string> full_names(const std::vector<std::string>& names,
                                    bool intercept) {
  std::vector<std::string> out;
  if (intercept) out.push_back("(intercept)");
  out.insert(out.end(), names.begin(), names.end());
  return out;
}

// Rank check via column-pivoted QR; names the columns outside the pivot
// basis so the caller can see what is collinear.
void require_full_rank(const Eigen::MatrixXd& F,
                       const std::vector<std::string>& names) {
  if (F.cols() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank == F.cols()) return;
  const auto perm = qr.colsPermutation().indices();
  std::string cols;
  for (Eigen::Index k = rank; k < F.cols(); ++k) {
    if (!cols.empty()) cols += ", ";
    cols += names[static_cast<std::size_t>(perm[k])];
  }
  throw EstimationError("rank-deficient design; collinear columns: " + cols);
}

}  // namespace

GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               Family family, const std::vector<std::string>& column_names,
               const GlmOptions& options) {
  const Eigen::Index n = design.rows();
  if (n != response.size()) {
    throw ValidationError("fit_glm: design rows and response length differ");
  }
  if (family == Family::binomial_logit &&
      (response.minCoeff() < 0.0 || response.maxCoeff() > 1.0)) {
    throw ValidationError("fit_glm: binomial response must lie in [0, 1]");
  }
  const Eigen::MatrixXd F = with_intercept(design, options.intercept);
  const std::vector<std::string> names =
      full_names(column_names, options.intercept);
  require_full_rank(F, names);

  GlmFit fit;
  fit.family = family;
  fit.intercept = options.intercept;
  fit.design_schema = column_names;

  Eigen::VectorXd offset =
      options.offset.value_or(Eigen::VectorXd::Zero(n));

  if (family == Family::gaussian_identity) {
    fit.coefficients = F.householderQr().solve(response - offset);
    fit.converged = true;
    fit.iterations = 1;
    return fit;
  }

  // Binomial IRLS with working response z = eta - offset + (y - p) / w.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(F.cols());
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd eta = F * beta + offset;
    Eigen::VectorXd p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = expit(eta[i]);
      w[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
    }
    const Eigen::VectorXd z =
        (eta - offset).array() + (response - p).array() / w.array();
    const Eigen::VectorXd sw = w.array().sqrt();
    const Eigen::MatrixXd Fw = sw.asDiagonal() * F;
    const Eigen::VectorXd zw = sw.asDiagonal() * z;
    const Eigen::VectorXd beta_new = Fw.householderQr().solve(zw);
    const double change = (beta_new - beta).norm() /
                          std::max(1.0, beta_new.norm());
    beta = beta_new;
    if (change < options.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  fit.coefficients = beta;
  fit.converged = converged;
  fit.iterations = iter;
  if (!converged && beta.lpNorm<Eigen::Infinity>() > 10.0) {
    fit.separation_warning = true;
  }
  return fit;
}

Eigen::VectorXd predict(const GlmFit& fit, const Eigen::MatrixXd& design,
                        const std::optional<Eigen::VectorXd>& offset) {
  if (design.cols() + (fit.intercept ? 1 : 0) != fit.coefficients.size()) {
    throw ValidationError("predict: design does not match the fitted schema");
  }
  Eigen::VectorXd eta =
      with_intercept(design, fit.intercept) * fit.coefficients;
  if (offset) eta += *offset;
  if (fit.family == Family::gaussian_identity) return eta;
  return eta.unaryExpr([](double e) { return expit(e); });
}

}  // namespace rmstpo
