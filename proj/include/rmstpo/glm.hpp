#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace rmstpo {

enum class Family { gaussian_identity, binomial_logit };

struct GlmOptions {
  bool intercept = true;
  std::optional<Eigen::VectorXd> offset;
  int max_iterations = 100;
  double tolerance = 1e-10;
};

struct GlmFit {
  Family family = Family::gaussian_identity;
  Eigen::VectorXd coefficients;  // intercept first when present
  bool intercept = true;
  bool converged = false;
  int iterations = 0;
  bool separation_warning = false;
  std::vector<std::string> design_schema;
};

// Fits a GLM by iteratively reweighted least squares. The design excludes
// the intercept column; one is prepended unless options.intercept is false.
// gaussian_identity solves the normal equations in a single step. A
// rank-deficient design raises EstimationError naming the collinear
// columns. Complete separation in a logistic fit returns converged = false
// with separation_warning set instead of throwing.
GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               Family family, const std::vector<std::string>& column_names,
               const GlmOptions& options = {});

// Mean-scale predictions: identity for gaussian, expit for binomial.
Eigen::VectorXd predict(const GlmFit& fit, const Eigen::MatrixXd& design,
                        const std::optional<Eigen::VectorXd>& offset = {});

}  // namespace rmstpo
