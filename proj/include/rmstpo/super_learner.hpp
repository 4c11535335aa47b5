#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmstpo/glm.hpp"

namespace rmstpo {

// Base design handed to the learner library. treatment_column marks the
// treatment indicator inside the matrix, when present, so learners can
// form treatment-by-covariate interactions.
struct BaseDesign {
  Eigen::MatrixXd columns;  // n x d, no intercept
  std::vector<std::string> names;
  std::optional<std::size_t> treatment_column;
};

// Named GLM feature maps:
//   mean    intercept only
//   glm     main effects
//   glm_tx  main effects + treatment x covariate interactions
//           (identical to glm when the design has no treatment column)
//   glm_sq  main effects + squared non-binary columns
enum class LearnerKind { mean, glm, glm_tx, glm_sq };

struct LearnerSpec {
  LearnerKind kind = LearnerKind::glm;
  std::string name() const;
};

// Parses a comma-separated learner list (e.g. "mean,glm,glm_sq").
std::vector<LearnerSpec> parse_learners(const std::string& csv);
std::vector<LearnerSpec> default_learner_library();

struct FoldPlan {
  int folds = 10;
  std::vector<int> assignment;  // fold index per row
  std::uint64_t seed = 0;
};

// Deterministic fold assignment stratified by arm: each arm's rows are
// shuffled with the seed and dealt round-robin, so every fold gets as even
// an arm split as the counts allow. Throws if some fold would be empty.
FoldPlan make_stratified_folds(const std::vector<int>& arm, int folds,
                               std::uint64_t seed);

struct EnsembleModel {
  Family family = Family::gaussian_identity;
  std::vector<LearnerSpec> library;     // learners that survived fitting
  std::vector<GlmFit> base_fits;        // full-data refits, same order
  Eigen::VectorXd weights;              // on the probability simplex
  Eigen::VectorXd cv_risks;             // out-of-fold MSE per learner
  double ensemble_cv_risk = 0.0;
  FoldPlan folds;
  std::vector<std::string> dropped;     // learners that failed on some fold
};

// Cross-validated stacking: out-of-fold predictions per learner, simplex
// weights by non-negative least squares followed by normalization, then a
// full-data refit of every surviving learner. If the normalized combination
// would be worse (in out-of-fold MSE) than the single best learner, the
// weight vector collapses onto that learner. Deterministic given the plan.
EnsembleModel fit_super_learner(const BaseDesign& design,
                                const Eigen::VectorXd& response,
                                const std::vector<LearnerSpec>& library,
                                const FoldPlan& folds, Family family);

Eigen::VectorXd predict(const EnsembleModel& model, const BaseDesign& design);

// Lawson-Hanson active-set non-negative least squares (exposed for tests).
Eigen::VectorXd nnls(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);

}  // namespace rmstpo
