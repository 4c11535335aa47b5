#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmstpo/pseudo.hpp"
#include "rmstpo/super_learner.hpp"

namespace rmstpo {

enum class Method { unadjusted, gee, aiptw, tmle };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Nuisance-model configuration shared by AIPTW and TMLE.
struct NuisanceConfig {
  std::vector<LearnerSpec> outcome_learners = default_learner_library();
  std::vector<LearnerSpec> propensity_learners = default_learner_library();
  int folds = 10;
  std::uint64_t seed = 1;
  double g_lower = 0.025;
  double g_upper = 0.975;
};

struct Diagnostics {
  std::optional<double> g_min;
  std::optional<double> g_max;
  std::optional<int> g_truncated;
  std::optional<double> epsilon;          // TMLE fluctuation coefficient
  std::optional<double> eif_score_mean;   // post-fluctuation score component
  std::map<std::string, double> outcome_weights;
  std::map<std::string, double> propensity_weights;
  std::vector<std::string> notes;
};

struct EstimateReport {
  Method method = Method::unadjusted;
  double tau = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;   // estimate - 1.96 se
  double ci_high = 0.0;  // estimate + 1.96 se
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n0 = 0;
  Diagnostics diagnostics;

  nlohmann::ordered_json to_json() const;
};

// Difference of per-arm pseudo-value means; se^2 is the sum of the per-arm
// jackknife variances.
EstimateReport estimate_unadjusted(const PseudoDataset& po);

// Gaussian identity regression of P on (arm, X); the arm coefficient is the
// estimate and its se comes from the robust sandwich with independence
// working covariance.
EstimateReport estimate_gee(const PseudoDataset& po);

EstimateReport estimate_aiptw(const PseudoDataset& po,
                              const NuisanceConfig& config = {});

EstimateReport estimate_tmle(const PseudoDataset& po,
                             const NuisanceConfig& config = {});

EstimateReport estimate(const PseudoDataset& po, Method method,
                        const NuisanceConfig& config = {});

// Augmented estimator evaluated at externally supplied nuisance values
// (used by estimate_aiptw after fitting, and directly by tests).
EstimateReport aiptw_from_nuisances(const PseudoDataset& po,
                                    const std::vector<double>& g,
                                    const std::vector<double>& q1,
                                    const std::vector<double>& q0);

}  // namespace rmstpo
