#pragma once

#include <cstddef>

#include "rmstpo/dataset.hpp"
#include "rmstpo/estimators.hpp"
#include "rmstpo/pseudo.hpp"

namespace rmstpo {

// Copy-reference sensitivity analysis for censoring at random: censored
// treated subjects are re-evaluated as if they followed the control arm's
// event pattern.
struct CRResult {
  EstimateReport main_report;
  EstimateReport cr_report;
  std::size_t replaced_count = 0;          // censored subjects in arm 1
  std::size_t tentative_dataset_size = 0;  // |censored arm 1| + |arm 0|

  nlohmann::ordered_json to_json() const;
};

// Censored treated subjects plus the whole control arm, identities kept.
// The result is a single cohort and is not required to contain two arms.
StudyData build_tentative_dataset(const StudyData& data);

// Main per-arm pseudo-values with the censored treated subjects' values
// replaced by their pseudo-values from a single pooled KM fit over the
// tentative dataset. Control-arm values and treated events are untouched.
PseudoDataset cr_pseudo(const StudyData& data, double tau);

// Runs the chosen estimator on the main and copy-reference pseudo-datasets
// with identical configuration, so any difference reflects the imputation.
CRResult run_cr_analysis(const StudyData& data, double tau, Method method,
                         const NuisanceConfig& config = {});

}  // namespace rmstpo
