#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rmstpo/dataset.hpp"
#include "rmstpo/errors.hpp"

namespace rmstpo {

enum class Provenance { main, copy_reference };

struct PseudoRow {
  std::string id;
  std::vector<double> covariates;
  int arm = 0;
  double pseudo_value = 0.0;  // may be negative or exceed tau
  int event = 0;
  double time = 0.0;
};

// Merged per-subject pseudo-observations, one row per subject of the
// originating StudyData in the original order.
struct PseudoDataset {
  std::vector<PseudoRow> rows;
  std::vector<std::string> covariate_names;
  double tau = 0.0;
  Provenance provenance = Provenance::main;

  std::size_t arm_count(int arm) const;
};

// Generic leave-one-out pseudo-observations of an arbitrary functional:
// n * f(sample) - (n - 1) * f(sample without i). A functional failure on
// a subsample is rethrown with the offending index attached.
template <typename T>
std::vector<double> jackknife_pseudo(
    const std::vector<T>& sample,
    const std::function<double(const std::vector<T>&)>& functional) {
  const std::size_t n = sample.size();
  if (n < 2) throw ValidationError("jackknife requires at least 2 observations");
  const double full = functional(sample);
  std::vector<double> out(n);
  std::vector<T> loo(sample.begin() + 1, sample.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) loo[i - 1] = sample[i - 1];  // restore, then drop element i
    double fi;
    try {
      fi = functional(loo);
    } catch (const TauSupportError& e) {
      throw TauSupportError("leave-one-out subsample " + std::to_string(i) +
                                ": " + e.what(),
                            e.max_valid_tau());
    } catch (const Error& e) {
      throw ValidationError("leave-one-out subsample " + std::to_string(i) +
                            ": " + e.what());
    }
    out[i] = static_cast<double>(n) * full -
             static_cast<double>(n - 1) * fi;
  }
  return out;
}

// Throws TauSupportError when tau exceeds the support of the sample or of
// some leave-one-out subsample. A curve that has already reached zero is
// determined everywhere, so such samples support any tau. `label` prefixes
// the message; `ids`, when given, names the offending subject.
void check_loo_tau_support(const std::vector<double>& times,
                           const std::vector<int>& events, double tau,
                           const std::string& label,
                           const std::vector<std::string>& ids);

double jackknife_mean(const std::vector<double>& pseudo_values);

// sum((p_i - mean)^2) / (n (n - 1))
double jackknife_variance(const std::vector<double>& pseudo_values);

// Reference leave-one-out RMST pseudo-values: one full KM refit per
// deleted subject. Quadratic cost; kept as the permanent oracle for the
// incremental path.
std::vector<double> rmst_pseudo_naive(const std::vector<double>& times,
                                      const std::vector<int>& events,
                                      double tau);

// Same values as rmst_pseudo_naive via a single sorted pass: deleting a
// subject rescales every KM factor at event times up to its observed time,
// so each leave-one-out area splits into a prefix integral of the
// deleted-curve and a suffix proportional to the original curve. O(n log n).
std::vector<double> rmst_pseudo_fast(const std::vector<double>& times,
                                     const std::vector<int>& events,
                                     double tau);

// Per-arm RMST pseudo-observations merged into one dataset (provenance =
// main). Tau must be supported by every leave-one-out subsample of each
// arm; violations name the arm and subject.
PseudoDataset rmst_pseudo_per_arm(const StudyData& data, double tau);

}  // namespace rmstpo
