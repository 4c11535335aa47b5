#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rmstpo/dataset.hpp"

namespace rmstpo {

// Kaplan-Meier curve as a right-continuous step function. survival[k] is
// the value of S(t) on [times[k], times[k+1]); S(t) = 1 before times[0].
// The curve is constant at survival.back() after the last observed time.
struct StepSurvival {
  std::vector<double> times;     // distinct observed times, increasing
  std::vector<double> survival;  // value on [times[k], times[k+1])
  std::vector<int> at_risk;      // risk-set size at times[k]
  std::vector<int> events;       // events at times[k]

  double max_time() const { return times.back(); }
};

struct RmstValue {
  double value = 0.0;  // days, in [0, tau]
  double tau = 0.0;
};

// Product-limit estimator. At tied times events are processed before
// censorings: subjects censored at t stay in the risk set for events at t.
StepSurvival kaplan_meier(const std::vector<double>& times,
                          const std::vector<int>& events);

// Exact area of the step function on [0, tau]. tau must not exceed the
// largest observed time; the error carries the largest valid cutoff.
RmstValue rmst(const StepSurvival& curve, double tau);

// Unadjusted plug-in estimate: per-arm KM areas differenced (arm 1 - arm 0).
double rmst_difference_plugin(const StudyData& data, double tau);

// Two-column export (time, survival) for plotting.
void write_curve_csv(const StepSurvival& curve, std::ostream& out);

}  // namespace rmstpo
