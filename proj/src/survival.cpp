#include "rmstpo/survival.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "rmstpo/errors.hpp"

namespace rmstpo {

StepSurvival kaplan_meier(const std::vector<double>& times,
                          const std::vector<int>& events) {
  if (times.empty()) throw ValidationError("kaplan_meier: empty input");
  if (times.size() != events.size()) {
    throw ValidationError("kaplan_meier: times and events differ in length");
  }
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b];
  });

  StepSurvival curve;
  double surv = 1.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    const int at_risk = static_cast<int>(n - i);
    int d = 0;
    std::size_t j = i;
    while (j < n && times[order[j]] == t) {
      d += events[order[j]];
      ++j;
    }
    // Events and censorings tied at t are processed together with the same
    // risk set: events precede censorings.
    if (d > 0) surv *= 1.0 - static_cast<double>(d) / at_risk;
    curve.times.push_back(t);
    curve.survival.push_back(surv);
    curve.at_risk.push_back(at_risk);
    curve.events.push_back(d);
    i = j;
  }
  return curve;
}

RmstValue rmst(const StepSurvival& curve, double tau) {
  if (!(tau > 0.0)) throw ValidationError("rmst: tau must be positive");
  // Beyond the last observed time the area is undetermined unless the
  // curve has already reached zero (then it contributes nothing).
  if (tau > curve.max_time() && curve.survival.back() > 0.0) {
    throw TauSupportError(
        "rmst: tau beyond the largest observed time; largest valid tau is " +
            std::to_string(curve.max_time()),
        curve.max_time());
  }
  double area = 0.0;
  double prev_t = 0.0;
  double prev_s = 1.0;
  for (std::size_t k = 0; k < curve.times.size() && curve.times[k] < tau; ++k) {
    area += prev_s * (curve.times[k] - prev_t);
    prev_t = curve.times[k];
    prev_s = curve.survival[k];
  }
  area += prev_s * (tau - prev_t);
  return {area, tau};
}

double rmst_difference_plugin(const StudyData& data, double tau) {
  validate_two_arm(data);
  auto [arm1, arm0] = split_by_arm(data);
  const double mu1 = rmst(kaplan_meier(arm1.times(), arm1.events()), tau).value;
  const double mu0 = rmst(kaplan_meier(arm0.times(), arm0.events()), tau).value;
  return mu1 - mu0;
}

void write_curve_csv(const StepSurvival& curve, std::ostream& out) {
  char buf[64];
  out << "time,survival\n0,1\n";
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", curve.times[k],
                  curve.survival[k]);
    out << buf;
  }
}

}  // namespace rmstpo
