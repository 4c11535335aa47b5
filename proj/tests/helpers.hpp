#pragma once

#include <string>
#include <vector>

#include "rmstpo/dataset.hpp"
#include "rmstpo/pseudo.hpp"
#include "rmstpo/rng.hpp"

namespace testutil {

struct Row {
  std::string id;
  int arm;
  double time;
  int event;
  std::vector<double> x;
};

inline rmstpo::StudyData make_study(const std::vector<Row>& rows,
                                    std::vector<std::string> names = {}) {
  rmstpo::StudyData data;
  if (names.empty() && !rows.empty() && !rows.front().x.empty()) {
    for (std::size_t j = 0; j < rows.front().x.size(); ++j) {
      names.push_back("x" + std::to_string(j + 1));
    }
  }
  data.schema.encoded_names = names;
  for (const auto& name : names) {
    rmstpo::CovariateSpec spec;
    spec.name = name;
    data.schema.columns.push_back(spec);
  }
  for (const Row& r : rows) {
    rmstpo::SurvivalRecord rec;
    rec.id = r.id;
    rec.arm = r.arm;
    rec.time = r.time;
    rec.event = r.event;
    rec.covariates = r.x;
    data.records.push_back(rec);
  }
  return data;
}

// Random right-censored sample; censor_frac is the approximate fraction of
// censored subjects.
inline void random_sample(rmstpo::Rng& rng, std::size_t n, double censor_frac,
                          std::vector<double>& times,
                          std::vector<int>& events) {
  times.resize(n);
  events.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.exponential(0.05);
    if (rng.bernoulli(censor_frac)) {
      times[i] = std::min(t, rng.uniform(1.0, 80.0));
      events[i] = times[i] < t ? 0 : 1;
    } else {
      times[i] = t;
      events[i] = 1;
    }
    // keep times distinct-ish but allow ties sometimes
    if (rng.bernoulli(0.3)) times[i] = std::round(times[i]);
    if (times[i] <= 0.0) times[i] = 0.5;
  }
}

// A tau that survives every leave-one-out subsample.
inline double safe_tau(std::vector<double> times, double frac = 0.9) {
  std::sort(times.begin(), times.end());
  return frac * times[times.size() - 2];
}

}  // namespace testutil
