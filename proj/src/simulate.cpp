#include "rmstpo/simulate.hpp"

#include <cmath>
#include <functional>
#include <iostream>

#include "rmstpo/errors.hpp"
#include "rmstpo/rng.hpp"
#include "rmstpo/stats.hpp"

namespace rmstpo {

namespace {

double dot_with_squares(const std::vector<double>& linear,
                        const std::vector<double>& quadratic,
                        const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j < linear.size()) s += linear[j] * x[j];
    if (j < quadratic.size()) s += quadratic[j] * x[j] * x[j];
  }
  return s;
}

// Adaptive Simpson quadrature on [a, b].
double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Conditional restricted mean E(T ^ tau | X = x, A = arm).
double conditional_rmst(const SimScenario& sc, const std::vector<double>& x,
                        int arm) {
  const double rate = sc.events.rate(x, arm);
  if (sc.events.kind == EventLaw::Kind::exponential) {
    return -std::expm1(-rate * sc.tau) / rate;
  }
  const double k = sc.events.weibull_shape;
  return integrate(
      [&](double t) { return std::exp(-std::pow(rate * t, k)); }, 0.0, sc.tau,
      1e-9);
}

bool has_quadrature_route(const SimScenario& sc) {
  int continuous = 0;
  for (const auto& law : sc.covariates) {
    if (law.kind == CovariateLaw::Kind::normal) return false;
    if (law.kind == CovariateLaw::Kind::uniform) ++continuous;
  }
  return continuous <= 2;
}

// Marginalizes f over the covariate law, dimension by dimension: discrete
// components are enumerated, uniform components integrated by adaptive
// quadrature.
double marginalize(const SimScenario& sc,
                   const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> x(sc.covariates.size());
  std::function<double(std::size_t)> recurse = [&](std::size_t dim) -> double {
    if (dim == sc.covariates.size()) return f(x);
    const CovariateLaw& law = sc.covariates[dim];
    if (law.kind == CovariateLaw::Kind::bernoulli) {
      x[dim] = 0.0;
      const double v0 = recurse(dim + 1);
      x[dim] = 1.0;
      const double v1 = recurse(dim + 1);
      return (1.0 - law.p1) * v0 + law.p1 * v1;
    }
    const double lo = law.p1, hi = law.p2;
    return integrate(
               [&](double t) {
                 x[dim] = t;
                 return recurse(dim + 1);
               },
               lo, hi, 1e-9) /
           (hi - lo);
  };
  return recurse(0);
}

double monte_carlo_marginal(
    const SimScenario& sc,
    const std::function<double(const std::vector<double>&)>& f) {
  Rng rng(sc.seed);
  const std::size_t draws = 1000000;
  std::vector<double> x(sc.covariates.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    for (std::size_t j = 0; j < sc.covariates.size(); ++j) {
      const CovariateLaw& law = sc.covariates[j];
      switch (law.kind) {
        case CovariateLaw::Kind::uniform: x[j] = rng.uniform(law.p1, law.p2); break;
        case CovariateLaw::Kind::bernoulli: x[j] = rng.bernoulli(law.p1) ? 1.0 : 0.0; break;
        case CovariateLaw::Kind::normal: x[j] = rng.normal(law.p1, law.p2); break;
      }
    }
    sum += f(x);
  }
  return sum / static_cast<double>(draws);
}

double marginal(const SimScenario& sc,
                const std::function<double(const std::vector<double>&)>& f) {
  return has_quadrature_route(sc) ? marginalize(sc, f)
                                  : monte_carlo_marginal(sc, f);
}

}  // namespace

double TreatmentMechanism::propensity(const std::vector<double>& x) const {
  if (constant) return constant_p;
  return expit(intercept + dot_with_squares(linear, quadratic, x));
}

double EventLaw::rate(const std::vector<double>& x, int arm) const {
  return base_rate *
         std::exp(dot_with_squares(linear, quadratic, x) + arm_coef * arm);
}

double EventLaw::survival(double t, const std::vector<double>& x,
                          int arm) const {
  const double r = rate(x, arm);
  if (kind == Kind::exponential) return std::exp(-r * t);
  return std::exp(-std::pow(r * t, weibull_shape));
}

double CensoringLaw::rate(const std::vector<double>& x, int arm) const {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size() && j < linear.size(); ++j) {
    s += linear[j] * x[j];
  }
  return base_rate * std::exp(s + arm_coef * arm);
}

SimScenario scenario_by_name(const std::string& name) {
  SimScenario sc;
  sc.name = name;
  sc.tau = 12.0;
  sc.seed = 1;
  sc.censoring.base_rate = 0.03;
  if (name == "S0") {
    sc.covariates = {{CovariateLaw::Kind::uniform, 0.0, 1.0}};
    sc.treatment.constant = true;
    sc.treatment.constant_p = 0.5;
    sc.events = {EventLaw::Kind::exponential, 0.08, {0.5}, {}, 0.0, 1.0};
  } else if (name == "S1" || name == "S1-misG") {
    sc.covariates = {{CovariateLaw::Kind::uniform, 0.0, 1.0}};
    sc.treatment.constant = false;
    sc.treatment.intercept = -0.5;
    sc.treatment.linear = {1.5};
    sc.events = {EventLaw::Kind::exponential, 0.08, {0.8}, {}, -0.4, 1.0};
  } else if (name == "S1-misQ") {
    // Confounding through the square of a sign-symmetric covariate: a
    // linear-in-X adjustment captures none of it.
    sc.covariates = {{CovariateLaw::Kind::uniform, -1.0, 1.0}};
    sc.treatment.constant = false;
    sc.treatment.intercept = -0.8;
    sc.treatment.linear = {0.0};
    sc.treatment.quadratic = {2.2};
    sc.events = {EventLaw::Kind::exponential, 0.06, {0.0}, {1.1}, -0.5, 1.0};
  } else {
    throw ValidationError("unknown scenario: '" + name + "'");
  }
  return sc;
}

std::vector<std::string> scenario_names() {
  return {"S0", "S1", "S1-misQ", "S1-misG"};
}

double true_arm_rmst(const SimScenario& scenario, int arm) {
  if (scenario.covariates.empty()) {
    return conditional_rmst(scenario, {}, arm);
  }
  return marginal(scenario, [&](const std::vector<double>& x) {
    return conditional_rmst(scenario, x, arm);
  });
}

TruthRecord true_rmst(const SimScenario& scenario) {
  TruthRecord rec;
  rec.mu1_true = true_arm_rmst(scenario, 1);
  rec.mu0_true = true_arm_rmst(scenario, 0);
  rec.theta_true = rec.mu1_true - rec.mu0_true;
  rec.method = scenario.covariates.empty() &&
                       scenario.events.kind == EventLaw::Kind::exponential
                   ? "closed_form"
                   : "numeric_integration";
  return rec;
}

nlohmann::ordered_json TruthRecord::to_json() const {
  nlohmann::ordered_json j;
  j["theta_true"] = theta_true;
  j["mu1_true"] = mu1_true;
  j["mu0_true"] = mu0_true;
  j["method"] = method;
  return j;
}

double analytic_censoring_fraction(const SimScenario& scenario) {
  if (scenario.events.kind != EventLaw::Kind::exponential) {
    throw ValidationError(
        "analytic censoring fraction needs an exponential event law");
  }
  if (scenario.censoring.base_rate <= 0.0) return 0.0;
  auto point = [&](const std::vector<double>& x) {
    double total = 0.0;
    const double g = scenario.treatment.propensity(x);
    for (int a : {0, 1}) {
      const double re = scenario.events.rate(x, a);
      const double rc = scenario.censoring.rate(x, a);
      total += (a == 1 ? g : 1.0 - g) * rc / (rc + re);
    }
    return total;
  };
  if (scenario.covariates.empty()) return point({});
  return marginal(scenario, point);
}

StudyData generate(const SimScenario& scenario, std::size_t n,
                   std::optional<std::uint64_t> seed_override) {
  if (n < 4) throw ValidationError("generate: need n >= 4");
  Rng rng(seed_override.value_or(scenario.seed));
  StudyData data;
  for (std::size_t j = 0; j < scenario.covariates.size(); ++j) {
    CovariateSpec spec;
    spec.name = "x" + std::to_string(j + 1);
    data.schema.columns.push_back(spec);
    data.schema.encoded_names.push_back(spec.name);
  }
  data.records.reserve(n);
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    SurvivalRecord rec;
    rec.id = "s" + std::to_string(i + 1);
    rec.covariates.resize(scenario.covariates.size());
    for (std::size_t j = 0; j < scenario.covariates.size(); ++j) {
      const CovariateLaw& law = scenario.covariates[j];
      switch (law.kind) {
        case CovariateLaw::Kind::uniform:
          rec.covariates[j] = rng.uniform(law.p1, law.p2);
          break;
        case CovariateLaw::Kind::bernoulli:
          rec.covariates[j] = rng.bernoulli(law.p1) ? 1.0 : 0.0;
          break;
        case CovariateLaw::Kind::normal:
          rec.covariates[j] = rng.normal(law.p1, law.p2);
          break;
      }
    }
    rec.arm = rng.bernoulli(scenario.treatment.propensity(rec.covariates)) ? 1 : 0;
    n1 += static_cast<std::size_t>(rec.arm);
    const double event_rate = scenario.events.rate(rec.covariates, rec.arm);
    double t;
    if (scenario.events.kind == EventLaw::Kind::exponential) {
      t = rng.exponential(event_rate);
    } else {
      t = std::pow(rng.exponential(1.0), 1.0 / scenario.events.weibull_shape) /
          event_rate;
    }
    if (scenario.censoring.base_rate > 0.0) {
      const double c =
          rng.exponential(scenario.censoring.rate(rec.covariates, rec.arm));
      rec.event = t <= c ? 1 : 0;
      rec.time = std::min(t, c);
    } else {
      rec.event = 1;
      rec.time = t;
    }
    data.records.push_back(std::move(rec));
  }
  if (n1 == 0 || n1 == n) {
    std::cerr << "warning: generated data has a single arm (n1=" << n1
              << " of " << n << ")\n";
  }
  return data;
}

}  // namespace rmstpo
