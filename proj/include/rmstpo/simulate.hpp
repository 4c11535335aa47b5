#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmstpo/dataset.hpp"

namespace rmstpo {

// One independent baseline covariate.
struct CovariateLaw {
  enum class Kind { uniform, bernoulli, normal };
  Kind kind = Kind::uniform;
  double p1 = 0.0;  // uniform lo / bernoulli p / normal mean
  double p2 = 1.0;  // uniform hi / normal sd
};

// P(A = 1 | X), either constant (RCT) or logistic with linear and
// quadratic terms in the covariates.
struct TreatmentMechanism {
  bool constant = true;
  double constant_p = 0.5;
  double intercept = 0.0;
  std::vector<double> linear;
  std::vector<double> quadratic;

  double propensity(const std::vector<double>& x) const;
};

// Event-time law with log-linear covariate and arm effects on the rate:
// rate(X, a) = base_rate * exp(linear.X + quadratic.X^2 + arm_coef * a).
// Exponential: S(t) = exp(-rate t); Weibull: S(t) = exp(-(rate t)^shape).
struct EventLaw {
  enum class Kind { exponential, weibull };
  Kind kind = Kind::exponential;
  double base_rate = 0.1;
  std::vector<double> linear;
  std::vector<double> quadratic;
  double arm_coef = 0.0;
  double weibull_shape = 1.0;

  double rate(const std::vector<double>& x, int arm) const;
  double survival(double t, const std::vector<double>& x, int arm) const;
};

// Exponential censoring; base_rate = 0 disables censoring entirely.
struct CensoringLaw {
  double base_rate = 0.0;
  std::vector<double> linear;
  double arm_coef = 0.0;

  double rate(const std::vector<double>& x, int arm) const;
};

struct SimScenario {
  std::string name;
  std::vector<CovariateLaw> covariates;
  TreatmentMechanism treatment;
  EventLaw events;
  CensoringLaw censoring;
  double tau = 10.0;
  std::uint64_t seed = 1;
};

struct TruthRecord {
  double theta_true = 0.0;
  double mu1_true = 0.0;
  double mu0_true = 0.0;
  std::string method;  // closed_form | numeric_integration

  nlohmann::ordered_json to_json() const;
};

// Built-in scenarios: S0 (null RCT), S1 (confounded), S1-misQ (confounded
// through a quadratic covariate effect, for wrong-outcome-model studies),
// S1-misG (the S1 law, for wrong-propensity-model studies). Unknown names
// raise ValidationError.
SimScenario scenario_by_name(const std::string& name);
std::vector<std::string> scenario_names();

// Restricted mean E(T^a ^ tau): closed form for covariate-free exponential
// laws, otherwise the covariate-conditional survival integral marginalized
// by adaptive quadrature (absolute tolerance 1e-8) over discrete/uniform
// covariates, or by 10^6 seeded Monte-Carlo draws when the covariate
// integral has no quadrature route (normal covariates or dimension > 2).
double true_arm_rmst(const SimScenario& scenario, int arm);
TruthRecord true_rmst(const SimScenario& scenario);

// Marginal P(C < T); exact quadrature, exponential event law only.
double analytic_censoring_fraction(const SimScenario& scenario);

// Draws X, then A ~ Bernoulli(g0(X)), then the event and censoring times,
// and emits Y = min(T, C) with the event flag. Deterministic given seed.
// A single-arm draw is emitted with a warning on stderr (downstream
// validation rejects it).
StudyData generate(const SimScenario& scenario, std::size_t n,
                   std::optional<std::uint64_t> seed_override = {});

}  // namespace rmstpo
