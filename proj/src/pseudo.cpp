#include "rmstpo/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmstpo/survival.hpp"

namespace rmstpo {

namespace {

// Sorted distinct-time summary of one sample.
struct Grouped {
  std::vector<double> t;      // distinct times, increasing
  std::vector<int> events;    // events at t[k]
  std::vector<int> total;     // events + censorings at t[k]
  std::vector<int> risk;      // at risk at t[k]
  std::vector<std::size_t> group_of;  // distinct index per input subject
};

Grouped group_sample(const std::vector<double>& times,
                     const std::vector<int>& events) {
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  Grouped g;
  g.group_of.resize(n);
  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    int d = 0, tot = 0;
    std::size_t j = i;
    while (j < n && times[order[j]] == t) {
      d += events[order[j]];
      g.group_of[order[j]] = g.t.size();
      ++tot;
      ++j;
    }
    g.t.push_back(t);
    g.events.push_back(d);
    g.total.push_back(tot);
    g.risk.push_back(static_cast<int>(n - i));
    i = j;
  }
  return g;
}

// KM area on [0, tau] in extended precision; assumes tau <= max(times).
long double km_area(const std::vector<double>& times,
                    const std::vector<int>& events, double tau) {
  const Grouped g = group_sample(times, events);
  long double area = 0.0L, surv = 1.0L, prev = 0.0L;
  for (std::size_t k = 0; k < g.t.size() && g.t[k] < tau; ++k) {
    area += surv * (static_cast<long double>(g.t[k]) - prev);
    if (g.events[k] > 0) {
      surv *= 1.0L - static_cast<long double>(g.events[k]) / g.risk[k];
    }
    prev = g.t[k];
  }
  area += surv * (static_cast<long double>(tau) - prev);
  return area;
}

std::size_t argmax_time(const std::vector<double>& times) {
  return static_cast<std::size_t>(
      std::max_element(times.begin(), times.end()) - times.begin());
}

// The KM curve reaches zero iff everyone at risk at the last distinct
// observed time has the event there.
bool km_tail_is_zero(const std::vector<double>& times,
                     const std::vector<int>& events) {
  const double max_t = *std::max_element(times.begin(), times.end());
  int at_risk = 0, ev = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] == max_t) {
      ++at_risk;
      ev += events[i];
    }
  }
  return ev == at_risk;
}

}  // namespace

void check_loo_tau_support(const std::vector<double>& times,
                           const std::vector<int>& events, double tau,
                           const std::string& label,
                           const std::vector<std::string>& ids) {
  if (times.size() < 2) {
    throw ValidationError(label + ": need at least 2 subjects");
  }
  std::vector<double> sorted(times);
  std::sort(sorted.begin(), sorted.end());
  const double max_t = sorted.back();
  if (tau > max_t && !km_tail_is_zero(times, events)) {
    throw TauSupportError(label + ": tau=" + std::to_string(tau) +
                              " beyond the largest observed time " +
                              std::to_string(max_t),
                          max_t);
  }
  // Removing the unique holder of the maximum shrinks the support; any
  // other removal keeps both the maximum and a zero tail intact.
  const double second = sorted[sorted.size() - 2];
  if (second < max_t && tau > second) {
    const std::size_t who = argmax_time(times);
    std::vector<double> rest_t;
    std::vector<int> rest_e;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i != who) {
        rest_t.push_back(times[i]);
        rest_e.push_back(events[i]);
      }
    }
    if (!km_tail_is_zero(rest_t, rest_e)) {
      const std::string subject =
          ids.empty() ? "subject at position " + std::to_string(who)
                      : "subject '" + ids[who] + "'";
      throw TauSupportError(
          label + ": tau=" + std::to_string(tau) + " unsupported once " +
              subject + " is left out (largest valid tau " +
              std::to_string(second) + ")",
          second);
    }
  }
}

double jackknife_mean(const std::vector<double>& pseudo_values) {
  if (pseudo_values.empty()) throw ValidationError("jackknife_mean: empty input");
  double s = 0.0;
  for (double v : pseudo_values) s += v;
  return s / static_cast<double>(pseudo_values.size());
}

double jackknife_variance(const std::vector<double>& pseudo_values) {
  const std::size_t n = pseudo_values.size();
  if (n < 2) throw ValidationError("jackknife_variance: need n >= 2");
  const double m = jackknife_mean(pseudo_values);
  double ss = 0.0;
  for (double v : pseudo_values) ss += (v - m) * (v - m);
  return ss / (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<double> rmst_pseudo_naive(const std::vector<double>& times,
                                      const std::vector<int>& events,
                                      double tau) {
  const std::size_t n = times.size();
  if (n != events.size()) {
    throw ValidationError("rmst_pseudo_naive: times and events differ in length");
  }
  check_loo_tau_support(times, events, tau, "rmst_pseudo_naive", {});
  const long double full = km_area(times, events, tau);
  std::vector<double> out(n);
  std::vector<double> t_loo(times.begin() + 1, times.end());
  std::vector<int> e_loo(events.begin() + 1, events.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      t_loo[i - 1] = times[i - 1];
      e_loo[i - 1] = events[i - 1];
    }
    const long double loo = km_area(t_loo, e_loo, tau);
    out[i] = static_cast<double>(static_cast<long double>(n) * full -
                                 static_cast<long double>(n - 1) * loo);
  }
  return out;
}

std::vector<double> rmst_pseudo_fast(const std::vector<double>& times,
                                     const std::vector<int>& events,
                                     double tau) {
  const std::size_t n = times.size();
  if (n != events.size()) {
    throw ValidationError("rmst_pseudo_fast: times and events differ in length");
  }
  check_loo_tau_support(times, events, tau, "rmst_pseudo_fast", {});
  const Grouped g = group_sample(times, events);
  const std::size_t m = g.t.size();

  // A[k]: KM survival just after t[k]. B[k]: the same product with every
  // risk set reduced by one (the curve seen when deleting a subject still
  // at risk at t[k]). C[k] = B[k]/A[k], accumulated factor-by-factor so the
  // ratio stays well-conditioned.
  std::vector<long double> A(m), B(m), C(m), cumA(m), cumB(m);
  long double a = 1.0L, b = 1.0L, c = 1.0L, ia = 0.0L, ib = 0.0L;
  long double prev = 0.0L;
  for (std::size_t k = 0; k < m; ++k) {
    const long double dt = static_cast<long double>(g.t[k]) - prev;
    ia += a * dt;
    ib += b * dt;
    cumA[k] = ia;
    cumB[k] = ib;
    if (g.events[k] > 0) {
      const long double fa =
          1.0L - static_cast<long double>(g.events[k]) / g.risk[k];
      const long double fb =
          g.risk[k] > 1
              ? std::max(0.0L, 1.0L - static_cast<long double>(g.events[k]) /
                                          (g.risk[k] - 1))
              : 1.0L;
      a *= fa;
      b *= fb;
      c = fa > 0.0L ? c * fb / fa : 0.0L;
    }
    A[k] = a;
    B[k] = b;
    C[k] = c;
    prev = g.t[k];
  }

  // Step-function integrals of the A- and B-curves on [0, x], x <= max time.
  auto integral = [&](const std::vector<long double>& cum,
                      const std::vector<long double>& val, double x) {
    if (x <= g.t[0]) return static_cast<long double>(x);
    const std::size_t k = static_cast<std::size_t>(
        std::upper_bound(g.t.begin(), g.t.end(), x) - g.t.begin() - 1);
    return cum[k] + val[k] * (static_cast<long double>(x) -
                              static_cast<long double>(g.t[k]));
  };
  const long double mu_full = integral(cumA, A, tau);
  const long double ia_tau = mu_full;
  const long double ib_tau = integral(cumB, B, tau);

  // Leave-one-out area for a subject censored at t[q]: the B-curve applies
  // through [t[q], t[q+1]) and the original curve, rescaled by C[q], after.
  auto loo_censored = [&](std::size_t q) {
    const double s = q + 1 < m ? std::min(g.t[q + 1], tau) : tau;
    long double v = integral(cumB, B, s);
    if (s < tau) v += C[q] * (ia_tau - integral(cumA, A, s));
    return v;
  };
  // For an event at t[q] < tau the drop at t[q] loses one event on a risk
  // set reduced by one; later factors are unchanged.
  auto loo_event = [&](std::size_t q) {
    if (g.t[q] >= tau) return ib_tau;
    const long double fq =
        g.risk[q] > 1 ? 1.0L - static_cast<long double>(g.events[q] - 1) /
                                   (g.risk[q] - 1)
                      : 1.0L;
    const long double fa =
        1.0L - static_cast<long double>(g.events[q]) / g.risk[q];
    const long double prefix = integral(cumB, B, g.t[q]);
    if (fa <= 0.0L) {
      // Everyone at risk dies at t[q], so t[q] is the last observed time
      // and the deleted curve is flat beyond it.
      const long double bprev = q > 0 ? B[q - 1] : 1.0L;
      return prefix + bprev * fq * (static_cast<long double>(tau) - g.t[q]);
    }
    const long double cprev = q > 0 ? C[q - 1] : 1.0L;
    return prefix + cprev * fq / fa * (ia_tau - integral(cumA, A, g.t[q]));
  };

  std::vector<long double> loo_c(m, -1.0L), loo_e(m, -1.0L);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t q = g.group_of[i];
    long double loo;
    if (events[i] == 1) {
      if (loo_e[q] < 0.0L) loo_e[q] = loo_event(q);
      loo = loo_e[q];
    } else {
      if (loo_c[q] < 0.0L) loo_c[q] = loo_censored(q);
      loo = loo_c[q];
    }
    out[i] = static_cast<double>(static_cast<long double>(n) * mu_full -
                                 static_cast<long double>(n - 1) * loo);
  }
  return out;
}

std::size_t PseudoDataset::arm_count(int arm) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(),
                    [arm](const PseudoRow& r) { return r.arm == arm; }));
}

PseudoDataset rmst_pseudo_per_arm(const StudyData& data, double tau) {
  validate_two_arm(data);
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  auto [arm1, arm0] = split_by_arm(data);

  PseudoDataset po;
  po.covariate_names = data.schema.encoded_names;
  po.tau = tau;
  po.provenance = Provenance::main;
  po.rows.resize(data.records.size());

  for (const ArmView* view : {&arm1, &arm0}) {
    const auto times = view->times();
    const auto events = view->events();
    std::vector<std::string> ids(view->size());
    for (std::size_t i = 0; i < view->size(); ++i) ids[i] = view->record(i).id;
    const std::string label =
        "arm " + std::to_string(view == &arm1 ? 1 : 0);
    check_loo_tau_support(times, events, tau, label, ids);
    const auto pseudo = rmst_pseudo_fast(times, events, tau);
    for (std::size_t i = 0; i < view->size(); ++i) {
      const SurvivalRecord& rec = view->record(i);
      PseudoRow& row = po.rows[view->rows[i]];
      row.id = rec.id;
      row.covariates = rec.covariates;
      row.arm = rec.arm;
      row.pseudo_value = pseudo[i];
      row.event = rec.event;
      row.time = rec.time;
    }
  }
  return po;
}

}  // namespace rmstpo
