#include "rmstpo/super_learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rmstpo/errors.hpp"
#include "rmstpo/rng.hpp"

namespace rmstpo {

namespace {

bool is_binary_column(const Eigen::VectorXd& col) {
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (col[i] != 0.0 && col[i] != 1.0) return false;
  }
  return true;
}

struct Expanded {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
};

// Feature map of one learner over the base design.
Expanded expand(const BaseDesign& design, LearnerKind kind) {
  const Eigen::Index n = design.columns.rows();
  const Eigen::Index d = design.columns.cols();
  Expanded out;
  if (kind == LearnerKind::mean) {
    out.X.resize(n, 0);
    return out;
  }
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index j = 0; j < d; ++j) {
    cols.push_back(design.columns.col(j));
    out.names.push_back(design.names[static_cast<std::size_t>(j)]);
  }
  if (kind == LearnerKind::glm_tx && design.treatment_column) {
    const Eigen::Index a = static_cast<Eigen::Index>(*design.treatment_column);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j == a) continue;
      cols.push_back(design.columns.col(a).cwiseProduct(design.columns.col(j)));
      out.names.push_back(design.names[static_cast<std::size_t>(a)] + ":" +
                          design.names[static_cast<std::size_t>(j)]);
    }
  }
  if (kind == LearnerKind::glm_sq) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (design.treatment_column &&
          j == static_cast<Eigen::Index>(*design.treatment_column)) {
        continue;
      }
      if (is_binary_column(design.columns.col(j))) continue;
      cols.push_back(design.columns.col(j).cwiseProduct(design.columns.col(j)));
      out.names.push_back(design.names[static_cast<std::size_t>(j)] + "^2");
    }
  }
  out.X.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.X.col(static_cast<Eigen::Index>(j)) = cols[j];
  }
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X,
                          const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        X.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v,
                          const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
  }
  return out;
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

std::string LearnerSpec::name() const {
  switch (kind) {
    case LearnerKind::mean: return "mean";
    case LearnerKind::glm: return "glm";
    case LearnerKind::glm_tx: return "glm_tx";
    case LearnerKind::glm_sq: return "glm_sq";
  }
  return "?";
}

std::vector<LearnerSpec> parse_learners(const std::string& csv) {
  std::vector<LearnerSpec> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string token =
        csv.substr(start, comma == std::string::npos ? comma : comma - start);
    if (token == "mean") {
      out.push_back({LearnerKind::mean});
    } else if (token == "glm") {
      out.push_back({LearnerKind::glm});
    } else if (token == "glm_tx") {
      out.push_back({LearnerKind::glm_tx});
    } else if (token == "glm_sq") {
      out.push_back({LearnerKind::glm_sq});
    } else {
      throw ValidationError("unknown learner: '" + token + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ValidationError("empty learner library");
  return out;
}

std::vector<LearnerSpec> default_learner_library() {
  return {{LearnerKind::mean},
          {LearnerKind::glm},
          {LearnerKind::glm_tx},
          {LearnerKind::glm_sq}};
}

FoldPlan make_stratified_folds(const std::vector<int>& arm, int folds,
                               std::uint64_t seed) {
  if (folds < 2) throw ValidationError("fold count must be at least 2");
  FoldPlan plan;
  plan.folds = folds;
  plan.seed = seed;
  plan.assignment.assign(arm.size(), -1);
  Rng rng(seed);
  for (int a : {1, 0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < arm.size(); ++i) {
      if (arm[i] == a) idx.push_back(i);
    }
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      plan.assignment[idx[k]] = static_cast<int>(k % folds);
    }
  }
  std::vector<int> count(folds, 0);
  for (int f : plan.assignment) {
    if (f < 0) throw ValidationError("fold plan: rows with arm outside {0,1}");
    ++count[f];
  }
  for (int c : count) {
    if (c == 0) {
      throw ValidationError("fold plan: a fold is empty (too few rows for " +
                            std::to_string(folds) + " folds)");
    }
  }
  return plan;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
  const Eigen::Index p = Z.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  std::vector<bool> passive(p, false);
  const double tol = 1e-10 * std::max(1.0, (Z.transpose() * y).cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 3 * static_cast<int>(p) + 10; ++outer) {
    const Eigen::VectorXd w = Z.transpose() * (y - Z * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    for (;;) {
      std::vector<Eigen::Index> act;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (passive[j]) act.push_back(j);
      }
      Eigen::MatrixXd Zp(Z.rows(), static_cast<Eigen::Index>(act.size()));
      for (std::size_t k = 0; k < act.size(); ++k) {
        Zp.col(static_cast<Eigen::Index>(k)) = Z.col(act[k]);
      }
      const Eigen::VectorXd sp = Zp.householderQr().solve(y);
      bool feasible = true;
      for (Eigen::Index k = 0; k < sp.size(); ++k) {
        if (sp[k] <= 0.0) feasible = false;
      }
      if (feasible) {
        x.setZero();
        for (std::size_t k = 0; k < act.size(); ++k) {
          x[act[k]] = sp[static_cast<Eigen::Index>(k)];
        }
        break;
      }
      // Step to the boundary and drop the variables pinned at zero.
      double alpha = 1.0;
      for (std::size_t k = 0; k < act.size(); ++k) {
        const double s = sp[static_cast<Eigen::Index>(k)];
        if (s <= 0.0) {
          const double xi = x[act[k]];
          if (xi - s > 0.0) alpha = std::min(alpha, xi / (xi - s));
        }
      }
      for (std::size_t k = 0; k < act.size(); ++k) {
        const double s = sp[static_cast<Eigen::Index>(k)];
        x[act[k]] += alpha * (s - x[act[k]]);
      }
      for (Eigen::Index j = 0; j < p; ++j) {
        if (passive[j] && x[j] <= 1e-12) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

EnsembleModel fit_super_learner(const BaseDesign& design,
                                const Eigen::VectorXd& response,
                                const std::vector<LearnerSpec>& library,
                                const FoldPlan& folds, Family family) {
  const std::size_t n = static_cast<std::size_t>(design.columns.rows());
  if (library.empty()) throw ValidationError("empty learner library");
  if (folds.assignment.size() != n) {
    throw ValidationError("fold plan does not match the data size");
  }

  std::vector<std::vector<std::size_t>> train(folds.folds), test(folds.folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (int v = 0; v < folds.folds; ++v) {
      (folds.assignment[i] == v ? test[v] : train[v]).push_back(i);
    }
  }

  EnsembleModel model;
  model.family = family;
  model.folds = folds;

  std::vector<Eigen::VectorXd> oof;  // per surviving learner
  for (const LearnerSpec& spec : library) {
    const Expanded ex = expand(design, spec.kind);
    Eigen::VectorXd pred(n);
    bool ok = true;
    for (int v = 0; v < folds.folds && ok; ++v) {
      try {
        const GlmFit fit = fit_glm(take_rows(ex.X, train[v]),
                                   take_rows(response, train[v]), family,
                                   ex.names);
        const Eigen::VectorXd pv = predict(fit, take_rows(ex.X, test[v]));
        for (std::size_t k = 0; k < test[v].size(); ++k) {
          pred[static_cast<Eigen::Index>(test[v][k])] =
              pv[static_cast<Eigen::Index>(k)];
        }
      } catch (const Error& e) {
        model.dropped.push_back(spec.name() + ": " + e.what());
        ok = false;
      }
    }
    if (!ok) continue;
    model.library.push_back(spec);
    oof.push_back(std::move(pred));
  }
  if (model.library.empty()) {
    throw EstimationError("super learner: every base learner failed");
  }

  const std::size_t L = model.library.size();
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(L));
  model.cv_risks.resize(static_cast<Eigen::Index>(L));
  for (std::size_t l = 0; l < L; ++l) {
    Z.col(static_cast<Eigen::Index>(l)) = oof[l];
    model.cv_risks[static_cast<Eigen::Index>(l)] = mse(oof[l], response);
  }

  // The convex-combination objective is location-equivariant; centering
  // keeps the unconstrained NNLS stage consistent with it.
  const double center = response.mean();
  const Eigen::MatrixXd Zc = Z.array() - center;
  const Eigen::VectorXd yc = response.array() - center;
  Eigen::VectorXd w = nnls(Zc, yc);
  Eigen::Index best_single = 0;
  model.cv_risks.minCoeff(&best_single);
  if (w.sum() <= 0.0) {
    w.setZero();
    w[best_single] = 1.0;
  } else {
    w /= w.sum();
  }
  // The normalized cone solution is almost always at least as good
  // out-of-fold as any single learner; fall back when it is not.
  if (mse(Z * w, response) >
      model.cv_risks[best_single] + 1e-12 * (1.0 + model.cv_risks[best_single])) {
    w.setZero();
    w[best_single] = 1.0;
  }
  model.weights = w;
  model.ensemble_cv_risk = mse(Z * w, response);

  for (const LearnerSpec& spec : model.library) {
    const Expanded ex = expand(design, spec.kind);
    model.base_fits.push_back(
        fit_glm(ex.X, response, family, ex.names));
  }
  return model;
}

Eigen::VectorXd predict(const EnsembleModel& model, const BaseDesign& design) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(design.columns.rows());
  for (std::size_t l = 0; l < model.library.size(); ++l) {
    const Expanded ex = expand(design, model.library[l].kind);
    out += model.weights[static_cast<Eigen::Index>(l)] *
           predict(model.base_fits[l], ex.X);
  }
  return out;
}

}  // namespace rmstpo
