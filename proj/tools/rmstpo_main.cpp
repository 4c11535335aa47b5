#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rmstpo/dataset.hpp"
#include "rmstpo/errors.hpp"
#include "rmstpo/estimators.hpp"
#include "rmstpo/pseudo.hpp"
#include "rmstpo/sensitivity.hpp"
#include "rmstpo/simulate.hpp"

namespace {

struct RunConfig {
  std::string input;
  double tau = 0.0;
  std::string method = "tmle";
  std::string learners = "mean,glm,glm_tx,glm_sq";
  int folds = 10;
  std::string g_bounds = "0.025,0.975";
  std::uint64_t seed = 1;
  std::string out;
  int threads = 1;
  std::string scenario;
  std::size_t n = 100;
  bool truth = false;
};

std::pair<double, double> parse_g_bounds(const std::string& s) {
  const std::size_t comma = s.find(',');
  if (comma == std::string::npos) {
    throw rmstpo::ValidationError("--g-bounds expects 'lo,hi'");
  }
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(s.substr(0, comma));
    hi = std::stod(s.substr(comma + 1));
  } catch (const std::exception&) {
    throw rmstpo::ValidationError("--g-bounds expects two numbers: '" + s + "'");
  }
  if (!(lo > 0.0 && lo < 0.5 && hi > 0.5 && hi < 1.0)) {
    throw rmstpo::ValidationError(
        "--g-bounds must satisfy 0 < lo < 0.5 < hi < 1");
  }
  return {lo, hi};
}

rmstpo::NuisanceConfig nuisance_config(const RunConfig& cfg) {
  rmstpo::NuisanceConfig nc;
  nc.outcome_learners = rmstpo::parse_learners(cfg.learners);
  nc.propensity_learners = nc.outcome_learners;
  if (cfg.folds < 2) throw rmstpo::ValidationError("--folds must be at least 2");
  nc.folds = cfg.folds;
  nc.seed = cfg.seed;
  std::tie(nc.g_lower, nc.g_upper) = parse_g_bounds(cfg.g_bounds);
  return nc;
}

void require_tau(const RunConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw rmstpo::ValidationError("--tau must be positive");
}

// Configuration echo carried in the report diagnostics.
std::string config_note(const RunConfig& cfg) {
  std::ostringstream os;
  os << "config: method=" << cfg.method << " tau=" << cfg.tau
     << " learners=" << cfg.learners << " folds=" << cfg.folds
     << " g_bounds=" << cfg.g_bounds << " seed=" << cfg.seed
     << " threads=" << cfg.threads;
  return os.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw rmstpo::ValidationError("cannot write file: " + out_path);
  out << text;
}

int cmd_pseudo(const RunConfig& cfg) {
  require_tau(cfg);
  const rmstpo::CsvTable table = rmstpo::parse_csv_file(cfg.input);
  const rmstpo::StudyData data = rmstpo::encode(table);
  const rmstpo::PseudoDataset po = rmstpo::rmst_pseudo_per_arm(data, cfg.tau);

  std::ostringstream out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << table.header[c] << ",";
  }
  out << "pseudo_value\n";
  char buf[40];
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (const std::string& cell : table.rows[r]) out << cell << ",";
    std::snprintf(buf, sizeof(buf), "%.10g", po.rows[r].pseudo_value);
    out << buf << "\n";
  }
  emit(out.str(), cfg.out);
  return 0;
}

int cmd_estimate(const RunConfig& cfg) {
  require_tau(cfg);
  const rmstpo::NuisanceConfig nc = nuisance_config(cfg);
  const rmstpo::StudyData data = rmstpo::load_csv(cfg.input);
  const rmstpo::PseudoDataset po = rmstpo::rmst_pseudo_per_arm(data, cfg.tau);
  rmstpo::EstimateReport report =
      rmstpo::estimate(po, rmstpo::method_from_name(cfg.method), nc);
  report.diagnostics.notes.push_back(config_note(cfg));
  emit(report.to_json().dump(2) + "\n", cfg.out);
  return 0;
}

int cmd_sensitivity_cr(const RunConfig& cfg) {
  require_tau(cfg);
  const rmstpo::NuisanceConfig nc = nuisance_config(cfg);
  const rmstpo::StudyData data = rmstpo::load_csv(cfg.input);
  rmstpo::CRResult result = rmstpo::run_cr_analysis(
      data, cfg.tau, rmstpo::method_from_name(cfg.method), nc);
  result.main_report.diagnostics.notes.push_back(config_note(cfg));
  result.cr_report.diagnostics.notes.push_back(config_note(cfg));
  emit(result.to_json().dump(2) + "\n", cfg.out);
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  rmstpo::SimScenario scenario = rmstpo::scenario_by_name(cfg.scenario);
  scenario.seed = cfg.seed;
  if (cfg.truth) {
    const rmstpo::TruthRecord truth = rmstpo::true_rmst(scenario);
    std::cout << truth.to_json().dump(2) << "\n";
    if (!cfg.out.empty()) {
      const rmstpo::StudyData data = rmstpo::generate(scenario, cfg.n);
      std::ostringstream os;
      rmstpo::write_csv(data, os);
      emit(os.str(), cfg.out);
    }
    return 0;
  }
  const rmstpo::StudyData data = rmstpo::generate(scenario, cfg.n);
  std::ostringstream os;
  rmstpo::write_csv(data, os);
  emit(os.str(), cfg.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Restricted mean survival time treatment effects from right-censored "
      "two-arm data via jackknife pseudo-observations"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_data_flags = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "input CSV file")->required();
    sub->add_option("--tau", cfg.tau, "restriction time (days)")->required();
    sub->add_option("--out", cfg.out, "output file (default: stdout)");
  };
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--method", cfg.method,
                    "unadjusted | gee | aiptw | tmle (default tmle)");
    sub->add_option("--learners", cfg.learners,
                    "comma-separated learner names (mean,glm,glm_tx,glm_sq)");
    sub->add_option("--folds", cfg.folds, "cross-validation folds (default 10)");
    sub->add_option("--g-bounds", cfg.g_bounds,
                    "propensity truncation bounds 'lo,hi'");
    sub->add_option("--seed", cfg.seed, "RNG seed (default 1)");
    sub->add_option("--threads", cfg.threads, "worker count cap")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* pseudo = app.add_subcommand(
      "pseudo", "export per-subject RMST pseudo-observations");
  add_data_flags(pseudo);

  CLI::App* estimate =
      app.add_subcommand("estimate", "estimate the RMST difference");
  add_data_flags(estimate);
  add_model_flags(estimate);

  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "sensitivity analyses");
  sensitivity->require_subcommand(1);
  CLI::App* cr = sensitivity->add_subcommand(
      "cr", "copy-reference analysis for censoring at random");
  add_data_flags(cr);
  add_model_flags(cr);

  CLI::App* simulate =
      app.add_subcommand("simulate", "generate synthetic survival data");
  simulate->add_option("--scenario", cfg.scenario, "S0 | S1 | S1-misQ | S1-misG")
      ->required();
  simulate->add_option("--n", cfg.n, "sample size (default 100)");
  simulate->add_option("--seed", cfg.seed, "RNG seed (default 1)");
  simulate->add_flag("--truth", cfg.truth, "print the true RMST contrast as JSON");
  simulate->add_option("--out", cfg.out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (pseudo->parsed()) return cmd_pseudo(cfg);
    if (estimate->parsed()) return cmd_estimate(cfg);
    if (sensitivity->parsed()) return cmd_sensitivity_cr(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
  } catch (const rmstpo::TauSupportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const rmstpo::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rmstpo::EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
