#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "rmstpo/simulate.hpp"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string command = std::string(RMSTPO_CLI) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buffer{};
  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t got;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("simulate is byte-identical across invocations") {
  const CliResult a = run_cli("simulate --scenario S0 --n 100 --seed 1");
  const CliResult b = run_cli("simulate --scenario S0 --n 100 --seed 1");
  CHECK(a.exit_code == 0);
  CHECK(!a.output.empty());
  CHECK(a.output == b.output);
}

TEST_CASE("simulate --truth prints the integrated contrast") {
  const CliResult r = run_cli("simulate --scenario S1 --truth");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  const rmstpo::TruthRecord truth =
      rmstpo::true_rmst(rmstpo::scenario_by_name("S1"));
  CHECK(std::abs(j["theta_true"].get<double>() - truth.theta_true) < 1e-6);
  CHECK(j["method"] == "numeric_integration");
}

TEST_CASE("unknown scenario exits with the validation code") {
  CHECK(run_cli("simulate --scenario bogus").exit_code == 2);
}

TEST_CASE("pseudo echoes the input columns and appends the pseudo-value column") {
  const auto path = temp_file("rmstpo_cli_pseudo.csv");
  write_file(path,
             "id,arm,time,event,age\n"
             "a,1,2,1,30\n"
             "b,1,4,1,40\n"
             "c,0,1,1,50\n"
             "d,0,3,1,60\n");
  const CliResult r = run_cli("pseudo --input " + path.string() + " --tau 2");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.output);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "id,arm,time,event,age,pseudo_value");
  // All events: pseudo-values are min(Y, tau) = 2, 2, 1, 2.
  std::vector<std::string> expect = {"a,1,2,1,30,2", "b,1,4,1,40,2",
                                     "c,0,1,1,50,1", "d,0,3,1,60,2"};
  for (const auto& e : expect) {
    std::getline(lines, line);
    CHECK(line == e);
  }
}

TEST_CASE("pseudo with an unsupported tau exits with the support code") {
  const auto path = temp_file("rmstpo_cli_tau.csv");
  write_file(path,
             "id,arm,time,event\n"
             "a,1,2,1\nb,1,4,0\nc,0,1,1\nd,0,3,1\n");
  const CliResult r =
      run_cli("pseudo --input " + path.string() + " --tau 1e9");
  CHECK(r.exit_code == 3);
}

TEST_CASE("validation failures exit with code 2") {
  const auto path = temp_file("rmstpo_cli_bad.csv");
  write_file(path, "id,arm,time\na,1,2\n");
  CHECK(run_cli("pseudo --input " + path.string() + " --tau 1").exit_code == 2);
  CHECK(run_cli("estimate --input /no/such/file.csv --tau 1").exit_code == 2);
}

TEST_CASE("estimate emits exactly the documented JSON fields") {
  const auto path = temp_file("rmstpo_cli_s1.csv");
  {
    const rmstpo::StudyData data =
        rmstpo::generate(rmstpo::scenario_by_name("S1"), 300, 5);
    std::ofstream out(path);
    rmstpo::write_csv(data, out);
  }
  const CliResult r = run_cli("estimate --input " + path.string() +
                              " --tau 8 --method gee");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  const std::vector<std::string> fields = {"method",  "tau",    "estimate",
                                           "se",      "ci_low", "ci_high",
                                           "p_value", "n1",     "n0",
                                           "diagnostics"};
  CHECK(j.size() == fields.size());
  for (const auto& f : fields) CHECK(j.contains(f));
  CHECK(j["method"] == "gee");
  CHECK(j["n1"].get<int>() + j["n0"].get<int>() == 300);
}

TEST_CASE("unadjusted estimate on constant pseudo-values is zero through the pipeline") {
  const auto path = temp_file("rmstpo_cli_const.csv");
  write_file(path,
             "id,arm,time,event\n"
             "a,1,5,1\nb,1,5,1\nc,0,5,1\nd,0,5,1\n");
  const CliResult r = run_cli("estimate --input " + path.string() +
                              " --tau 5 --method unadjusted");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["estimate"].get<double>() == 0.0);
  CHECK(j["se"].get<double>() == 0.0);
}

TEST_CASE("sensitivity cr reports main, cr, replaced count and delta") {
  const auto path = temp_file("rmstpo_cli_cr.csv");
  write_file(path,
             "id,arm,time,event\n"
             "a,1,4,1\nb,1,6,0\nc,1,9,1\nd,1,11,0\n"
             "f,0,3,1\ng,0,5,0\nh,0,8,1\ni,0,10,1\nj,0,12,0\n");
  const CliResult r = run_cli("sensitivity cr --input " + path.string() +
                              " --tau 8 --method unadjusted");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j.contains("main"));
  CHECK(j.contains("cr"));
  CHECK(j["replaced_count"].get<int>() == 2);
  CHECK(j["delta"].get<double>() ==
        doctest::Approx(j["cr"]["estimate"].get<double>() -
                        j["main"]["estimate"].get<double>()));
}

TEST_CASE("uncensored data has zero copy-reference delta") {
  const auto path = temp_file("rmstpo_cli_cr0.csv");
  write_file(path,
             "id,arm,time,event\n"
             "a,1,4,1\nb,1,6,1\nc,0,3,1\nd,0,5,1\n");
  const CliResult r = run_cli("sensitivity cr --input " + path.string() +
                              " --tau 4 --method unadjusted");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["delta"].get<double>() == 0.0);
  CHECK(j["replaced_count"].get<int>() == 0);
}

TEST_CASE("estimation failures exit with code 4") {
  const auto path = temp_file("rmstpo_cli_rank.csv");
  // covariate identical to the arm indicator: collinear design for gee
  write_file(path,
             "id,arm,time,event,z\n"
             "a,1,4,1,1\nb,1,6,1,1\nc,0,3,1,0\nd,0,5,1,0\n");
  const CliResult r = run_cli("estimate --input " + path.string() +
                              " --tau 4 --method gee");
  CHECK(r.exit_code == 4);
}

TEST_CASE("the learner library is selectable by name") {
  const auto path = temp_file("rmstpo_cli_learners.csv");
  {
    const rmstpo::StudyData data =
        rmstpo::generate(rmstpo::scenario_by_name("S1"), 200, 9);
    std::ofstream out(path);
    rmstpo::write_csv(data, out);
  }
  const CliResult r = run_cli("estimate --input " + path.string() +
                              " --tau 8 --method tmle --learners mean,glm" +
                              " --folds 5 --seed 3");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  const auto& weights = j["diagnostics"]["outcome_weights"];
  CHECK(weights.contains("mean"));
  CHECK(weights.contains("glm"));
  CHECK(!weights.contains("glm_sq"));
}

TEST_CASE("sensitivity cr emits exactly the documented fields") {
  const auto path = temp_file("rmstpo_cli_crfields.csv");
  write_file(path,
             "id,arm,time,event\n"
             "a,1,4,1\nb,1,6,0\nc,1,9,1\nd,1,11,0\n"
             "f,0,3,1\ng,0,5,0\nh,0,8,1\ni,0,10,1\nj,0,12,0\n");
  const CliResult r = run_cli("sensitivity cr --input " + path.string() +
                              " --tau 8 --method unadjusted");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j.size() == 4);
  for (const char* f : {"main", "cr", "replaced_count", "delta"}) {
    CHECK(j.contains(f));
  }
}

TEST_CASE("bad g-bounds are rejected as validation errors") {
  const auto path = temp_file("rmstpo_cli_gb.csv");
  write_file(path,
             "id,arm,time,event\n"
             "a,1,4,1\nb,1,6,1\nc,0,3,1\nd,0,5,1\n");
  const CliResult r = run_cli("estimate --input " + path.string() +
                              " --tau 4 --g-bounds 0.6,0.9");
  CHECK(r.exit_code == 2);
}
