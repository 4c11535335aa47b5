#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "rmstpo/errors.hpp"
#include "rmstpo/rng.hpp"
#include "rmstpo/survival.hpp"

using namespace rmstpo;

TEST_CASE("product-limit curve for the four-point sample") {
  const StepSurvival s = kaplan_meier({1, 2, 3, 4}, {1, 0, 1, 1});
  REQUIRE(s.times == std::vector<double>{1, 2, 3, 4});
  CHECK(s.survival[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.survival[1] == doctest::Approx(0.75).epsilon(1e-15));  // censoring
  CHECK(s.survival[2] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(s.survival[3] == 0.0);
  CHECK(s.at_risk == std::vector<int>{4, 3, 2, 1});
  CHECK(s.events == std::vector<int>{1, 0, 1, 1});
}

TEST_CASE("without censoring the curve is the empirical survival function") {
  const StepSurvival s = kaplan_meier({1, 2, 3}, {1, 1, 1});
  CHECK(s.survival[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(s.survival[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(s.survival[2] == 0.0);
}

TEST_CASE("a single event gives a one-step curve") {
  const StepSurvival s = kaplan_meier({5}, {1});
  REQUIRE(s.times.size() == 1);
  CHECK(s.survival[0] == 0.0);
}

TEST_CASE("ties: events precede censorings at the same time") {
  // Censored subject at t=2 stays in the risk set for the event at t=2.
  const StepSurvival s = kaplan_meier({1, 2, 2, 3}, {1, 1, 0, 1});
  CHECK(s.survival[0] == doctest::Approx(0.75));
  CHECK(s.survival[1] == doctest::Approx(0.75 * (1.0 - 1.0 / 3)));
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(kaplan_meier({}, {}), ValidationError);
}

TEST_CASE("restricted mean of the four-point sample is exactly 2.875") {
  const StepSurvival s = kaplan_meier({1, 2, 3, 4}, {1, 0, 1, 1});
  CHECK(rmst(s, 4.0).value == 2.875);  // 1*1 + 0.75*2 + 0.375*1
}

TEST_CASE("restricted mean equals the truncated sample mean without censoring") {
  const StepSurvival s = kaplan_meier({1, 2, 3}, {1, 1, 1});
  CHECK(rmst(s, 3.0).value == doctest::Approx(2.0).epsilon(1e-15));

  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> t;
    std::vector<int> e;
    for (int i = 0; i < 50; ++i) {
      t.push_back(rng.exponential(0.1));
      e.push_back(1);
    }
    const double tau = testutil::safe_tau(t);
    double truncated_mean = 0.0;
    for (double ti : t) truncated_mean += std::min(ti, tau);
    truncated_mean /= static_cast<double>(t.size());
    CHECK(rmst(kaplan_meier(t, e), tau).value ==
          doctest::Approx(truncated_mean).epsilon(1e-12));
  }
}

TEST_CASE("tau before the first event leaves the area at tau") {
  const StepSurvival s = kaplan_meier({10, 11, 12}, {1, 1, 0});
  CHECK(rmst(s, 4.0).value == 4.0);
}

TEST_CASE("tau beyond the data support is an error carrying the largest valid tau") {
  const StepSurvival s = kaplan_meier({1, 2, 3}, {1, 1, 0});
  try {
    rmst(s, 3.5);
    FAIL("expected TauSupportError");
  } catch (const TauSupportError& e) {
    CHECK(e.max_valid_tau() == 3.0);
  }
}

TEST_CASE("restricted mean is nondecreasing in tau") {
  Rng rng(7);
  std::vector<double> t;
  std::vector<int> e;
  testutil::random_sample(rng, 80, 0.4, t, e);
  const StepSurvival s = kaplan_meier(t, e);
  const double top = s.max_time();
  double prev = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double value = rmst(s, top * k / 20.0).value;
    CHECK(value >= prev);
    prev = value;
  }
}

TEST_CASE("scaling all times and tau scales the restricted mean") {
  Rng rng(11);
  std::vector<double> t;
  std::vector<int> e;
  testutil::random_sample(rng, 60, 0.3, t, e);
  const double tau = testutil::safe_tau(t);
  const double base = rmst(kaplan_meier(t, e), tau).value;
  const double c = 3.25;
  std::vector<double> scaled(t);
  for (double& ti : scaled) ti *= c;
  CHECK(rmst(kaplan_meier(scaled, e), tau * c).value ==
        doctest::Approx(c * base).epsilon(1e-12));
}

TEST_CASE("curves satisfy the product-limit identity on random data") {
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> t;
    std::vector<int> e;
    testutil::random_sample(rng, 70, 0.5, t, e);
    const StepSurvival s = kaplan_meier(t, e);
    double expected = 1.0;
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      if (k > 0) CHECK(s.at_risk[k] < s.at_risk[k - 1]);
      expected *= 1.0 - static_cast<double>(s.events[k]) / s.at_risk[k];
      CHECK(s.survival[k] == doctest::Approx(expected).epsilon(1e-14));
      if (k > 0) CHECK(s.survival[k] <= s.survival[k - 1]);
    }
  }
}

TEST_CASE("curve export is a two-column CSV starting at full survival") {
  const StepSurvival s = kaplan_meier({1, 2, 3, 4}, {1, 0, 1, 1});
  std::ostringstream out;
  write_curve_csv(s, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "time,survival");
  std::getline(lines, line);
  CHECK(line == "0,1");
  std::getline(lines, line);
  CHECK(line == "1,0.75");
}

TEST_CASE("plug-in difference of hand-computed arms") {
  const StudyData data = testutil::make_study({
      {"a", 1, 2, 1, {}},
      {"b", 1, 3, 1, {}},
      {"c", 0, 1, 1, {}},
      {"d", 0, 2, 1, {}},
  });
  CHECK(rmst_difference_plugin(data, 3.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("identical arms have zero plug-in difference") {
  const StudyData data = testutil::make_study({
      {"a", 1, 2, 1, {}},
      {"b", 1, 5, 0, {}},
      {"c", 0, 2, 1, {}},
      {"d", 0, 5, 0, {}},
  });
  CHECK(rmst_difference_plugin(data, 4.0) == 0.0);
}
