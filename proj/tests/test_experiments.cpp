#include <doctest.h>

#include <cmath>

#include "proshape/experiments.hpp"
#include "proshape/report.hpp"

using namespace proshape;

TEST_SUITE("experiments") {
  TEST_CASE("two-user instance layout") {
    const Instance inst = two_user_instance(0.9);
    CHECK(validate_profile(inst.profile).empty());
    CHECK(inst.profile.prob(0, 1, 0) == doctest::Approx(0.72));
    CHECK(inst.profile.prob(1, 0, 2) == doctest::Approx(0.06));
    CHECK(inst.profile.silence(1, 1) == doctest::Approx(0.1));
    CHECK(two_user_ratings().size() == 2);
    CHECK(two_user_cost(CostKind::outage).mu() == kTwoUserCapacity);
  }

  TEST_CASE("quadratic reproduction: sweep, shaping and ratings") {
    const TwoUserReport rep = reproduce_two_user(CostKind::quadratic);
    REQUIRE(rep.sweep.size() == 9);
    for (const SweepPoint& p : rep.sweep) {
      CHECK(p.feasible);
      CHECK(p.c_proactive <= p.c_nonproactive);
    }
    // Near-stationary demand leaves nothing worth prefetching; once the peak
    // is strong enough proactive service strictly wins.
    for (std::size_t k = 4; k < rep.sweep.size(); ++k) {
      CHECK(rep.sweep[k].c_proactive < rep.sweep[k].c_nonproactive);
    }
    CHECK(rep.sweep.back().c_nonproactive == doctest::Approx(19.56).epsilon(1e-12));
    for (std::size_t k = 1; k < rep.sweep.size(); ++k) {
      CHECK(rep.sweep[k].c_nonproactive > rep.sweep[k - 1].c_nonproactive);
    }
    CHECK(rep.trace.converged);
    REQUIRE(rep.users.size() == 2);
    for (const ShapedUser& u : rep.users) {
      CHECK(std::abs(u.distance - u.target) <= 1e-3);
      CHECK(u.rating.v.size() == 3);
    }
    const std::vector<double> published{0.7985, 0.1112, 0.0005};
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(std::abs(rep.users[0].rating.v[m] - published[m]) <= 5e-3);
    }
  }

  TEST_CASE("outage reproduction descends") {
    const TwoUserReport rep = reproduce_two_user(CostKind::outage);
    for (const SweepPoint& p : rep.sweep) {
      CHECK(p.feasible);
      CHECK(p.c_proactive <= p.c_nonproactive);
    }
    CHECK(rep.sweep.back().c_proactive < rep.sweep.back().c_nonproactive);
    const auto& it = rep.trace.iterates;
    REQUIRE(it.size() >= 2);
    CHECK(it.back().f0 < it.front().f0);
  }

  TEST_CASE("report tables") {
    const TwoUserReport rep = reproduce_two_user(CostKind::quadratic);
    const CsvTable sweep = sweep_table(rep.sweep);
    CHECK(sweep.header ==
          std::vector<std::string>{"p_peak", "feasible", "c_nonproactive", "c_proactive"});
    CHECK(sweep.rows.size() == 9);
    CHECK(sweep.rows[8][2] == "19.56");
    const std::string text = trace_table(rep.trace).str();
    CHECK(text.rfind("iter,f0,residual\n0,", 0) == 0);
    CHECK(shaped_users_table(rep.users).rows.size() == 6);
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");

    RunReport run;
    run.command = "reproduce-paper";
    run.metrics["x"] = 1;
    const auto j = run.to_json();
    CHECK(j["tool"] == "proshape");
    CHECK(j["version"] == tool_version());
    CHECK(j.begin().key() == "tool");
  }

  TEST_CASE("small scaling ladder") {
    const ScalingCurve curve = reproduce_scaling(7, {10, 20, 40});
    REQUIRE(curve.points.size() == 3);
    for (const ScalingPoint& p : curve.points) {
      CHECK(p.converged);
      CHECK(p.delta_c > 0.0);
      CHECK(p.ratio == doctest::Approx(p.delta_c / p.c_nonproactive));
    }
    CHECK(curve.exponent > 1.5);
    CHECK(curve.exponent < 2.5);
    CHECK(scaling_table(curve).rows.size() == 3);
  }
}
