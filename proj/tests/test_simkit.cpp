#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "budgetwise/core.hpp"
#include "budgetwise/rng.hpp"
#include "budgetwise/simkit.hpp"
#include "support.hpp"

using namespace budgetwise;
using Catch::Matchers::WithinAbs;

TEST_CASE("make_target") {
  const GroupDist u = make_target(TargetKind::uniform, 4);
  for (int z = 0; z < 4; ++z) REQUIRE(u[z] == 0.25);

  const GroupDist inc = make_target(TargetKind::increasing, 4);
  REQUIRE_THAT(inc[0], WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(inc[1], WithinAbs(0.2, 1e-12));
  REQUIRE_THAT(inc[2], WithinAbs(0.3, 1e-12));
  REQUIRE_THAT(inc[3], WithinAbs(0.4, 1e-12));

  const GroupDist pyr = make_target(TargetKind::pyramid, 4);
  REQUIRE_THAT(pyr[0], WithinAbs(1.0 / 6.0, 1e-12));
  REQUIRE_THAT(pyr[1], WithinAbs(2.0 / 6.0, 1e-12));
  REQUIRE_THAT(pyr[2], WithinAbs(2.0 / 6.0, 1e-12));
  REQUIRE_THAT(pyr[3], WithinAbs(1.0 / 6.0, 1e-12));

  REQUIRE(make_target(TargetKind::increasing, 1)[0] == 1.0);
}

TEST_CASE("setting one matches the published table") {
  const auto sources = setting_one();
  REQUIRE(sources.size() == 10);
  // construction already validated that every row sums to one
  REQUIRE(sources[0].dist.probs() == std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0});
  REQUIRE(sources[0].cost == 0.02);
  REQUIRE(sources[4].dist.probs() == std::vector<double>{0.05, 0.25, 0.15, 0.0, 0.55});
  REQUIRE(sources[4].cost == 0.1);
  REQUIRE(sources[9].dist.probs() == std::vector<double>{0.0, 0.5, 0.0, 0.5, 0.0});
}

TEST_CASE("setting two cycles the base distribution") {
  const auto sources = setting_two();
  REQUIRE(sources.size() == 20);
  REQUIRE_THAT(sources[0].dist[0], WithinAbs(0.0057, 1e-12));
  REQUIRE_THAT(sources[0].cost, WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(sources[19].cost, WithinAbs(1.0, 1e-12));
  // source 2 moves the first entry to the back
  REQUIRE_THAT(sources[1].dist[19], WithinAbs(sources[0].dist[0], 1e-12));
  for (int j = 0; j < 19; ++j) {
    REQUIRE_THAT(sources[1].dist[j], WithinAbs(sources[0].dist[j + 1], 1e-12));
  }
}

TEST_CASE("generate_mean_dataset") {
  SECTION("vanishing variance pins responses to the group means") {
    ProblemInstance problem({SourceSpec(GroupDist({0.3, 0.7}), 1.0)}, GroupDist({0.3, 0.7}),
                            100.0);
    const MeanModel model({2.0, -3.0}, 1e-12, 5.0);
    const Dataset data = generate_mean_dataset(SamplingPlan({100}), problem, model, 9);
    for (const auto& r : data.records) {
      REQUIRE_THAT(r.response, WithinAbs(model.mu[static_cast<std::size_t>(r.group)], 1e-5));
    }
  }
  SECTION("sample mean obeys the CLT envelope") {
    ProblemInstance problem({SourceSpec(GroupDist({1.0}), 1.0)}, GroupDist({1.0}), 10000.0);
    const double var = 4.0;
    const MeanModel model({1.5}, var, 2.0);
    const Dataset data = generate_mean_dataset(SamplingPlan({10000}), problem, model, 11);
    double mean = 0.0;
    for (const auto& r : data.records) mean += r.response;
    mean /= 10000.0;
    REQUIRE_THAT(mean, WithinAbs(1.5, 4.0 * std::sqrt(var / 10000.0)));
  }
  SECTION("group frequencies obey the CLT envelope") {
    ProblemInstance problem({SourceSpec(GroupDist({0.3, 0.7}), 1.0)}, GroupDist({0.3, 0.7}),
                            10000.0);
    const MeanModel model({0.0, 0.0}, 1.0, 1.0);
    const Dataset data = generate_mean_dataset(SamplingPlan({10000}), problem, model, 13);
    const auto counts = group_counts(data);
    const double freq = static_cast<double>(counts[0]) / 10000.0;
    REQUIRE_THAT(freq, WithinAbs(0.3, 4.0 * std::sqrt(0.3 * 0.7 / 10000.0)));
  }
  SECTION("empty plan rejected") {
    ProblemInstance problem({SourceSpec(GroupDist({1.0}), 1.0)}, GroupDist({1.0}), 10.0);
    const MeanModel model({0.0}, 1.0, 1.0);
    REQUIRE_THROWS_AS(generate_mean_dataset(SamplingPlan({0}), problem, model, 1),
                      InvalidPlanError);
  }
}

TEST_CASE("generate_probit_dataset") {
  ProblemInstance problem({SourceSpec(GroupDist({1.0}), 1.0)}, GroupDist({1.0}), 20000.0);
  SECTION("zero coefficients give balanced labels") {
    const ProbitModel model({{0.0, 0.0}}, 2);
    const Dataset data = generate_probit_dataset(SamplingPlan({10000}), problem, model, 21);
    double ones = 0.0;
    for (const auto& r : data.records) ones += r.response;
    REQUIRE_THAT(ones / 10000.0, WithinAbs(0.5, 0.02));
  }
  SECTION("saturated link makes labels deterministic") {
    const ProbitModel model({{1000.0}}, 1);
    const Dataset data = generate_probit_dataset(SamplingPlan({10000}), problem, model, 23);
    int agree = 0;
    for (const auto& r : data.records) {
      const int hard = r.features[0] > 0.0 ? 1 : 0;
      if (hard == static_cast<int>(r.response)) ++agree;
    }
    REQUIRE(static_cast<double>(agree) / 10000.0 >= 0.999);
  }
  SECTION("marginal label probability is one half by symmetry") {
    const ProbitModel model({{1.0}}, 1);
    const Dataset data = generate_probit_dataset(SamplingPlan({10000}), problem, model, 25);
    double ones = 0.0;
    for (const auto& r : data.records) ones += r.response;
    REQUIRE_THAT(ones / 10000.0, WithinAbs(0.5, 0.02));
  }
}

TEST_CASE("smaller plans read a prefix of the same source streams") {
  ProblemInstance problem(
      {SourceSpec(GroupDist({0.6, 0.4}), 1.0), SourceSpec(GroupDist({0.2, 0.8}), 1.0)},
      GroupDist({0.5, 0.5}), 100.0);
  const MeanModel model({1.0, -1.0}, 1.0, 1.0);
  const Dataset big = generate_mean_dataset(SamplingPlan({5, 3}), problem, model, 77);
  const Dataset small = generate_mean_dataset(SamplingPlan({3, 7}), problem, model, 77);
  // source 0: records 0..4 in `big`, 0..2 in `small`
  for (int i = 0; i < 3; ++i) {
    REQUIRE(big.records[static_cast<std::size_t>(i)].group ==
            small.records[static_cast<std::size_t>(i)].group);
    REQUIRE(big.records[static_cast<std::size_t>(i)].response ==
            small.records[static_cast<std::size_t>(i)].response);
  }
  // source 1: records 5..7 in `big`, 3..5 in `small`
  for (int i = 0; i < 3; ++i) {
    REQUIRE(big.records[static_cast<std::size_t>(5 + i)].group ==
            small.records[static_cast<std::size_t>(3 + i)].group);
    REQUIRE(big.records[static_cast<std::size_t>(5 + i)].response ==
            small.records[static_cast<std::size_t>(3 + i)].response);
  }
}

TEST_CASE("excess_risk") {
  const ProbitModel truth({{2.0, 1.0}, {-1.0, 3.0}}, 2);
  const GroupDist target({0.5, 0.5});
  SECTION("the truth classifier has zero excess risk") {
    Hypothesis h{truth.betas};
    REQUIRE(excess_risk(h, truth, target, 20000, 31) == 0.0);
  }
  SECTION("the negated classifier pays a large gap") {
    Hypothesis h{{{-2.0, -1.0}, {1.0, -3.0}}};
    REQUIRE(excess_risk(h, truth, target, 20000, 33) > 0.1);
  }
  SECTION("uninformative labels make every hypothesis equivalent") {
    const ProbitModel flat({{0.0}}, 1);
    Hypothesis h{{{5.0}}};
    REQUIRE_THAT(excess_risk(h, flat, GroupDist({1.0}), 50000, 35), WithinAbs(0.0, 0.02));
  }
}

TEST_CASE("run_experiment basics") {
  ExperimentConfig config{{SourceSpec(GroupDist({0.6, 0.4}), 1.0),
                           SourceSpec(GroupDist({0.2, 0.8}), 1.0)},
                          GroupDist({0.5, 0.5}),
                          {20.0, 40.0},
                          1,
                          123,
                          Task::population_mean,
                          5.0,
                          4,
                          2000,
                          "unit",
                          "explicit"};
  SECTION("single replication has zero standard error") {
    const ExperimentResult result = run_experiment(config, {PlanMethod::optimal}, 1);
    REQUIRE(result.curves.size() == 1);
    for (const auto& pt : result.curves[0].points) {
      REQUIRE(pt.se == 0.0);
      REQUIRE(pt.replications == 1);
    }
  }
  SECTION("identical config and seed give bit-identical curves at any worker count") {
    ExperimentConfig heavy = config;
    heavy.replications = 8;
    heavy.task = Task::classification;
    const auto methods = {PlanMethod::optimal, PlanMethod::uniform};
    const ExperimentResult a = run_experiment(heavy, methods, 1);
    const ExperimentResult b = run_experiment(heavy, methods, 2);
    REQUIRE(a.curves.size() == b.curves.size());
    for (std::size_t c = 0; c < a.curves.size(); ++c) {
      for (std::size_t i = 0; i < a.curves[c].points.size(); ++i) {
        REQUIRE(a.curves[c].points[i].mean_risk == b.curves[c].points[i].mean_risk);
        REQUIRE(a.curves[c].points[i].se == b.curves[c].points[i].se);
      }
    }
  }
  SECTION("an infeasible baseline is recorded as a missing cell") {
    ExperimentConfig skewed{{SourceSpec(GroupDist({0.6, 0.4}), 1.0),
                             SourceSpec(GroupDist({0.2, 0.8}), 100.0)},
                            GroupDist({0.5, 0.5}),
                            {50.0},
                            2,
                            123,
                            Task::population_mean,
                            5.0,
                            4,
                            2000,
                            "unit",
                            "explicit"};
    // uniform needs floor(50 / 101) = 0 samples per source
    const ExperimentResult result =
        run_experiment(skewed, {PlanMethod::optimal, PlanMethod::uniform}, 1);
    REQUIRE(result.failed_cells == 1);
    REQUIRE(std::isnan(result.curves[1].points[0].mean_risk));
    REQUIRE(result.curves[1].points[0].replications == 0);
    REQUIRE_FALSE(std::isnan(result.curves[0].points[0].mean_risk));
  }
}
