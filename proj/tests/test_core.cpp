#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "budgetwise/core.hpp"
#include "support.hpp"

using namespace budgetwise;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("GroupDist validates and renormalizes") {
  GroupDist g({0.5, 0.5 + 5e-10});
  double sum = 0.0;
  for (double p : g.probs()) sum += p;
  REQUIRE(sum == 1.0);

  REQUIRE_THROWS_AS(GroupDist({0.5, 0.6}), DomainError);
  REQUIRE_THROWS_AS(GroupDist({-0.1, 1.1}), DomainError);
  REQUIRE_THROWS_AS(GroupDist({}), DomainError);
  REQUIRE(GroupDist::uniform(4)[2] == 0.25);
}

TEST_CASE("ProblemInstance invariants") {
  REQUIRE_THROWS_AS(ProblemInstance({}, GroupDist({1.0}), 10.0), DomainError);
  REQUIRE_THROWS_AS(
      ProblemInstance({SourceSpec(GroupDist({1.0}), 1.0)}, GroupDist({1.0}), 0.0), DomainError);
  REQUIRE_THROWS_AS(SourceSpec(GroupDist({1.0}), 0.0), DomainError);
  // a target group no source can produce
  REQUIRE_THROWS_AS(ProblemInstance({SourceSpec(GroupDist({1.0, 0.0}), 1.0)},
                                    GroupDist({0.5, 0.5}), 10.0),
                    InfeasibleError);
  REQUIRE_THROWS_AS(ProblemInstance({SourceSpec(GroupDist({1.0}), 1.0)},
                                    GroupDist({0.5, 0.5}), 10.0),
                    DimensionError);
  REQUIRE_THROWS_AS(SamplingPlan({1, -1}), DomainError);
}

TEST_CASE("mixture") {
  SECTION("single source is the identity") {
    ProblemInstance problem({SourceSpec(GroupDist({0.3, 0.7}), 1.0)}, GroupDist({0.3, 0.7}), 10.0);
    const GroupDist mix = mixture(SamplingPlan({7}), problem);
    REQUIRE_THAT(mix[0], WithinAbs(0.3, 1e-15));
    REQUIRE_THAT(mix[1], WithinAbs(0.7, 1e-15));
  }
  SECTION("clinic allocation") {
    const auto problem = bwtest::clinic_problem();
    const GroupDist mix = mixture(SamplingPlan({152, 424}), problem);
    // hand arithmetic: (0.8*152 + 0.25*424) / 576
    REQUIRE_THAT(mix[0], WithinAbs((0.8 * 152 + 0.25 * 424) / 576.0, 1e-12));
    REQUIRE_THAT(mix[0], WithinAbs(0.39514, 1e-5));
    REQUIRE_THAT(mix[1], WithinAbs(0.60486, 1e-5));
  }
  SECTION("disjoint sources blend by counts") {
    ProblemInstance problem(
        {SourceSpec(GroupDist({1.0, 0.0}), 1.0), SourceSpec(GroupDist({0.0, 1.0}), 1.0)},
        GroupDist({0.5, 0.5}), 10.0);
    const GroupDist mix = mixture(SamplingPlan({1, 1}), problem);
    REQUIRE(mix[0] == 0.5);
    REQUIRE(mix[1] == 0.5);
  }
  SECTION("empty plan rejected") {
    const auto problem = bwtest::clinic_problem();
    REQUIRE_THROWS_AS(mixture(SamplingPlan({0, 0}), problem), InvalidPlanError);
  }
}

TEST_CASE("chi2_discrepancy") {
  SECTION("equality case") {
    const GroupDist q({0.2, 0.3, 0.5});
    REQUIRE_THAT(chi2_discrepancy(q, q), WithinAbs(1.0, 1e-12));
  }
  SECTION("clinic value") {
    const auto problem = bwtest::clinic_problem();
    const GroupDist mix = mixture(SamplingPlan({152, 424}), problem);
    const double expected = 36.0 / 227.6 + 324.0 / 348.4;  // a^2/b at the exact mixture
    REQUIRE_THAT(chi2_discrepancy(problem.target, mix), WithinAbs(expected, 1e-12));
    REQUIRE_THAT(chi2_discrepancy(problem.target, mix), WithinAbs(1.0881, 2e-4));
  }
  SECTION("unsupported mass") {
    REQUIRE(std::isinf(chi2_discrepancy(GroupDist({1.0, 0.0}), GroupDist({0.0, 1.0}))));
  }
  SECTION("0/0 convention") {
    REQUIRE_THAT(chi2_discrepancy(GroupDist({1.0, 0.0}), GroupDist({1.0, 0.0})),
                 WithinAbs(1.0, 1e-15));
  }
  SECTION("dimension error") {
    REQUIRE_THROWS_AS(chi2_discrepancy(GroupDist({1.0}), GroupDist({0.5, 0.5})), DimensionError);
  }
}

TEST_CASE("effective_sample_size") {
  SECTION("matched single source") {
    ProblemInstance problem({SourceSpec(GroupDist({0.25, 0.75}), 1.0)}, GroupDist({0.25, 0.75}),
                            100.0);
    REQUIRE_THAT(effective_sample_size(SamplingPlan({100}), problem.target, problem),
                 WithinAbs(100.0, 1e-9));
  }
  SECTION("clinic composition") {
    const auto problem = bwtest::clinic_problem();
    const double d = 36.0 / 227.6 + 324.0 / 348.4;
    REQUIRE_THAT(effective_sample_size(SamplingPlan({152, 424}), problem.target, problem),
                 WithinAbs(576.0 / d, 1e-9));
    REQUIRE_THAT(effective_sample_size(SamplingPlan({152, 424}), problem.target, problem),
                 WithinAbs(529.3, 0.1));
  }
  SECTION("perfect symmetric match") {
    ProblemInstance problem(
        {SourceSpec(GroupDist({1.0, 0.0}), 1.0), SourceSpec(GroupDist({0.0, 1.0}), 1.0)},
        GroupDist({0.5, 0.5}), 10.0);
    REQUIRE_THAT(effective_sample_size(SamplingPlan({2, 2}), problem.target, problem),
                 WithinAbs(4.0, 1e-12));
  }
  SECTION("zero when the mixture misses target support") {
    ProblemInstance problem(
        {SourceSpec(GroupDist({1.0, 0.0}), 1.0), SourceSpec(GroupDist({0.0, 1.0}), 1.0)},
        GroupDist({0.5, 0.5}), 10.0);
    REQUIRE(effective_sample_size(SamplingPlan({3, 0}), problem.target, problem) == 0.0);
  }
}

TEST_CASE("tv_distance") {
  REQUIRE(tv_distance(GroupDist({0.25, 0.75}), GroupDist({0.25, 0.75})) == 0.0);
  REQUIRE_THAT(tv_distance(GroupDist({0.25, 0.75}), GroupDist({0.8, 0.2})),
               WithinAbs(0.55, 1e-12));
  REQUIRE(tv_distance(GroupDist({1.0, 0.0}), GroupDist({0.0, 1.0})) == 1.0);
  REQUIRE_THROWS_AS(tv_distance(GroupDist({1.0}), GroupDist({0.5, 0.5})), DimensionError);
}

TEST_CASE("discrepancy is at least one on random full-support pairs") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(gen() % 5);
    const GroupDist a = bwtest::random_dist(gen, k);
    const GroupDist b = bwtest::random_dist(gen, k);
    const double d = chi2_discrepancy(a, b);
    REQUIRE(d >= 1.0 - 1e-12);
    const double d_self = chi2_discrepancy(a, a);
    REQUIRE_THAT(d_self, WithinAbs(1.0, 1e-12));
    // equality only at (numerically) identical distributions
    double max_gap = 0.0;
    for (int z = 0; z < k; ++z) max_gap = std::max(max_gap, std::abs(a[z] - b[z]));
    if (max_gap > 1e-6) REQUIRE(d > 1.0 + 1e-13);
  }
}

TEST_CASE("effective sample size never exceeds the total") {
  std::mt19937_64 gen(29);
  for (int rep = 0; rep < 100; ++rep) {
    const int k = 2 + static_cast<int>(gen() % 3);
    const int m_count = 1 + static_cast<int>(gen() % 3);
    std::vector<SourceSpec> sources;
    for (int m = 0; m < m_count; ++m) {
      sources.emplace_back(bwtest::random_dist(gen, k), 1.0);
    }
    GroupDist target = bwtest::random_dist(gen, k);
    ProblemInstance problem(sources, target, 1000.0);
    std::vector<std::int64_t> counts;
    for (int m = 0; m < m_count; ++m) {
      counts.push_back(1 + static_cast<std::int64_t>(gen() % 50));
    }
    SamplingPlan plan(counts);
    const double neff = effective_sample_size(plan, target, problem);
    REQUIRE(neff <= static_cast<double>(plan.total()) + 1e-9);
  }
  // equality exactly when the mixture hits the target
  ProblemInstance problem(
      {SourceSpec(GroupDist({1.0, 0.0}), 1.0), SourceSpec(GroupDist({0.0, 1.0}), 1.0)},
      GroupDist({0.5, 0.5}), 10.0);
  REQUIRE_THAT(effective_sample_size(SamplingPlan({3, 3}), problem.target, problem),
               WithinAbs(6.0, 1e-12));
}

TEST_CASE("mixture is affine in counts") {
  std::mt19937_64 gen(43);
  for (int rep = 0; rep < 50; ++rep) {
    const int k = 2 + static_cast<int>(gen() % 3);
    std::vector<SourceSpec> sources;
    for (int m = 0; m < 3; ++m) sources.emplace_back(bwtest::random_dist(gen, k), 1.0);
    ProblemInstance problem(sources, bwtest::random_dist(gen, k), 1000.0);

    std::vector<std::int64_t> n1, n2, n12;
    for (int m = 0; m < 3; ++m) {
      n1.push_back(static_cast<std::int64_t>(gen() % 20) + 1);
      n2.push_back(static_cast<std::int64_t>(gen() % 20) + 1);
      n12.push_back(n1.back() + n2.back());
    }
    SamplingPlan p1(n1), p2(n2), p12(n12);
    const GroupDist m1 = mixture(p1, problem);
    const GroupDist m2 = mixture(p2, problem);
    const GroupDist m12 = mixture(p12, problem);
    const double t1 = static_cast<double>(p1.total());
    const double t2 = static_cast<double>(p2.total());
    for (int z = 0; z < k; ++z) {
      REQUIRE_THAT(m12[z], WithinAbs((t1 * m1[z] + t2 * m2[z]) / (t1 + t2), 1e-12));
    }
  }
}

TEST_CASE("reciprocal effective sample size is midpoint convex in counts") {
  std::mt19937_64 gen(57);
  auto inv_neff = [](const ProblemInstance& problem, const std::vector<double>& n) {
    double g = 0.0;
    for (int z = 0; z < problem.num_groups(); ++z) {
      const double t = problem.target[z];
      if (t == 0.0) continue;
      double s = 0.0;
      for (int m = 0; m < problem.num_sources(); ++m) {
        s += n[static_cast<std::size_t>(m)] * problem.sources[m].dist[z];
      }
      g += t * t / s;
    }
    return g;
  };
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(gen() % 3);
    std::vector<SourceSpec> sources;
    for (int m = 0; m < 3; ++m) sources.emplace_back(bwtest::random_dist(gen, k), 1.0);
    ProblemInstance problem(sources, bwtest::random_dist(gen, k), 1000.0);

    std::vector<double> n1(3), n2(3), mid(3);
    for (int m = 0; m < 3; ++m) {
      n1[static_cast<std::size_t>(m)] = 0.1 + static_cast<double>(gen() % 1000) / 10.0;
      n2[static_cast<std::size_t>(m)] = 0.1 + static_cast<double>(gen() % 1000) / 10.0;
      mid[static_cast<std::size_t>(m)] =
          0.5 * (n1[static_cast<std::size_t>(m)] + n2[static_cast<std::size_t>(m)]);
    }
    const double lhs = inv_neff(problem, mid);
    const double rhs = 0.5 * (inv_neff(problem, n1) + inv_neff(problem, n2));
    REQUIRE(lhs <= rhs + 1e-12);
  }
}
