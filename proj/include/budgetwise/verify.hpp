#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "budgetwise/core.hpp"
#include "budgetwise/planner.hpp"
#include "budgetwise/presets.hpp"
#include "budgetwise/rng.hpp"
#include "budgetwise/simkit.hpp"
#include "budgetwise/theory.hpp"

namespace budgetwise {

/// Random desk-scale planning instance for oracle comparisons: M <= 3 sources,
/// K <= 4 groups, integer costs <= 3, budget <= 30. Source 1 always has full
/// support so every target is coverable.
inline ProblemInstance random_small_instance(StreamRng& rng) {
  const int m_count = 1 + static_cast<int>(rng.next_u64() % 3);
  const int k = 2 + static_cast<int>(rng.next_u64() % 3);

  auto draw_dist = [&](bool full_support) {
    std::vector<double> p(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (int z = 0; z < k; ++z) {
      double v = rng.next_u01();
      if (!full_support && rng.next_u01() < 0.3) v = 0.0;
      if (full_support) v = 0.1 + v;
      p[static_cast<std::size_t>(z)] = v;
      sum += v;
    }
    if (sum <= 0.0) {
      p[0] = 1.0;
      sum = 1.0;
    }
    for (double& v : p) v /= sum;
    return GroupDist(std::move(p));
  };

  std::vector<SourceSpec> sources;
  sources.reserve(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    const double cost = 1.0 + static_cast<double>(rng.next_u64() % 3);
    sources.emplace_back(draw_dist(m == 0), cost);
  }
  GroupDist target = draw_dist(false);
  double max_cost = 0.0;
  for (const auto& s : sources) max_cost = std::max(max_cost, s.cost);
  const double budget =
      std::min(30.0, 2.0 * max_cost + std::floor(rng.next_u01() * (30.0 - 2.0 * max_cost)));
  return ProblemInstance(std::move(sources), std::move(target), budget);
}

/// Integral-lemma suite: the truncated-normal integral stays within [0, 8]
/// over 50 log-spaced values of C in [1e-3, 1e2].
inline bool verify_integral(std::ostream& out) {
  bool ok = true;
  for (int i = 0; i < 50; ++i) {
    const double log_c = -3.0 + 5.0 * static_cast<double>(i) / 49.0;
    const double c = std::pow(10.0, log_c);
    const double value = truncnorm_integral(c);
    const bool pass = value >= 0.0 && value <= 8.0;
    ok = ok && pass;
    out << "integral C=" << c << " value=" << value << " bound=8 : "
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  return ok;
}

/// Oracle suite: the rounded convex solve reaches at least 95% of the exact
/// brute-force optimum on randomized desk-scale instances.
inline bool verify_oracle(std::ostream& out, int instances = 20, std::uint64_t seed = 7) {
  bool ok = true;
  StreamRng rng(rng_child(seed, 0xBEEF));
  for (int i = 0; i < instances; ++i) {
    const ProblemInstance problem = random_small_instance(rng);
    const PlanResult solved = solve_optimal_plan(problem);
    const PlanResult exact = brute_force_plan(problem, problem.target, 2'000'000);
    const double ratio = exact.objective > 0.0 ? solved.objective / exact.objective : 1.0;
    const bool pass = ratio >= 0.95;
    ok = ok && pass;
    out << "oracle instance " << (i + 1) << " solver=" << solved.objective
        << " brute=" << exact.objective << " ratio=" << ratio << " : "
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  return ok;
}

/// Consistency suite: in the 5-group setting with the optimal plan at B=500,
/// the Monte-Carlo MSE of the post-stratified estimator matches the
/// sigma^2/n_eff leading term within +-15% over 2000 replications.
inline bool verify_consistency(std::ostream& out, unsigned workers = 0) {
  ExperimentConfig config{setting_one(),
                          GroupDist::uniform(5),
                          {500.0},
                          2000,
                          kPresetSeed,
                          Task::population_mean,
                          5.0,
                          20,
                          20000,
                          "setting1",
                          "uniform"};
  const ProblemInstance problem = config.problem(500.0);
  const PlanResult opt = solve_optimal_plan(problem);
  const double neff = opt.objective;
  const ExperimentResult result = run_experiment(config, {PlanMethod::optimal}, workers);
  const double mse = result.curves.front().points.front().mean_risk;
  const double ratio = mse / (config.sigma2 / neff);
  const bool pass = ratio >= 0.85 && ratio <= 1.15;
  out << "consistency mse=" << mse << " sigma2/n_eff=" << config.sigma2 / neff
      << " ratio=" << ratio << " window=[0.85,1.15] : " << (pass ? "PASS" : "FAIL") << "\n";
  return pass;
}

}  // namespace budgetwise
