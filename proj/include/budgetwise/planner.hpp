#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "budgetwise/core.hpp"
#include "budgetwise/errors.hpp"

namespace budgetwise {

/// Output of a planning routine. `continuous_weights` is the fractional
/// allocation from the continuous stage before integer rounding (for the
/// brute-force oracle it simply echoes the integer counts).
struct PlanResult {
  SamplingPlan plan;
  double objective;  // achieved effective sample size
  std::vector<double> continuous_weights;
  double total_cost;
  double avg_cost;
};

enum class BaselineKind { uniform, inverse_cost, nearest, hybrid };

namespace detail {

/// Euclidean projection onto the probability simplex.
inline void project_to_simplex(std::vector<double>& v) {
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) tau = t;
  }
  for (double& x : v) x = std::max(x - tau, 0.0);
}

/// Objective of the continuous stage in v-space (v_m = c_m * w_m on the
/// simplex): f(v) = sum_z t_z^2 / s_z with s_z = sum_m v_m q^(m)(z) / c_m.
/// Equal to B * g(n) at n = B v / c, so it shares the argmin with 1/n_eff.
struct InvNeffObjective {
  const ProblemInstance& problem;
  const GroupDist& target;

  double value(const std::vector<double>& v) const {
    double f = 0.0;
    for (int z = 0; z < problem.num_groups(); ++z) {
      const double t = target[z];
      if (t == 0.0) continue;
      double s = 0.0;
      for (int m = 0; m < problem.num_sources(); ++m) {
        s += v[static_cast<std::size_t>(m)] * problem.sources[m].dist[z] /
             problem.sources[m].cost;
      }
      if (s <= 0.0) return std::numeric_limits<double>::infinity();
      f += t * t / s;
    }
    return f;
  }

  void gradient(const std::vector<double>& v, std::vector<double>& grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int z = 0; z < problem.num_groups(); ++z) {
      const double t = target[z];
      if (t == 0.0) continue;
      double s = 0.0;
      for (int m = 0; m < problem.num_sources(); ++m) {
        s += v[static_cast<std::size_t>(m)] * problem.sources[m].dist[z] /
             problem.sources[m].cost;
      }
      const double coeff = t * t / (s * s);
      for (int m = 0; m < problem.num_sources(); ++m) {
        grad[static_cast<std::size_t>(m)] -=
            coeff * problem.sources[m].dist[z] / problem.sources[m].cost;
      }
    }
  }
};

inline constexpr int kSolverMaxIters = 10000;
inline constexpr double kSolverRelTol = 1e-10;

/// Projected gradient descent with backtracking on the simplex in v-space.
/// Initialization v = uniform corresponds to source weights w_m ~ 1/c_m.
inline std::vector<double> minimize_inv_neff(const ProblemInstance& problem,
                                             const GroupDist& target) {
  const std::size_t M = static_cast<std::size_t>(problem.num_sources());
  InvNeffObjective obj{problem, target};
  std::vector<double> v(M, 1.0 / static_cast<double>(M));
  std::vector<double> grad(M), trial(M);

  double f = obj.value(v);
  obj.gradient(v, grad);
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  // Step scaled by the gradient magnitude keeps the trajectory invariant
  // under a joint rescaling of all costs and the budget.
  double eta = gmax > 0.0 ? 0.1 / gmax : 1.0;

  for (int iter = 0; iter < kSolverMaxIters; ++iter) {
    obj.gradient(v, grad);
    double f_new = f;
    bool moved = false;
    for (int bt = 0; bt < 200; ++bt) {
      for (std::size_t m = 0; m < M; ++m) trial[m] = v[m] - eta * grad[m];
      project_to_simplex(trial);
      double step_sq = 0.0, lin = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        const double d = trial[m] - v[m];
        step_sq += d * d;
        lin += grad[m] * d;
      }
      if (step_sq == 0.0) break;  // stationary
      f_new = obj.value(trial);
      if (f_new <= f + lin + 0.5 * step_sq / eta) {
        v.swap(trial);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
    const double rel = (f - f_new) / std::max(f, std::numeric_limits<double>::min());
    f = f_new;
    if (rel < kSolverRelTol) break;
    eta *= 1.3;
  }
  return v;
}

/// Running state for the greedy residual spend: s_z = sum_m n_m q^(m)(z).
/// n_eff equals 1 / sum_z t_z^2 / s_z, which is nondecreasing in every count.
inline double neff_from_mass(const std::vector<double>& s, const GroupDist& target) {
  double g = 0.0;
  for (int z = 0; z < target.size(); ++z) {
    const double t = target[z];
    if (t == 0.0) continue;
    if (s[static_cast<std::size_t>(z)] <= 0.0) return 0.0;
    g += t * t / s[static_cast<std::size_t>(z)];
  }
  return g > 0.0 ? 1.0 / g : std::numeric_limits<double>::infinity();
}

/// Floors a fractional allocation, repairs any floating-point budget
/// overshoot, then spends the residual budget one sample at a time on the
/// source with the largest marginal n_eff gain per unit cost (ties to the
/// lowest source index).
inline SamplingPlan round_allocation(const ProblemInstance& problem, const GroupDist& target,
                                     const std::vector<double>& fractional) {
  const int M = problem.num_sources();
  const int K = problem.num_groups();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(M), 0);
  for (int m = 0; m < M; ++m) {
    counts[static_cast<std::size_t>(m)] =
        static_cast<std::int64_t>(std::floor(fractional[static_cast<std::size_t>(m)]));
  }

  auto spend = [&]() {
    double c = 0.0;
    for (int m = 0; m < M; ++m) {
      c += static_cast<double>(counts[static_cast<std::size_t>(m)]) * problem.sources[m].cost;
    }
    return c;
  };
  double spent = spend();
  while (spent > problem.budget) {
    int worst = -1;
    for (int m = 0; m < M; ++m) {
      if (counts[static_cast<std::size_t>(m)] == 0) continue;
      if (worst < 0 || problem.sources[m].cost > problem.sources[worst].cost) worst = m;
    }
    if (worst < 0) break;
    --counts[static_cast<std::size_t>(worst)];
    spent = spend();
  }

  std::vector<double> s(static_cast<std::size_t>(K), 0.0);
  for (int m = 0; m < M; ++m) {
    for (int z = 0; z < K; ++z) {
      s[static_cast<std::size_t>(z)] +=
          static_cast<double>(counts[static_cast<std::size_t>(m)]) * problem.sources[m].dist[z];
    }
  }

  while (true) {
    double neff_cur = neff_from_mass(s, target);
    int best = -1;
    double best_rate = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < M; ++m) {
      const double c = problem.sources[m].cost;
      if (spent + c > problem.budget) continue;
      double g = 0.0;
      bool infeasible = false;
      for (int z = 0; z < K; ++z) {
        const double t = target[z];
        if (t == 0.0) continue;
        const double sz = s[static_cast<std::size_t>(z)] + problem.sources[m].dist[z];
        if (sz <= 0.0) {
          infeasible = true;
          break;
        }
        g += t * t / sz;
      }
      const double neff_new = infeasible ? 0.0 : (g > 0.0 ? 1.0 / g : 0.0);
      const double rate = (neff_new - neff_cur) / c;
      if (rate > best_rate) {
        best_rate = rate;
        best = m;
      }
    }
    if (best < 0) break;  // nothing affordable; residual < cheapest cost
    ++counts[static_cast<std::size_t>(best)];
    spent += problem.sources[best].cost;
    for (int z = 0; z < K; ++z) {
      s[static_cast<std::size_t>(z)] += problem.sources[best].dist[z];
    }
  }
  return SamplingPlan(std::move(counts));
}

/// Pre-solve checks shared by every planning routine.
inline void check_plannable(const ProblemInstance& problem, const GroupDist& target) {
  if (target.size() != problem.num_groups()) {
    throw DimensionError("target has a different group count than the problem");
  }
  check_support_coverage(problem.sources, target);
  if (problem.budget < problem.min_cost()) {
    throw BudgetTooSmallError("budget cannot afford a single sample from any source");
  }
}

inline PlanResult make_result(const ProblemInstance& problem, const GroupDist& target,
                              SamplingPlan plan, std::vector<double> fractional) {
  const double cost = total_cost(plan, problem);
  const double avg = average_cost(plan, problem);
  const double neff = effective_sample_size(plan, target, problem);
  return PlanResult{std::move(plan), neff, std::move(fractional), cost, avg};
}

/// Minimizes TV(target, sum_m w_m q^(m)) over the simplex by projected
/// subgradient descent from the uniform initialization. The projection's
/// clamp-at-zero lets the iterate settle exactly on low-dimensional faces.
inline std::vector<double> nearest_tv_weights(const ProblemInstance& problem,
                                              const GroupDist& target) {
  const std::size_t M = static_cast<std::size_t>(problem.num_sources());
  const int K = problem.num_groups();
  std::vector<double> w(M, 1.0 / static_cast<double>(M));
  std::vector<double> best_w = w;
  std::vector<double> mix(static_cast<std::size_t>(K)), sg(M);

  auto tv_of = [&](const std::vector<double>& x) {
    double tv = 0.0;
    for (int z = 0; z < K; ++z) {
      double q = 0.0;
      for (std::size_t m = 0; m < M; ++m) q += x[m] * problem.sources[m].dist[z];
      mix[static_cast<std::size_t>(z)] = q;
      tv += std::abs(q - target[z]);
    }
    return 0.5 * tv;
  };

  double best = tv_of(w);
  int stall = 0;
  for (int iter = 0; iter < kSolverMaxIters && stall < 100; ++iter) {
    tv_of(w);  // refresh mix for the subgradient
    for (std::size_t m = 0; m < M; ++m) {
      double g = 0.0;
      for (int z = 0; z < K; ++z) {
        const double r = mix[static_cast<std::size_t>(z)] - target[z];
        if (r > 0.0) {
          g += problem.sources[m].dist[z];
        } else if (r < 0.0) {
          g -= problem.sources[m].dist[z];
        }
      }
      sg[m] = 0.5 * g;
    }
    const double step = 0.1 / std::sqrt(static_cast<double>(iter + 1));
    for (std::size_t m = 0; m < M; ++m) w[m] -= step * sg[m];
    project_to_simplex(w);
    const double tv = tv_of(w);
    if (tv < best - kSolverRelTol * std::max(best, 1e-300)) {
      best = tv;
      best_w = w;
      stall = 0;
    } else {
      ++stall;
    }
  }

  // Shake off numerical dust so exact vertex solutions stay exact.
  std::vector<double> snapped = best_w;
  double mass = 0.0;
  for (double& x : snapped) {
    if (x < 1e-9) x = 0.0;
    mass += x;
  }
  if (mass > 0.0) {
    for (double& x : snapped) x /= mass;
    if (tv_of(snapped) <= best + 1e-15) best_w = snapped;
  }
  return best_w;
}

/// Scales simplex weights so the continuous allocation exhausts the budget,
/// i.e. n_m = B w_m / (c'w), then floors.
inline std::vector<double> scale_to_budget(const ProblemInstance& problem,
                                           const std::vector<double>& w) {
  double cw = 0.0;
  for (int m = 0; m < problem.num_sources(); ++m) {
    cw += problem.sources[m].cost * w[static_cast<std::size_t>(m)];
  }
  if (cw <= 0.0) throw DomainError("baseline weights have zero total cost");
  std::vector<double> frac(w.size());
  for (std::size_t m = 0; m < w.size(); ++m) frac[m] = problem.budget * w[m] / cw;
  return frac;
}

inline SamplingPlan floor_plan(const ProblemInstance& problem, const std::vector<double>& frac) {
  std::vector<std::int64_t> counts(frac.size());
  for (std::size_t m = 0; m < frac.size(); ++m) {
    counts[m] = static_cast<std::int64_t>(std::floor(frac[m]));
  }
  SamplingPlan plan(std::move(counts));
  if (plan.total() < 1) {
    throw BudgetTooSmallError("budget too small: baseline allocation floors to zero samples");
  }
  // Repair any floating-point overshoot of the budget.
  while (total_cost(plan, problem) > problem.budget) {
    int worst = -1;
    for (int m = 0; m < problem.num_sources(); ++m) {
      if (plan.counts[static_cast<std::size_t>(m)] == 0) continue;
      if (worst < 0 || problem.sources[m].cost > problem.sources[worst].cost) worst = m;
    }
    if (worst < 0) break;
    --plan.counts[static_cast<std::size_t>(worst)];
  }
  if (plan.total() < 1) {
    throw BudgetTooSmallError("budget too small: baseline allocation floors to zero samples");
  }
  return plan;
}

}  // namespace detail

/// The four reference sampling plans the optimizer is compared against.
inline PlanResult baseline_plan(BaselineKind kind, const ProblemInstance& problem) {
  detail::check_plannable(problem, problem.target);
  const int M = problem.num_sources();
  std::vector<double> frac(static_cast<std::size_t>(M), 0.0);
  switch (kind) {
    case BaselineKind::uniform: {
      double csum = 0.0;
      for (const auto& s : problem.sources) csum += s.cost;
      const double per = std::floor(problem.budget / csum);
      std::fill(frac.begin(), frac.end(), per);
      break;
    }
    case BaselineKind::inverse_cost: {
      std::vector<double> w(static_cast<std::size_t>(M));
      double sum = 0.0;
      for (int m = 0; m < M; ++m) {
        w[static_cast<std::size_t>(m)] = 1.0 / problem.sources[m].cost;
        sum += w[static_cast<std::size_t>(m)];
      }
      for (double& x : w) x /= sum;
      frac = detail::scale_to_budget(problem, w);
      break;
    }
    case BaselineKind::nearest: {
      frac = detail::scale_to_budget(problem, detail::nearest_tv_weights(problem, problem.target));
      break;
    }
    case BaselineKind::hybrid: {
      std::vector<double> w = detail::nearest_tv_weights(problem, problem.target);
      double sum = 0.0;
      for (int m = 0; m < M; ++m) {
        w[static_cast<std::size_t>(m)] /= problem.sources[m].cost;
        sum += w[static_cast<std::size_t>(m)];
      }
      if (sum <= 0.0) throw DomainError("hybrid weights degenerate to zero");
      for (double& x : w) x /= sum;
      frac = detail::scale_to_budget(problem, w);
      break;
    }
  }
  SamplingPlan plan = detail::floor_plan(problem, frac);
  return detail::make_result(problem, problem.target, std::move(plan), std::move(frac));
}

/// Budget-feasible plan maximizing the effective sample size w.r.t. `target`:
/// continuous convex solve, integer rounding with greedy residual spending,
/// then a sweep over the baseline plans so the result dominates them all.
inline PlanResult solve_optimal_plan(const ProblemInstance& problem, const GroupDist& target) {
  detail::check_plannable(problem, target);
  const int M = problem.num_sources();
  std::vector<double> v = detail::minimize_inv_neff(problem, target);

  std::vector<double> frac(static_cast<std::size_t>(M), 0.0);
  for (int m = 0; m < M; ++m) {
    const double vm = v[static_cast<std::size_t>(m)] < 1e-12 ? 0.0 : v[static_cast<std::size_t>(m)];
    frac[static_cast<std::size_t>(m)] = problem.budget * vm / problem.sources[m].cost;
  }

  SamplingPlan plan = detail::round_allocation(problem, target, frac);
  double neff = effective_sample_size(plan, target, problem);

  // The optimizer may always return a baseline plan, so never do worse.
  ProblemInstance retargeted(problem.sources, target, problem.budget);
  for (BaselineKind kind : {BaselineKind::uniform, BaselineKind::inverse_cost,
                            BaselineKind::nearest, BaselineKind::hybrid}) {
    try {
      PlanResult candidate = baseline_plan(kind, retargeted);
      if (candidate.objective > neff) {
        neff = candidate.objective;
        plan = candidate.plan;
      }
    } catch (const Error&) {
      // an infeasible baseline is simply not a candidate
    }
  }
  return detail::make_result(problem, target, std::move(plan), std::move(frac));
}

inline PlanResult solve_optimal_plan(const ProblemInstance& problem) {
  return solve_optimal_plan(problem, problem.target);
}

/// Plan maximizing the effective sample size w.r.t. the uniform distribution,
/// the right allocation when estimating the vector of group means.
inline PlanResult solve_group_means_plan(const ProblemInstance& problem) {
  return solve_optimal_plan(problem, GroupDist::uniform(problem.num_groups()));
}

/// Exact integer argmax of n_eff by lattice enumeration. Ties resolve to the
/// lexicographically smallest counts vector. Only for desk-scale instances;
/// the visited-state count is capped by `max_states`.
inline PlanResult brute_force_plan(const ProblemInstance& problem, const GroupDist& target,
                                   std::int64_t max_states) {
  detail::check_plannable(problem, target);
  const int M = problem.num_sources();
  const int K = problem.num_groups();

  std::vector<std::int64_t> current(static_cast<std::size_t>(M), 0);
  std::vector<std::int64_t> best_counts;
  double best_neff = -1.0;
  std::int64_t visited = 0;

  // n_eff depends on the counts only through the group mass vector
  // s_z = sum_m n_m q^(m)(z): n_eff = 1 / sum_z t_z^2 / s_z.
  auto leaf_neff = [&]() {
    double g = 0.0;
    for (int z = 0; z < K; ++z) {
      const double t = target[z];
      if (t == 0.0) continue;
      double sz = 0.0;
      for (int m = 0; m < M; ++m) {
        sz += static_cast<double>(current[static_cast<std::size_t>(m)]) *
              problem.sources[m].dist[z];
      }
      if (sz <= 0.0) return 0.0;
      g += t * t / sz;
    }
    return g > 0.0 ? 1.0 / g : 0.0;
  };

  // Lexicographically ascending enumeration: the first maximum encountered is
  // the lexicographically smallest among exact ties.
  auto recurse = [&](auto&& self, int m, double budget_left) -> void {
    if (m == M) {
      if (++visited > max_states) {
        throw ResourceLimitError("feasible lattice exceeds max_states = " +
                                 std::to_string(max_states));
      }
      std::int64_t total = 0;
      for (auto c : current) total += c;
      if (total < 1) return;
      const double neff = leaf_neff();
      if (neff > best_neff) {
        best_neff = neff;
        best_counts = current;
      }
      return;
    }
    const double c = problem.sources[m].cost;
    const auto cap = static_cast<std::int64_t>(std::floor(budget_left / c + 1e-12));
    for (std::int64_t n = 0; n <= cap; ++n) {
      current[static_cast<std::size_t>(m)] = n;
      self(self, m + 1, budget_left - static_cast<double>(n) * c);
    }
    current[static_cast<std::size_t>(m)] = 0;
  };
  recurse(recurse, 0, problem.budget);

  if (best_counts.empty()) {
    throw BudgetTooSmallError("no nonzero integer plan fits the budget");
  }
  std::vector<double> echo(best_counts.begin(), best_counts.end());
  return detail::make_result(problem, target, SamplingPlan(std::move(best_counts)),
                             std::move(echo));
}

}  // namespace budgetwise
