#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "budgetwise/errors.hpp"

namespace budgetwise {

/// Absolute tolerance for validating that probabilities sum to one.
inline constexpr double kProbTolerance = 1e-9;

/// Probability distribution over the K group identities. Entries are
/// validated at construction and renormalized exactly when the raw sum is
/// within kProbTolerance of one; anything further off is rejected.
class GroupDist {
 public:
  explicit GroupDist(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) throw DomainError("group distribution must have at least one group");
    double sum = 0.0;
    for (std::size_t z = 0; z < p_.size(); ++z) {
      if (!(p_[z] >= 0.0)) {
        throw DomainError("group probability for group " + std::to_string(z + 1) +
                          " is negative or NaN");
      }
      sum += p_[z];
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
      throw DomainError("group probabilities sum to " + std::to_string(sum) +
                        ", expected 1 within 1e-9");
    }
    for (double& v : p_) v /= sum;
  }

  static GroupDist uniform(int k) {
    if (k < 1) throw DomainError("group count must be >= 1");
    return GroupDist(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int z) const { return p_[static_cast<std::size_t>(z)]; }
  const std::vector<double>& probs() const { return p_; }

 private:
  std::vector<double> p_;
};

/// One data source: its group distribution and per-sample cost.
struct SourceSpec {
  GroupDist dist;
  double cost;

  SourceSpec(GroupDist d, double c) : dist(std::move(d)), cost(c) {
    if (!(cost > 0.0)) throw DomainError("source cost must be > 0");
  }
};

/// Verifies every target group with positive mass is reachable by some source.
/// Index in the error message is 1-based, matching user-facing group labels.
inline void check_support_coverage(const std::vector<SourceSpec>& sources,
                                   const GroupDist& target) {
  for (int z = 0; z < target.size(); ++z) {
    if (target[z] <= 0.0) continue;
    bool covered = false;
    for (const auto& s : sources) {
      if (s.dist[z] > 0.0) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      throw InfeasibleError("target group " + std::to_string(z + 1) +
                            " has positive probability but no source covers it");
    }
  }
}

/// A full planning problem: M sources, the target group distribution, and the
/// sampling budget.
struct ProblemInstance {
  std::vector<SourceSpec> sources;
  GroupDist target;
  double budget;

  ProblemInstance(std::vector<SourceSpec> srcs, GroupDist tgt, double b)
      : sources(std::move(srcs)), target(std::move(tgt)), budget(b) {
    if (sources.empty()) throw DomainError("problem needs at least one source");
    if (!(budget > 0.0)) throw DomainError("budget must be > 0");
    for (const auto& s : sources) {
      if (s.dist.size() != target.size()) {
        throw DimensionError("source and target group counts differ");
      }
    }
    check_support_coverage(sources, target);
  }

  int num_groups() const { return target.size(); }
  int num_sources() const { return static_cast<int>(sources.size()); }
  double min_cost() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : sources) m = std::min(m, s.cost);
    return m;
  }
};

/// Integer allocation of samples per source.
struct SamplingPlan {
  std::vector<std::int64_t> counts;

  explicit SamplingPlan(std::vector<std::int64_t> c) : counts(std::move(c)) {
    for (auto n : counts) {
      if (n < 0) throw DomainError("sample counts must be nonnegative");
    }
  }

  std::int64_t total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  }
};

inline double total_cost(const SamplingPlan& plan, const ProblemInstance& problem) {
  if (static_cast<int>(plan.counts.size()) != problem.num_sources()) {
    throw DimensionError("plan has a different number of sources than the problem");
  }
  double cost = 0.0;
  for (int m = 0; m < problem.num_sources(); ++m) {
    cost += static_cast<double>(plan.counts[m]) * problem.sources[m].cost;
  }
  return cost;
}

/// Average per-sample cost of a plan, c'n / 1'n.
inline double average_cost(const SamplingPlan& plan, const ProblemInstance& problem) {
  const std::int64_t t = plan.total();
  if (t < 1) throw InvalidPlanError("average cost is undefined for an empty plan");
  return total_cost(plan, problem) / static_cast<double>(t);
}

/// Mixture distribution over groups induced by sampling according to the plan.
inline GroupDist mixture(const SamplingPlan& plan, const ProblemInstance& problem) {
  if (static_cast<int>(plan.counts.size()) != problem.num_sources()) {
    throw DimensionError("plan has a different number of sources than the problem");
  }
  const std::int64_t t = plan.total();
  if (t < 1) throw InvalidPlanError("mixture is undefined for an empty plan");
  std::vector<double> mix(static_cast<std::size_t>(problem.num_groups()), 0.0);
  for (int m = 0; m < problem.num_sources(); ++m) {
    if (plan.counts[m] == 0) continue;
    const double w = static_cast<double>(plan.counts[m]) / static_cast<double>(t);
    for (int z = 0; z < problem.num_groups(); ++z) {
      mix[static_cast<std::size_t>(z)] += w * problem.sources[m].dist[z];
    }
  }
  return GroupDist(std::move(mix));
}

/// Chi-square discrepancy d(a||b) = sum_z a(z)^2 / b(z). At least 1, with
/// equality only when a == b. Groups with a(z) == 0 contribute nothing even
/// if b(z) == 0; a(z) > 0 with b(z) == 0 yields the +infinity sentinel.
inline double chi2_discrepancy(const GroupDist& a, const GroupDist& b) {
  if (a.size() != b.size()) throw DimensionError("distributions have different group counts");
  double d = 0.0;
  for (int z = 0; z < a.size(); ++z) {
    if (a[z] == 0.0) continue;
    if (b[z] == 0.0) return std::numeric_limits<double>::infinity();
    d += a[z] * a[z] / b[z];
  }
  return d;
}

/// Effective sample size: total samples divided by d(target || mixture).
/// Zero when the discrepancy is infinite.
inline double effective_sample_size(const SamplingPlan& plan, const GroupDist& target,
                                    const ProblemInstance& problem) {
  const double d = chi2_discrepancy(target, mixture(plan, problem));
  if (std::isinf(d)) return 0.0;
  return static_cast<double>(plan.total()) / d;
}

/// Total variation distance, 0.5 * sum_z |a(z) - b(z)|.
inline double tv_distance(const GroupDist& a, const GroupDist& b) {
  if (a.size() != b.size()) throw DimensionError("distributions have different group counts");
  double s = 0.0;
  for (int z = 0; z < a.size(); ++z) s += std::abs(a[z] - b[z]);
  return 0.5 * s;
}

}  // namespace budgetwise
