#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "budgetwise/core.hpp"

namespace bwtest {

/// The worked two-clinic instance: urban (80% group A, $1) and rural
/// (25% group A, $2), $1000 budget, state target 25% / 75%.
inline budgetwise::ProblemInstance clinic_problem(double budget = 1000.0) {
  std::vector<budgetwise::SourceSpec> sources;
  sources.emplace_back(budgetwise::GroupDist({0.8, 0.2}), 1.0);
  sources.emplace_back(budgetwise::GroupDist({0.25, 0.75}), 2.0);
  return budgetwise::ProblemInstance(std::move(sources), budgetwise::GroupDist({0.25, 0.75}),
                                     budget);
}

/// Random full-support distribution for property tests (mt19937_64 keeps the
/// raw integer stream portable across standard libraries).
inline budgetwise::GroupDist random_dist(std::mt19937_64& gen, int k, double floor = 0.05) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (int z = 0; z < k; ++z) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    p[static_cast<std::size_t>(z)] = floor + u;
    sum += p[static_cast<std::size_t>(z)];
  }
  for (double& v : p) v /= sum;
  return budgetwise::GroupDist(std::move(p));
}

/// Exact misclassification probability of sign(x'a) against probit labels
/// y ~ Bernoulli(Phi(x'b)) with x ~ Normal(0, I):
/// P(mismatch) = arccos(rho) / pi with rho = a'b / (|a| sqrt(|b|^2 + 1)).
inline double probit_mismatch_prob(const std::vector<double>& a, const std::vector<double>& b) {
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    aa += a[j] * a[j];
    bb += b[j] * b[j];
    ab += a[j] * b[j];
  }
  if (aa == 0.0) return 0.5;  // sign(0) = +1 predicts 1; labels are symmetric
  const double rho = ab / (std::sqrt(aa) * std::sqrt(bb + 1.0));
  return std::acos(rho) / 3.14159265358979323846;
}

}  // namespace bwtest
