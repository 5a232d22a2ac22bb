#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "budgetwise/core.hpp"
#include "budgetwise/errors.hpp"

namespace budgetwise {

/// One collected observation. `features` is empty for mean-estimation data.
struct Record {
  int source;
  int group;
  std::vector<double> features;
  double response;
};

/// Data collected under a sampling plan.
struct Dataset {
  int num_groups;
  SamplingPlan plan;
  std::vector<Record> records;

  Dataset(int k, SamplingPlan p, std::vector<Record> recs)
      : num_groups(k), plan(std::move(p)), records(std::move(recs)) {
    if (num_groups < 1) throw DomainError("dataset needs at least one group");
    if (static_cast<std::int64_t>(records.size()) != plan.total()) {
      throw DomainError("dataset holds " + std::to_string(records.size()) +
                        " records but the plan collected " + std::to_string(plan.total()));
    }
    const std::size_t p_dim = records.empty() ? 0 : records.front().features.size();
    for (const auto& r : records) {
      if (r.group < 0 || r.group >= num_groups) {
        throw DomainError("record group index out of range");
      }
      if (r.features.size() != p_dim) {
        throw DimensionError("records disagree on feature dimension");
      }
    }
  }

  bool has_features() const { return !records.empty() && !records.front().features.empty(); }
  int feature_dim() const {
    return records.empty() ? 0 : static_cast<int>(records.front().features.size());
  }
};

/// Observed number of records per group.
inline std::vector<std::int64_t> group_counts(const Dataset& data) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(data.num_groups), 0);
  for (const auto& r : data.records) ++counts[static_cast<std::size_t>(r.group)];
  return counts;
}

/// Per-group sample means; exactly zero for unobserved groups.
inline std::vector<double> group_means(const Dataset& data) {
  std::vector<double> sums(static_cast<std::size_t>(data.num_groups), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(data.num_groups), 0);
  for (const auto& r : data.records) {
    sums[static_cast<std::size_t>(r.group)] += r.response;
    ++counts[static_cast<std::size_t>(r.group)];
  }
  for (int z = 0; z < data.num_groups; ++z) {
    if (counts[static_cast<std::size_t>(z)] > 0) {
      sums[static_cast<std::size_t>(z)] /= static_cast<double>(counts[static_cast<std::size_t>(z)]);
    } else {
      sums[static_cast<std::size_t>(z)] = 0.0;
    }
  }
  return sums;
}

/// Post-stratified mean: group means reweighted by the target distribution.
inline double post_stratified(const Dataset& data, const GroupDist& target) {
  if (target.size() != data.num_groups) {
    throw DimensionError("target has a different group count than the dataset");
  }
  const std::vector<double> means = group_means(data);
  double est = 0.0;
  for (int z = 0; z < data.num_groups; ++z) {
    est += target[z] * means[static_cast<std::size_t>(z)];
  }
  return est;
}

/// Per-group linear classifier coefficients.
struct Hypothesis {
  std::vector<std::vector<double>> coefficients;  // K vectors of dimension p

  int num_groups() const { return static_cast<int>(coefficients.size()); }
  int feature_dim() const {
    return coefficients.empty() ? 0 : static_cast<int>(coefficients.front().size());
  }

  /// sign(x'beta_z) with sign(0) = +1, reported as a {0,1} label.
  int predict(int group, const std::vector<double>& x) const {
    const auto& b = coefficients[static_cast<std::size_t>(group)];
    double dot = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) dot += b[j] * x[j];
    return dot >= 0.0 ? 1 : 0;
  }
};

struct FitConfig {
  int max_iters = 5000;
  double grad_tol = 1e-8;
};

namespace detail {

// log(1 + exp(-m)) without overflow.
inline double logistic_loss(double margin) {
  return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

// d/dm log(1+exp(-m)) = -sigmoid(-m)
inline double logistic_sigmoid_neg(double margin) {
  return margin > 0.0 ? std::exp(-margin) / (1.0 + std::exp(-margin))
                      : 1.0 / (1.0 + std::exp(margin));
}

/// Plain logistic regression on one group's records: gradient descent with
/// backtracking line search from the zero vector. Positive per-group
/// importance weights scale the objective by a constant and so never change
/// the argmin; they are deliberately not applied here.
inline std::vector<double> fit_logistic_group(const std::vector<const Record*>& recs, int p,
                                              const FitConfig& config) {
  std::vector<double> beta(static_cast<std::size_t>(p), 0.0);
  if (recs.empty()) return beta;
  const double inv_n = 1.0 / static_cast<double>(recs.size());

  auto loss_at = [&](const std::vector<double>& b) {
    double loss = 0.0;
    for (const Record* r : recs) {
      double dot = 0.0;
      for (int j = 0; j < p; ++j) dot += b[static_cast<std::size_t>(j)] * r->features[static_cast<std::size_t>(j)];
      const double sign = r->response > 0.5 ? 1.0 : -1.0;
      loss += logistic_loss(sign * dot);
    }
    return loss * inv_n;
  };

  std::vector<double> grad(static_cast<std::size_t>(p));
  std::vector<double> trial(static_cast<std::size_t>(p));
  double loss = loss_at(beta);
  double eta = 1.0;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const Record* r : recs) {
      double dot = 0.0;
      for (int j = 0; j < p; ++j) dot += beta[static_cast<std::size_t>(j)] * r->features[static_cast<std::size_t>(j)];
      const double sign = r->response > 0.5 ? 1.0 : -1.0;
      const double coeff = -sign * logistic_sigmoid_neg(sign * dot) * inv_n;
      for (int j = 0; j < p; ++j) grad[static_cast<std::size_t>(j)] += coeff * r->features[static_cast<std::size_t>(j)];
    }
    double gnorm_sq = 0.0;
    for (double g : grad) gnorm_sq += g * g;
    if (std::sqrt(gnorm_sq) <= config.grad_tol) break;

    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (int j = 0; j < p; ++j) {
        trial[static_cast<std::size_t>(j)] =
            beta[static_cast<std::size_t>(j)] - eta * grad[static_cast<std::size_t>(j)];
      }
      const double trial_loss = loss_at(trial);
      if (trial_loss <= loss - 0.5 * eta * gnorm_sq) {
        beta.swap(trial);
        loss = trial_loss;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
    eta *= 2.0;
  }
  return beta;
}

}  // namespace detail

/// Importance-weighted ERM for per-group linear classifiers under the
/// logistic surrogate. The weighted loss separates over groups and the weight
/// q_T(z)/mixture(z) is constant within a group, so each group is fit by
/// plain ERM on its own records; identity weights therefore take the same
/// code path by construction.
inline Hypothesis iwerm_fit(const Dataset& data, const GroupDist& target,
                            const GroupDist& mix, const FitConfig& config = {}) {
  if (data.records.empty()) throw InsufficientDataError("cannot fit on an empty dataset");
  if (!data.has_features()) throw InsufficientDataError("dataset has no features to fit on");
  if (target.size() != data.num_groups || mix.size() != data.num_groups) {
    throw DimensionError("target/mixture group count differs from the dataset");
  }
  const std::vector<std::int64_t> counts = group_counts(data);
  for (int z = 0; z < data.num_groups; ++z) {
    if (counts[static_cast<std::size_t>(z)] > 0 && mix[z] <= 0.0) {
      throw InvalidWeightsError("observed group " + std::to_string(z + 1) +
                                " has zero mixture probability");
    }
  }

  const int p = data.feature_dim();
  std::vector<std::vector<const Record*>> by_group(static_cast<std::size_t>(data.num_groups));
  for (const auto& r : data.records) {
    by_group[static_cast<std::size_t>(r.group)].push_back(&r);
  }

  Hypothesis h;
  h.coefficients.resize(static_cast<std::size_t>(data.num_groups));
  for (int z = 0; z < data.num_groups; ++z) {
    h.coefficients[static_cast<std::size_t>(z)] =
        detail::fit_logistic_group(by_group[static_cast<std::size_t>(z)], p, config);
  }
  return h;
}

/// Fraction of evaluation records misclassified by sign(x'beta_z).
inline double target_zero_one_risk(const Hypothesis& h, const Dataset& eval_data) {
  if (eval_data.records.empty()) return 0.0;
  if (h.num_groups() != eval_data.num_groups) {
    throw DimensionError("hypothesis group count differs from the dataset");
  }
  std::int64_t wrong = 0;
  for (const auto& r : eval_data.records) {
    const int label = r.response > 0.5 ? 1 : 0;
    if (h.predict(r.group, r.features) != label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(eval_data.records.size());
}

/// Importance-weighted empirical 0-1 risk of a fixed hypothesis,
/// (1/n) sum_i (q_T(z_i)/mixture(z_i)) 1{h misclassifies record i}.
inline double iw_empirical_risk(const Hypothesis& h, const Dataset& data,
                                const GroupDist& target, const GroupDist& mix) {
  if (data.records.empty()) throw InsufficientDataError("empty dataset");
  if (target.size() != data.num_groups || mix.size() != data.num_groups) {
    throw DimensionError("target/mixture group count differs from the dataset");
  }
  double acc = 0.0;
  for (const auto& r : data.records) {
    const int label = r.response > 0.5 ? 1 : 0;
    if (h.predict(r.group, r.features) == label) continue;
    if (mix[r.group] <= 0.0) {
      throw InvalidWeightsError("observed group " + std::to_string(r.group + 1) +
                                " has zero mixture probability");
    }
    acc += target[r.group] / mix[r.group];
  }
  return acc / static_cast<double>(data.records.size());
}

}  // namespace budgetwise
