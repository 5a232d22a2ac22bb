#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "budgetwise/core.hpp"
#include "budgetwise/errors.hpp"
#include "budgetwise/estimators.hpp"
#include "budgetwise/normal.hpp"
#include "budgetwise/planner.hpp"
#include "budgetwise/rng.hpp"

namespace budgetwise {

/// Group-conditional mean model: Y | Z = z ~ Normal(mu_z, var).
struct MeanModel {
  std::vector<double> mu;
  double var;
  double r_bound;

  MeanModel(std::vector<double> m, double v, double r)
      : mu(std::move(m)), var(v), r_bound(r) {
    if (mu.empty()) throw DomainError("mean model needs at least one group");
    if (!(var > 0.0)) throw DomainError("conditional variance must be > 0");
    if (!(r_bound > 0.0)) throw DomainError("mean bound must be > 0");
    for (double m_z : mu) {
      if (std::abs(m_z) > r_bound) {
        throw DomainError("group mean exceeds the declared bound R");
      }
    }
  }
};

/// Probit label model: Y | Z = z, X = x ~ Bernoulli(Phi(x'beta_z)).
struct ProbitModel {
  std::vector<std::vector<double>> betas;
  int feature_dim;

  ProbitModel(std::vector<std::vector<double>> b, int p)
      : betas(std::move(b)), feature_dim(p) {
    if (betas.empty()) throw DomainError("probit model needs at least one group");
    if (feature_dim < 1) throw DomainError("feature dimension must be >= 1");
    for (const auto& bz : betas) {
      if (static_cast<int>(bz.size()) != feature_dim) {
        throw DimensionError("probit coefficient vectors disagree on dimension");
      }
    }
  }
};

enum class TargetKind { uniform, increasing, pyramid, explicit_probs };
enum class Task { population_mean, group_means, classification };
enum class PlanMethod { optimal, uniform, inverse_cost, nearest, hybrid };

inline std::string method_name(PlanMethod m) {
  switch (m) {
    case PlanMethod::optimal: return "optimal";
    case PlanMethod::uniform: return "uniform";
    case PlanMethod::inverse_cost: return "inverse_cost";
    case PlanMethod::nearest: return "nearest";
    case PlanMethod::hybrid: return "hybrid";
  }
  return "?";
}

inline std::string task_name(Task t) {
  switch (t) {
    case Task::population_mean: return "population_mean";
    case Task::group_means: return "group_means";
    case Task::classification: return "classification";
  }
  return "?";
}

inline std::string target_kind_name(TargetKind k) {
  switch (k) {
    case TargetKind::uniform: return "uniform";
    case TargetKind::increasing: return "increasing";
    case TargetKind::pyramid: return "pyramid";
    case TargetKind::explicit_probs: return "explicit";
  }
  return "?";
}

/// The built-in target shapes: uniform 1/K; increasing q(z) proportional to
/// z; pyramid q(z) proportional to min(z, K+1-z) (groups 1-based).
inline GroupDist make_target(TargetKind kind, int k) {
  if (k < 1) throw DomainError("group count must be >= 1");
  std::vector<double> q(static_cast<std::size_t>(k), 0.0);
  switch (kind) {
    case TargetKind::uniform:
      return GroupDist::uniform(k);
    case TargetKind::increasing: {
      const double denom = static_cast<double>(k) * static_cast<double>(k + 1) / 2.0;
      for (int z = 1; z <= k; ++z) q[static_cast<std::size_t>(z - 1)] = z / denom;
      return GroupDist(std::move(q));
    }
    case TargetKind::pyramid: {
      double denom = 0.0;
      for (int z = 1; z <= k; ++z) denom += std::min(z, k + 1 - z);
      for (int z = 1; z <= k; ++z) {
        q[static_cast<std::size_t>(z - 1)] = std::min(z, k + 1 - z) / denom;
      }
      return GroupDist(std::move(q));
    }
    case TargetKind::explicit_probs:
      throw DomainError("explicit target kind requires explicit probabilities");
  }
  throw DomainError("unknown target kind");
}

/// The 5-group, 10-source benchmark configuration (sparse cheap sources).
inline std::vector<SourceSpec> setting_one() {
  const std::vector<std::pair<std::vector<double>, double>> rows = {
      {{1.00, 0.00, 0.00, 0.00, 0.00}, 0.02},
      {{0.05, 0.15, 0.15, 0.15, 0.50}, 3.0},
      {{0.05, 0.20, 0.30, 0.35, 0.10}, 4.0},
      {{0.05, 0.30, 0.55, 0.10, 0.00}, 3.0},
      {{0.05, 0.25, 0.15, 0.00, 0.55}, 0.1},
      {{0.05, 0.05, 0.40, 0.45, 0.05}, 2.4},
      {{0.05, 0.15, 0.60, 0.05, 0.15}, 1.6},
      {{0.05, 0.05, 0.05, 0.40, 0.45}, 2.0},
      {{0.05, 0.30, 0.30, 0.05, 0.30}, 2.0},
      {{0.00, 0.50, 0.00, 0.50, 0.00}, 1.0},
  };
  std::vector<SourceSpec> sources;
  sources.reserve(rows.size());
  for (const auto& [probs, cost] : rows) sources.emplace_back(GroupDist(probs), cost);
  return sources;
}

/// The 20-group, 20-source benchmark: one base distribution cycled by one
/// entry per source, with costs spanning [0.1, 1] linearly.
inline std::vector<SourceSpec> setting_two() {
  const std::vector<double> base = {
      0.0057, 0.0307, 0.0625, 0.0938, 0.1547, 0.0392, 0.0380, 0.1256, 0.0347, 0.0825,
      0.0370, 0.0154, 0.0379, 0.0410, 0.0268, 0.0824, 0.0010, 0.0313, 0.0295, 0.0303};
  const int k = static_cast<int>(base.size());
  std::vector<SourceSpec> sources;
  sources.reserve(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) {
    std::vector<double> probs(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      probs[static_cast<std::size_t>(j)] = base[static_cast<std::size_t>((j + m) % k)];
    }
    const double cost = 0.1 + 0.9 * static_cast<double>(m) / static_cast<double>(k - 1);
    sources.emplace_back(GroupDist(std::move(probs)), cost);
  }
  return sources;
}

namespace detail {

// Stream tags under the master seed; adding a purpose never perturbs others.
inline constexpr std::uint64_t kDataStream = 1;
inline constexpr std::uint64_t kModelStream = 2;
inline constexpr std::uint64_t kEvalStream = 3;

}  // namespace detail

/// Draws a mean-estimation dataset under `plan`: for each source m, n_m
/// records with z ~ q^(m) and y | z ~ Normal(mu_z, var). Each record owns a
/// counter-derived substream keyed by (seed, source, record index), so a plan
/// requesting fewer samples from a source reads a prefix of the same stream.
inline Dataset generate_mean_dataset(const SamplingPlan& plan, const ProblemInstance& problem,
                                     const MeanModel& model, std::uint64_t seed) {
  if (static_cast<int>(model.mu.size()) != problem.num_groups()) {
    throw DimensionError("mean model group count differs from the problem");
  }
  if (plan.total() < 1) throw InvalidPlanError("cannot generate data for an empty plan");
  const double sd = std::sqrt(model.var);
  std::vector<Record> records;
  records.reserve(static_cast<std::size_t>(plan.total()));
  for (int m = 0; m < problem.num_sources(); ++m) {
    const std::uint64_t source_key = rng_child(seed, static_cast<std::uint64_t>(m));
    const auto& probs = problem.sources[m].dist.probs();
    for (std::int64_t i = 0; i < plan.counts[static_cast<std::size_t>(m)]; ++i) {
      StreamRng rng(rng_child(source_key, static_cast<std::uint64_t>(i)));
      const int z = rng.next_categorical(probs);
      const double y = model.mu[static_cast<std::size_t>(z)] + sd * rng.next_normal();
      records.push_back(Record{m, z, {}, y});
    }
  }
  return Dataset(problem.num_groups(), plan, std::move(records));
}

/// Draws a classification dataset: z ~ q^(m), x ~ Normal(0, I_p),
/// y ~ Bernoulli(Phi(x'beta_z)), labels stored as {0, 1}.
inline Dataset generate_probit_dataset(const SamplingPlan& plan, const ProblemInstance& problem,
                                       const ProbitModel& model, std::uint64_t seed) {
  if (static_cast<int>(model.betas.size()) != problem.num_groups()) {
    throw DimensionError("probit model group count differs from the problem");
  }
  if (plan.total() < 1) throw InvalidPlanError("cannot generate data for an empty plan");
  const int p = model.feature_dim;
  std::vector<Record> records;
  records.reserve(static_cast<std::size_t>(plan.total()));
  for (int m = 0; m < problem.num_sources(); ++m) {
    const std::uint64_t source_key = rng_child(seed, static_cast<std::uint64_t>(m));
    const auto& probs = problem.sources[m].dist.probs();
    for (std::int64_t i = 0; i < plan.counts[static_cast<std::size_t>(m)]; ++i) {
      StreamRng rng(rng_child(source_key, static_cast<std::uint64_t>(i)));
      const int z = rng.next_categorical(probs);
      std::vector<double> x(static_cast<std::size_t>(p));
      double dot = 0.0;
      for (int j = 0; j < p; ++j) {
        x[static_cast<std::size_t>(j)] = rng.next_normal();
        dot += x[static_cast<std::size_t>(j)] *
               model.betas[static_cast<std::size_t>(z)][static_cast<std::size_t>(j)];
      }
      const double y = rng.next_bernoulli(norm_cdf(dot)) ? 1.0 : 0.0;
      records.push_back(Record{m, z, std::move(x), y});
    }
  }
  return Dataset(problem.num_groups(), plan, std::move(records));
}

/// Monte-Carlo excess 0-1 risk of `h` over the target population, relative to
/// the true-coefficient classifier (the Bayes rule in the linear class for a
/// probit label model). Both classifiers are scored on the same draws.
inline double excess_risk(const Hypothesis& h, const ProbitModel& truth,
                          const GroupDist& target, std::int64_t mc_samples,
                          std::uint64_t seed) {
  if (mc_samples < 1) throw DomainError("mc_samples must be >= 1");
  if (h.num_groups() != static_cast<int>(truth.betas.size()) ||
      h.num_groups() != target.size()) {
    throw DimensionError("hypothesis/truth/target group counts differ");
  }
  const int p = truth.feature_dim;
  const auto& probs = target.probs();
  std::int64_t h_wrong = 0;
  std::int64_t bayes_wrong = 0;
  std::vector<double> x(static_cast<std::size_t>(p));
  for (std::int64_t i = 0; i < mc_samples; ++i) {
    StreamRng rng(rng_child(seed, static_cast<std::uint64_t>(i)));
    const int z = rng.next_categorical(probs);
    double dot_true = 0.0;
    for (int j = 0; j < p; ++j) {
      x[static_cast<std::size_t>(j)] = rng.next_normal();
      dot_true += x[static_cast<std::size_t>(j)] *
                  truth.betas[static_cast<std::size_t>(z)][static_cast<std::size_t>(j)];
    }
    const int y = rng.next_bernoulli(norm_cdf(dot_true)) ? 1 : 0;
    if (h.predict(z, x) != y) ++h_wrong;
    if ((dot_true >= 0.0 ? 1 : 0) != y) ++bayes_wrong;
  }
  const double gap = static_cast<double>(h_wrong - bayes_wrong) / static_cast<double>(mc_samples);
  return std::max(gap, 0.0);
}

/// Full description of one simulation sweep.
struct ExperimentConfig {
  std::vector<SourceSpec> sources;
  GroupDist target;
  std::vector<double> budgets;
  int replications = 100;
  std::uint64_t seed = 0;
  Task task = Task::population_mean;
  double sigma2 = 5.0;        // conditional variance of the response model
  int feature_dim = 20;       // classification feature dimension
  std::int64_t eval_samples = 20000;  // Monte-Carlo size for excess risk
  std::string setting_label = "custom";
  std::string target_label = "explicit";

  void validate() const {
    if (sources.empty()) throw ConfigError("experiment needs at least one source");
    if (budgets.empty()) throw ConfigError("experiment needs at least one budget");
    double prev = 0.0;
    for (double b : budgets) {
      if (!(b > 0.0)) throw ConfigError("budgets must be positive");
      if (b <= prev) throw ConfigError("budgets must be strictly increasing");
      prev = b;
    }
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be > 0");
    if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
    if (eval_samples < 1) throw ConfigError("eval_samples must be >= 1");
  }

  ProblemInstance problem(double budget) const {
    return ProblemInstance(sources, target, budget);
  }
};

struct RiskPoint {
  double budget;
  double mean_risk;  // NaN when the cell is missing
  double se;
  int replications;  // successful replications behind the mean
};

struct RiskCurve {
  std::string method;
  std::vector<RiskPoint> points;
};

struct ExperimentResult {
  std::vector<RiskCurve> curves;
  int failed_cells = 0;
};

/// Draws the frozen mean model for an experiment (mu ~ Normal(0, 10 I)).
inline MeanModel draw_mean_model(const ExperimentConfig& config) {
  const int k = config.target.size();
  StreamRng rng(rng_child(config.seed, detail::kModelStream));
  std::vector<double> mu(static_cast<std::size_t>(k));
  double max_abs = 0.0;
  for (int z = 0; z < k; ++z) {
    mu[static_cast<std::size_t>(z)] = std::sqrt(10.0) * rng.next_normal();
    max_abs = std::max(max_abs, std::abs(mu[static_cast<std::size_t>(z)]));
  }
  return MeanModel(std::move(mu), config.sigma2, std::max(20.0, max_abs));
}

/// Draws the frozen probit model (beta_z ~ Normal(0, 10 I)).
inline ProbitModel draw_probit_model(const ExperimentConfig& config) {
  const int k = config.target.size();
  std::vector<std::vector<double>> betas(static_cast<std::size_t>(k));
  for (int z = 0; z < k; ++z) {
    StreamRng rng(rng_child(rng_child(config.seed, detail::kModelStream),
                            static_cast<std::uint64_t>(z)));
    betas[static_cast<std::size_t>(z)].resize(static_cast<std::size_t>(config.feature_dim));
    for (int j = 0; j < config.feature_dim; ++j) {
      betas[static_cast<std::size_t>(z)][static_cast<std::size_t>(j)] =
          std::sqrt(10.0) * rng.next_normal();
    }
  }
  return ProbitModel(std::move(betas), config.feature_dim);
}

/// Runs the Monte-Carlo sweep over methods x budgets x replications. Every
/// method sees the same per-replication draws (a smaller plan reads a prefix
/// of each source stream); a failed cell is recorded as missing and never
/// aborts the sweep. The output is identical for any worker count.
inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       const std::vector<PlanMethod>& methods,
                                       unsigned workers = 0) {
  config.validate();
  if (methods.empty()) throw ConfigError("experiment needs at least one method");
  const int k = config.target.size();
  const std::size_t n_methods = methods.size();
  const std::size_t n_budgets = config.budgets.size();
  const std::size_t reps = static_cast<std::size_t>(config.replications);

  std::optional<MeanModel> mean_model;
  std::optional<ProbitModel> probit_model;
  double theta_pm = 0.0;
  if (config.task == Task::classification) {
    probit_model.emplace(draw_probit_model(config));
  } else {
    mean_model.emplace(draw_mean_model(config));
    for (int z = 0; z < k; ++z) {
      theta_pm += config.target[z] * mean_model->mu[static_cast<std::size_t>(z)];
    }
  }

  // Plans are deterministic per (method, budget); compute them up front.
  struct Cell {
    std::optional<SamplingPlan> plan;
    std::optional<GroupDist> mix;
  };
  std::vector<Cell> cells(n_methods * n_budgets);
  int failed_cells = 0;
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    for (std::size_t bi = 0; bi < n_budgets; ++bi) {
      Cell& cell = cells[mi * n_budgets + bi];
      try {
        const ProblemInstance problem = config.problem(config.budgets[bi]);
        PlanResult result = [&] {
          switch (methods[mi]) {
            case PlanMethod::optimal:
              return config.task == Task::group_means ? solve_group_means_plan(problem)
                                                      : solve_optimal_plan(problem);
            case PlanMethod::uniform:
              return baseline_plan(BaselineKind::uniform, problem);
            case PlanMethod::inverse_cost:
              return baseline_plan(BaselineKind::inverse_cost, problem);
            case PlanMethod::nearest:
              return baseline_plan(BaselineKind::nearest, problem);
            case PlanMethod::hybrid:
              return baseline_plan(BaselineKind::hybrid, problem);
          }
          throw DomainError("unknown plan method");
        }();
        cell.mix = mixture(result.plan, problem);
        cell.plan = std::move(result.plan);
      } catch (const Error&) {
        ++failed_cells;
      }
    }
  }

  const std::uint64_t data_key = rng_child(config.seed, detail::kDataStream);
  const std::uint64_t eval_key = rng_child(config.seed, detail::kEvalStream);

  const std::size_t n_jobs = n_methods * n_budgets * reps;
  std::vector<double> risks(n_jobs, std::numeric_limits<double>::quiet_NaN());

  auto run_cell = [&](std::size_t job) {
    const std::size_t rep = job % reps;
    const std::size_t bi = (job / reps) % n_budgets;
    const std::size_t mi = job / (reps * n_budgets);
    const Cell& cell = cells[mi * n_budgets + bi];
    if (!cell.plan) return;
    const ProblemInstance problem = config.problem(config.budgets[bi]);
    const std::uint64_t rep_key = rng_child(data_key, static_cast<std::uint64_t>(rep));
    try {
      double risk = 0.0;
      if (config.task == Task::classification) {
        const Dataset data = generate_probit_dataset(*cell.plan, problem, *probit_model, rep_key);
        const Hypothesis h = iwerm_fit(data, config.target, *cell.mix);
        risk = excess_risk(h, *probit_model, config.target, config.eval_samples, eval_key);
      } else {
        const Dataset data = generate_mean_dataset(*cell.plan, problem, *mean_model, rep_key);
        if (config.task == Task::population_mean) {
          const double est = post_stratified(data, config.target);
          risk = (est - theta_pm) * (est - theta_pm);
        } else {
          const std::vector<double> means = group_means(data);
          for (int z = 0; z < k; ++z) {
            const double d = means[static_cast<std::size_t>(z)] -
                             mean_model->mu[static_cast<std::size_t>(z)];
            risk += d * d;
          }
        }
      }
      risks[job] = risk;
    } catch (const Error&) {
      // leave the replication missing
    }
  };

  unsigned n_workers = workers > 0 ? workers : std::thread::hardware_concurrency();
  if (n_workers < 1) n_workers = 1;
  if (n_workers == 1) {
    for (std::size_t job = 0; job < n_jobs; ++job) run_cell(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t job = next.fetch_add(1); job < n_jobs; job = next.fetch_add(1)) {
          run_cell(job);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // Single-threaded reduction in replication order.
  ExperimentResult out;
  out.failed_cells = failed_cells;
  out.curves.reserve(n_methods);
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    RiskCurve curve;
    curve.method = method_name(methods[mi]);
    curve.points.reserve(n_budgets);
    for (std::size_t bi = 0; bi < n_budgets; ++bi) {
      double sum = 0.0;
      int good = 0;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const double r = risks[(mi * n_budgets + bi) * reps + rep];
        if (!std::isnan(r)) {
          sum += r;
          ++good;
        }
      }
      RiskPoint pt{config.budgets[bi], std::numeric_limits<double>::quiet_NaN(), 0.0, good};
      if (good > 0) {
        const double mean = sum / good;
        double ss = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          const double r = risks[(mi * n_budgets + bi) * reps + rep];
          if (!std::isnan(r)) ss += (r - mean) * (r - mean);
        }
        pt.mean_risk = mean;
        pt.se = good > 1 ? std::sqrt(ss / (good - 1)) / std::sqrt(static_cast<double>(good)) : 0.0;
        if (good < static_cast<int>(reps)) ++out.failed_cells;
      } else if (cells[mi * n_budgets + bi].plan) {
        ++out.failed_cells;
      }
      curve.points.push_back(pt);
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

}  // namespace budgetwise
