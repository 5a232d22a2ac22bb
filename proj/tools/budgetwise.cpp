// Command-line front end: sampling-plan reports, Monte-Carlo risk sweeps,
// verification suites, and risk-curve plots.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "budgetwise/config.hpp"
#include "budgetwise/core.hpp"
#include "budgetwise/csv.hpp"
#include "budgetwise/errors.hpp"
#include "budgetwise/planner.hpp"
#include "budgetwise/presets.hpp"
#include "budgetwise/simkit.hpp"
#include "budgetwise/svg.hpp"
#include "budgetwise/theory.hpp"
#include "budgetwise/verify.hpp"

namespace bw = budgetwise;

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const bw::InfeasibleError*>(&e) != nullptr ||
      dynamic_cast<const bw::BudgetTooSmallError*>(&e) != nullptr) {
    return 2;
  }
  return 1;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("BUDGETWISE_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const std::uint64_t value = std::strtoull(env, &end, 10);
  if (end == nullptr || *end != '\0') {
    throw bw::ConfigError("BUDGETWISE_SEED is not an unsigned integer");
  }
  return value;
}

struct PlanArgs {
  std::string config_path;
  std::string target_kind;
  std::string method = "optimal";
  bool as_json = false;
  bool as_table = false;
};

int run_plan(const PlanArgs& args) {
  bw::FileConfig file = bw::load_config(args.config_path);
  if (file.budgets.empty()) throw bw::ConfigError("missing required field `budget`");

  bw::GroupDist target = file.resolved_target();
  if (!args.target_kind.empty()) {
    target = bw::make_target(bw::parse_target_kind(args.target_kind),
                             static_cast<int>(file.sources.front().dist.size()));
  }
  const bw::ProblemInstance problem(file.sources, target, file.budgets.back());

  bw::PlanResult result = [&] {
    if (args.method == "optimal") return bw::solve_optimal_plan(problem);
    if (args.method == "uniform") return bw::baseline_plan(bw::BaselineKind::uniform, problem);
    if (args.method == "inverse_cost") {
      return bw::baseline_plan(bw::BaselineKind::inverse_cost, problem);
    }
    if (args.method == "nearest") return bw::baseline_plan(bw::BaselineKind::nearest, problem);
    if (args.method == "hybrid") return bw::baseline_plan(bw::BaselineKind::hybrid, problem);
    throw bw::ConfigError("unknown method `" + args.method + "`");
  }();

  const bw::GroupDist mix = bw::mixture(result.plan, problem);
  const double d = bw::chi2_discrepancy(target, mix);
  std::vector<double> expected_counts(static_cast<std::size_t>(problem.num_groups()), 0.0);
  for (int m = 0; m < problem.num_sources(); ++m) {
    for (int z = 0; z < problem.num_groups(); ++z) {
      expected_counts[static_cast<std::size_t>(z)] +=
          static_cast<double>(result.plan.counts[static_cast<std::size_t>(m)]) *
          problem.sources[m].dist[z];
    }
  }
  const double leading = file.sigma2 * result.avg_cost * d / result.total_cost;

  if (args.as_json) {
    nlohmann::json j;
    j["method"] = args.method;
    j["counts"] = result.plan.counts;
    j["total_cost"] = result.total_cost;
    j["avg_cost"] = result.avg_cost;
    j["mixture"] = mix.probs();
    j["expected_group_counts"] = expected_counts;
    j["discrepancy"] = d;
    j["n_eff"] = result.objective;
    j["sigma2"] = file.sigma2;
    j["leading_term"] = leading;
    j["budget"] = problem.budget;
    std::cout << j.dump(2) << "\n";
  } else {
    auto print_vec = [](const char* name, const auto& v) {
      std::cout << name;
      for (const auto& x : v) std::cout << " " << x;
      std::cout << "\n";
    };
    std::cout << "method " << args.method << "\n";
    print_vec("counts", result.plan.counts);
    std::cout << "total_cost " << result.total_cost << "\n";
    std::cout << "avg_cost " << result.avg_cost << "\n";
    print_vec("mixture", mix.probs());
    print_vec("expected_group_counts", expected_counts);
    std::cout << "discrepancy " << d << "\n";
    std::cout << "n_eff " << result.objective << "\n";
    std::cout << "leading_term " << leading << " (sigma2 " << file.sigma2 << ")\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::string preset;
  std::string out_path;
  unsigned workers = 0;
  int replications = 0;   // 0 = keep config value
  bool no_theory = false;
};

int run_simulate(const SimulateArgs& args) {
  if (args.config_path.empty() == args.preset.empty()) {
    throw bw::ConfigError("provide exactly one of a config file or --preset");
  }
  if (args.out_path.empty()) throw bw::ConfigError("--out is required");

  std::vector<bw::PlanMethod> methods = bw::all_plan_methods();
  bw::ExperimentConfig config = [&] {
    if (!args.preset.empty()) return bw::make_preset(args.preset);
    bw::FileConfig file = bw::load_config(args.config_path);
    if (file.budgets.empty()) throw bw::ConfigError("missing required field `budgets`");
    if (!file.methods.empty()) methods = file.methods;
    return file.experiment("config");
  }();
  if (args.replications > 0) config.replications = args.replications;
  if (const auto env_seed = seed_from_env()) config.seed = *env_seed;
  config.validate();

  bw::ExperimentResult result = bw::run_experiment(config, methods, args.workers);

  if (!args.no_theory && config.task != bw::Task::classification) {
    bw::RiskCurve theory;
    theory.method = "theory";
    for (double budget : config.budgets) {
      bw::RiskPoint pt{budget, std::numeric_limits<double>::quiet_NaN(), 0.0, 0};
      try {
        const bw::ProblemInstance problem = config.problem(budget);
        const bw::BoundReport report = config.task == bw::Task::population_mean
                                           ? bw::minimax_pm_leading(problem, config.sigma2)
                                           : bw::minimax_gm_leading(problem, config.sigma2);
        pt.mean_risk = report.leading_term;
      } catch (const bw::Error&) {
        // leave the reference point missing
      }
      theory.points.push_back(pt);
    }
    result.curves.push_back(std::move(theory));
  }

  const std::string csv = bw::curves_to_csv(config.setting_label, bw::task_name(config.task),
                                            config.target_label, result.curves);
  bw::write_text_file(args.out_path, csv);

  for (const auto& curve : result.curves) {
    int present = 0;
    for (const auto& pt : curve.points) {
      if (!std::isnan(pt.mean_risk)) ++present;
    }
    std::cout << "curve " << curve.method << ": " << present << "/" << curve.points.size()
              << " budgets";
    if (present > 0) {
      for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
        if (!std::isnan(it->mean_risk)) {
          std::cout << ", risk@" << it->budget << " = " << it->mean_risk;
          break;
        }
      }
    }
    std::cout << "\n";
  }
  if (result.failed_cells > 0) {
    std::cout << "warning: " << result.failed_cells << " cell(s) recorded as missing\n";
  }
  return 0;
}

struct VerifyArgs {
  std::string suite;
  unsigned workers = 0;
};

int run_verify(const VerifyArgs& args) {
  bool ok = false;
  if (args.suite == "integral") {
    ok = bw::verify_integral(std::cout);
  } else if (args.suite == "oracle") {
    ok = bw::verify_oracle(std::cout);
  } else if (args.suite == "consistency") {
    ok = bw::verify_consistency(std::cout, args.workers);
  } else {
    throw bw::ConfigError("unknown suite `" + args.suite +
                          "` (expected integral, oracle, or consistency)");
  }
  std::cout << (ok ? "all checks passed" : "some checks failed") << "\n";
  return ok ? 0 : 1;
}

struct ReportArgs {
  std::string csv_path;
  std::string out_path;
  bool script = false;
};

int run_report(const ReportArgs& args) {
  const std::vector<bw::CsvRow> rows = bw::load_risk_csv(args.csv_path);
  if (args.script) {
    bw::write_text_file(args.out_path,
                        bw::render_risk_gnuplot(rows, args.csv_path, args.out_path + ".svg"));
  } else {
    bw::write_text_file(args.out_path, bw::render_risk_svg(rows));
  }
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budget-optimal multi-source sampling plans, estimators, and risk simulations"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  CLI::App* plan = app.add_subcommand("plan", "compute a sampling plan for a problem config");
  plan->add_option("config", plan_args.config_path, "JSON problem config")->required();
  plan->add_option("--target-kind", plan_args.target_kind,
                   "override the target with a built-in kind (uniform|increasing|pyramid)");
  plan->add_option("--method", plan_args.method,
                   "optimal|uniform|inverse_cost|nearest|hybrid (default optimal)");
  plan->add_flag("--json", plan_args.as_json, "emit a JSON report");
  plan->add_flag("--table", plan_args.as_table, "emit a plain-text report (default)");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte-Carlo risk sweep to CSV");
  simulate->add_option("config", sim_args.config_path, "JSON experiment config");
  simulate->add_option("--preset", sim_args.preset,
                       "built-in experiment, e.g. setting1-uniform-mean");
  simulate->add_option("--out", sim_args.out_path, "output CSV path")->required();
  simulate->add_option("--workers", sim_args.workers, "worker threads (default: hardware)");
  simulate->add_option("--replications", sim_args.replications,
                       "override the configured replication count");
  simulate->add_flag("--no-theory", sim_args.no_theory, "skip the theory reference curve");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run a property suite and report pass/fail");
  verify->add_option("--suite", verify_args.suite, "integral|oracle|consistency")->required();
  verify->add_option("--workers", verify_args.workers, "worker threads (default: hardware)");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "render a risk-curve CSV as an SVG plot");
  report->add_option("csv", report_args.csv_path, "input CSV path")->required();
  report->add_option("--out", report_args.out_path, "output path")->required();
  report->add_flag("--script", report_args.script, "emit a gnuplot script instead of SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (plan->parsed()) return run_plan(plan_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (verify->parsed()) return run_verify(verify_args);
    if (report->parsed()) return run_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}
