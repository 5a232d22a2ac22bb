#pragma once

#include <string>
#include <vector>

#include "budgetwise/errors.hpp"
#include "budgetwise/simkit.hpp"

namespace budgetwise {

/// Default master seed for the shipped presets; documented in the README so
/// the published CSVs are reproducible.
inline constexpr std::uint64_t kPresetSeed = 20250810;

/// 20 evenly spaced budgets, 25 through 500.
inline std::vector<double> preset_budget_grid() {
  std::vector<double> budgets;
  budgets.reserve(20);
  for (int i = 1; i <= 20; ++i) budgets.push_back(25.0 * i);
  return budgets;
}

inline std::vector<PlanMethod> all_plan_methods() {
  return {PlanMethod::optimal, PlanMethod::uniform, PlanMethod::inverse_cost,
          PlanMethod::nearest, PlanMethod::hybrid};
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const char* setting : {"setting1", "setting2"}) {
    for (const char* target : {"uniform", "increasing", "pyramid"}) {
      for (const char* task : {"mean", "group-means", "classification"}) {
        names.push_back(std::string(setting) + "-" + target + "-" + task);
      }
    }
  }
  return names;
}

/// Builds the experiment behind a preset name such as `setting1-uniform-mean`.
inline ExperimentConfig make_preset(const std::string& name) {
  std::string setting, target, task;
  {
    const auto first = name.find('-');
    if (first == std::string::npos) throw ConfigError("unknown preset `" + name + "`");
    setting = name.substr(0, first);
    const std::string rest = name.substr(first + 1);
    // task names may contain dashes, so match the target prefix explicitly
    for (const char* t : {"uniform", "increasing", "pyramid"}) {
      const std::string prefix = std::string(t) + "-";
      if (rest.rfind(prefix, 0) == 0) {
        target = t;
        task = rest.substr(prefix.size());
        break;
      }
    }
    if (target.empty()) throw ConfigError("unknown preset `" + name + "`");
  }

  std::vector<SourceSpec> sources;
  if (setting == "setting1") {
    sources = setting_one();
  } else if (setting == "setting2") {
    sources = setting_two();
  } else {
    throw ConfigError("unknown preset setting `" + setting + "`");
  }
  const int k = static_cast<int>(sources.front().dist.size());

  TargetKind kind;
  if (target == "uniform") {
    kind = TargetKind::uniform;
  } else if (target == "increasing") {
    kind = TargetKind::increasing;
  } else if (target == "pyramid") {
    kind = TargetKind::pyramid;
  } else {
    throw ConfigError("unknown preset target `" + target + "`");
  }

  Task task_id;
  if (task == "mean") {
    task_id = Task::population_mean;
  } else if (task == "group-means") {
    task_id = Task::group_means;
  } else if (task == "classification") {
    task_id = Task::classification;
  } else {
    throw ConfigError("unknown preset task `" + task + "`");
  }

  return ExperimentConfig{std::move(sources),
                          make_target(kind, k),
                          preset_budget_grid(),
                          100,
                          kPresetSeed,
                          task_id,
                          5.0,
                          20,
                          20000,
                          setting,
                          target_kind_name(kind)};
}

}  // namespace budgetwise
