#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "budgetwise/core.hpp"
#include "budgetwise/errors.hpp"
#include "budgetwise/simkit.hpp"

namespace budgetwise {

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& name) {
  if (!j.contains(name)) throw ConfigError("missing required field `" + name + "`");
  return j.at(name);
}

inline double field_number(const nlohmann::json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError("field `" + name + "` must be a number");
  return j.get<double>();
}

inline std::vector<double> field_prob_vector(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError("field `" + name + "` must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ConfigError("field `" + name + "[" + std::to_string(i) + "]` must be a number");
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

}  // namespace detail

/// Everything a config file can describe; commands pick the parts they need.
struct FileConfig {
  std::vector<SourceSpec> sources;
  std::optional<TargetKind> target_kind;   // set when target given as a kind
  std::optional<GroupDist> target_probs;   // set when target given explicitly
  std::vector<double> budgets;             // from `budget` or `budgets`
  Task task = Task::population_mean;
  int replications = 100;
  std::uint64_t seed = 20250810;
  std::vector<PlanMethod> methods;
  double sigma2 = 5.0;
  int feature_dim = 20;
  std::int64_t eval_samples = 20000;

  GroupDist resolved_target() const {
    if (target_probs) return *target_probs;
    return make_target(*target_kind, static_cast<int>(sources.front().dist.size()));
  }

  std::string target_label() const {
    if (target_probs) return "explicit";
    return target_kind_name(*target_kind);
  }

  ProblemInstance problem() const {
    if (budgets.empty()) throw ConfigError("missing required field `budget`");
    return ProblemInstance(sources, resolved_target(), budgets.back());
  }

  ExperimentConfig experiment(const std::string& setting_label) const {
    ExperimentConfig config{sources,
                            resolved_target(),
                            budgets,
                            replications,
                            seed,
                            task,
                            sigma2,
                            feature_dim,
                            eval_samples,
                            setting_label,
                            target_label()};
    config.validate();
    return config;
  }
};

inline Task parse_task(const std::string& name) {
  if (name == "population_mean") return Task::population_mean;
  if (name == "group_means") return Task::group_means;
  if (name == "classification") return Task::classification;
  throw ConfigError("field `task`: unknown task `" + name + "`");
}

inline PlanMethod parse_method(const std::string& name) {
  if (name == "optimal") return PlanMethod::optimal;
  if (name == "uniform") return PlanMethod::uniform;
  if (name == "inverse_cost") return PlanMethod::inverse_cost;
  if (name == "nearest") return PlanMethod::nearest;
  if (name == "hybrid") return PlanMethod::hybrid;
  throw ConfigError("field `methods`: unknown method `" + name + "`");
}

inline TargetKind parse_target_kind(const std::string& name) {
  if (name == "uniform") return TargetKind::uniform;
  if (name == "increasing") return TargetKind::increasing;
  if (name == "pyramid") return TargetKind::pyramid;
  throw ConfigError("field `target.kind`: unknown kind `" + name + "`");
}

inline FileConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  FileConfig config;

  const auto& sources = detail::require_field(j, "sources");
  if (!sources.is_array() || sources.empty()) {
    throw ConfigError("field `sources` must be a non-empty array");
  }
  for (std::size_t m = 0; m < sources.size(); ++m) {
    const std::string where = "sources[" + std::to_string(m) + "]";
    const auto& s = sources[m];
    if (!s.is_object()) throw ConfigError("field `" + where + "` must be an object");
    std::vector<double> probs =
        detail::field_prob_vector(detail::require_field(s, "probs"), where + ".probs");
    const double cost = detail::field_number(detail::require_field(s, "cost"), where + ".cost");
    try {
      config.sources.emplace_back(GroupDist(std::move(probs)), cost);
    } catch (const Error& e) {
      throw ConfigError("field `" + where + "`: " + e.what());
    }
  }

  const auto& target = detail::require_field(j, "target");
  if (!target.is_object()) throw ConfigError("field `target` must be an object");
  if (target.contains("probs")) {
    std::vector<double> probs = detail::field_prob_vector(target.at("probs"), "target.probs");
    try {
      config.target_probs = GroupDist(std::move(probs));
    } catch (const Error& e) {
      throw ConfigError("field `target.probs`: " + std::string(e.what()));
    }
  } else if (target.contains("kind")) {
    if (!target.at("kind").is_string()) throw ConfigError("field `target.kind` must be a string");
    config.target_kind = parse_target_kind(target.at("kind").get<std::string>());
  } else {
    throw ConfigError("field `target` needs either `kind` or `probs`");
  }

  if (j.contains("budgets")) {
    config.budgets = detail::field_prob_vector(j.at("budgets"), "budgets");
  } else if (j.contains("budget")) {
    config.budgets = {detail::field_number(j.at("budget"), "budget")};
  }

  if (j.contains("task")) {
    if (!j.at("task").is_string()) throw ConfigError("field `task` must be a string");
    config.task = parse_task(j.at("task").get<std::string>());
  }
  if (j.contains("replications")) {
    if (!j.at("replications").is_number_integer() || j.at("replications").get<int>() < 1) {
      throw ConfigError("field `replications` must be a positive integer");
    }
    config.replications = j.at("replications").get<int>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw ConfigError("field `seed` must be a nonnegative integer");
    }
    config.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("methods")) {
    const auto& methods = j.at("methods");
    if (!methods.is_array() || methods.empty()) {
      throw ConfigError("field `methods` must be a non-empty array of strings");
    }
    for (const auto& m : methods) {
      if (!m.is_string()) throw ConfigError("field `methods` must contain strings");
      config.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  if (j.contains("sigma2")) {
    config.sigma2 = detail::field_number(j.at("sigma2"), "sigma2");
    if (!(config.sigma2 > 0.0)) throw ConfigError("field `sigma2` must be > 0");
  }
  if (j.contains("feature_dim")) {
    if (!j.at("feature_dim").is_number_integer() || j.at("feature_dim").get<int>() < 1) {
      throw ConfigError("field `feature_dim` must be a positive integer");
    }
    config.feature_dim = j.at("feature_dim").get<int>();
  }
  if (j.contains("eval_samples")) {
    if (!j.at("eval_samples").is_number_integer() || j.at("eval_samples").get<std::int64_t>() < 1) {
      throw ConfigError("field `eval_samples` must be a positive integer");
    }
    config.eval_samples = j.at("eval_samples").get<std::int64_t>();
  }
  return config;
}

inline FileConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file `" + path + "`");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file `" + path + "` is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace budgetwise
