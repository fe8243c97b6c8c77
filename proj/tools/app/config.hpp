#pragma once

#include "alpinn/enforce.hpp"
#include "alpinn/physics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace alpinn::app {

struct NetworkConfig {
  int hidden_layers = 2;
  int width = 30;
};

struct MethodParams {
  double beta = 1.0;    // penalty weight
  double alpha = 0.9;   // lra moving average
  double gamma = 2.0;   // al penalty growth
  double beta0 = 1.0;   // initial penalty for lra, sa and al
  double lambda0 = 0.0;
  double lr_beta = 0.5;
  double lr_lambda = 1e-2;
  enforce::GradientReference gradient_reference = enforce::GradientReference::squared;
  int n_test = 18;          // weak1d test functions
  int quad_points = 2001;   // weak1d trapezoid nodes
};

/// One run, after presets, the config file and command-line overrides have
/// been merged.
struct RunConfig {
  std::string problem = "fisher_branch";
  std::string method = "al";  // al, lra, penalty, sa, minmax, strong1d, weak1d
  int grid_n = 75;
  NetworkConfig network;
  double lr = 5e-3;
  long epochs = 10000;
  std::optional<enforce::ConvergenceCriteria> criteria;  // present iff method == al
  MethodParams method_params;
  physics::ProblemOptions problem_params;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError naming the offending field.
  void validate() const;

  std::vector<int> layer_sizes(int in, int out) const;
};

/// Reference settings for each catalog problem; the preset name is the problem
/// name. Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

/// Overlays the keys present in j onto base. Unknown keys and wrong types
/// raise ConfigError naming the key.
RunConfig merge(RunConfig base, const nlohmann::json& j);

/// Reads a JSON config file; a "preset" or "problem" key selects the base.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& c);

std::string reference_name(enforce::GradientReference r);

}  // namespace alpinn::app
