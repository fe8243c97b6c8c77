#include "config.hpp"

#include "alpinn/error.hpp"

#include <algorithm>
#include <fstream>

namespace alpinn::app {

using nlohmann::json;

namespace {

const std::vector<std::string> kMethods = {"al", "lra", "penalty", "sa", "minmax", "strong1d", "weak1d"};

[[noreturn]] void fail(const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); }

template <class T>
T read(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(field, "wrong type (" + std::string(j.type_name()) + ")");
  }
}

// Calls f(key, value) for every key, rejecting those not in allowed.
template <class F>
void each_key(const json& j, const std::string& section, std::initializer_list<const char*> allowed, F f) {
  if (!j.is_object()) fail(section, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string field = section.empty() ? key : section + "." + key;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(field, "unknown key");
    f(key, value, field);
  }
}

enforce::GradientReference parse_reference(const std::string& s, const std::string& field) {
  if (s == "initial") return enforce::GradientReference::initial;
  if (s == "squared") return enforce::GradientReference::squared;
  if (s == "outer_start") return enforce::GradientReference::outer_start;
  if (s == "outer_start_squared") return enforce::GradientReference::outer_start_squared;
  fail(field, "unknown value '" + s + "'");
}

enforce::ConvergenceCriteria criteria(double z, double b, double r) {
  enforce::ConvergenceCriteria c;
  c.objective_tol = z;
  c.boundary_tol = b;
  c.gradient_tol = r;
  return c;
}

}  // namespace

std::string reference_name(enforce::GradientReference r) {
  switch (r) {
    case enforce::GradientReference::initial: return "initial";
    case enforce::GradientReference::squared: return "squared";
    case enforce::GradientReference::outer_start: return "outer_start";
    case enforce::GradientReference::outer_start_squared: return "outer_start_squared";
  }
  return "?";
}

std::vector<int> RunConfig::layer_sizes(int in, int out) const {
  std::vector<int> s{in};
  for (int i = 0; i < network.hidden_layers; ++i) s.push_back(network.width);
  s.push_back(out);
  return s;
}

void RunConfig::validate() const {
  const auto& names = physics::problem_names();
  if (std::find(names.begin(), names.end(), problem) == names.end()) fail("problem", "unknown value '" + problem + "'");
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
    fail("method", "unknown value '" + method + "'");
  const bool one_d = method == "strong1d" || method == "weak1d";
  if (one_d != (problem == "bar1d")) fail("method", "strong1d and weak1d go with bar1d and only with it");
  if (criteria.has_value() != (method == "al")) fail("criteria", "present exactly when method is al");
  if (grid_n < 2) fail("grid_n", "must be at least 2");
  if (network.hidden_layers < 1) fail("network.hidden_layers", "must be at least 1");
  if (network.width < 1) fail("network.width", "must be at least 1");
  if (!(lr > 0.0)) fail("lr", "must be positive");
  if (epochs < 1) fail("epochs", "must be at least 1");
  if (criteria) {
    if (!(criteria->objective_tol > 0.0)) fail("criteria.Z_f", "must be positive");
    if (!(criteria->boundary_tol > 0.0)) fail("criteria.B_f", "must be positive");
    if (!(criteria->gradient_tol > 0.0)) fail("criteria.R_f", "must be positive");
    if (criteria->max_epochs < 1) fail("criteria.max_epochs", "must be at least 1");
  }
  const auto& m = method_params;
  if (!(m.beta >= 0.0)) fail("method_params.beta", "must be non-negative");
  if (!(m.alpha >= 0.0 && m.alpha <= 1.0)) fail("method_params.alpha", "must lie in [0, 1]");
  if (!(m.gamma > 1.0)) fail("method_params.gamma", "must exceed 1");
  if (!(m.beta0 > 0.0)) fail("method_params.beta0", "must be positive");
  if (!std::isfinite(m.lambda0)) fail("method_params.lambda0", "must be finite");
  if (!(m.lr_beta > 0.0)) fail("method_params.lr_beta", "must be positive");
  if (!(m.lr_lambda > 0.0)) fail("method_params.lr_lambda", "must be positive");
  if (m.n_test < 1) fail("method_params.n_test", "must be at least 1");
  if (m.quad_points < 2) fail("method_params.quad_points", "must be at least 2");
  const auto& p = problem_params;
  if (!(p.youngs_modulus > 0.0)) fail("problem_params.E", "must be positive");
  if (!(p.poisson_ratio > -1.0 && p.poisson_ratio < 0.5)) fail("problem_params.nu", "must lie in (-1, 0.5)");
  if (!(p.heat_sigma >= 0.0)) fail("problem_params.sigma", "must be non-negative");
  if (p.disk_boundary_points < 3) fail("problem_params.disk_boundary_points", "must be at least 3");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.problem = name;
  if (name == "disk2d") {
    c.grid_n = 100;
    c.network.width = 25;
    c.lr = 5e-3;
    c.criteria = criteria(5e-3, 5e-3, 1e-2);
    c.criteria->max_epochs = 10000;
  } else if (name == "fisher_branch") {
    c.criteria = criteria(5e-3, 1e-2, 1e-2);
  } else if (name == "heat_tabletop") {
    c.criteria = criteria(5e-3, 7.5e-3, 1e-2);
  } else if (name == "elastic_pipe") {
    c.network.width = 50;
    c.lr = 1e-3;
    c.criteria = criteria(2.5e-3, 5e-3, 1e-2);
    // Measured from the start of each inner loop; from the first epoch the
    // pipe runs away to 2^17.
    c.method_params.gradient_reference = enforce::GradientReference::outer_start_squared;
  } else if (name == "sphere_check") {
    c.grid_n = 40;
    c.network.width = 20;
    c.criteria = criteria(5e-3, 1e-2, 1e-2);
  } else if (name == "bar1d") {
    c.method = "strong1d";
    c.grid_n = 2001;
    c.network.width = 50;
    c.lr = 1e-3;
    c.epochs = 500000;
  } else {
    fail("preset", "unknown value '" + name + "'");
  }
  return c;
}

RunConfig merge(RunConfig c, const json& j) {
  const bool has_criteria = j.is_object() && j.contains("criteria");
  each_key(j, "",
           {"preset", "problem", "method", "grid_n", "network", "lr", "epochs", "criteria", "method_params",
            "problem_params", "seed", "output_dir"},
           [&](const std::string& key, const json& v, const std::string& field) {
             if (key == "preset") {
               read<std::string>(v, field);
             } else if (key == "problem") {
               c.problem = read<std::string>(v, field);
             } else if (key == "method") {
               c.method = read<std::string>(v, field);
               if (c.method != "al" && !has_criteria) c.criteria.reset();
               if (c.method == "al" && !c.criteria) c.criteria = enforce::ConvergenceCriteria{};
             } else if (key == "grid_n") {
               c.grid_n = read<int>(v, field);
             } else if (key == "network") {
               each_key(v, field, {"hidden_layers", "width"}, [&](const std::string& k, const json& x, const std::string& f) {
                 (k == "width" ? c.network.width : c.network.hidden_layers) = read<int>(x, f);
               });
             } else if (key == "lr") {
               c.lr = read<double>(v, field);
             } else if (key == "epochs") {
               c.epochs = read<long>(v, field);
             } else if (key == "criteria") {
               if (v.is_null()) {
                 c.criteria.reset();
                 return;
               }
               enforce::ConvergenceCriteria cr = c.criteria.value_or(enforce::ConvergenceCriteria{});
               each_key(v, field, {"Z_f", "B_f", "R_f", "max_epochs"},
                        [&](const std::string& k, const json& x, const std::string& f) {
                          if (k == "Z_f") cr.objective_tol = read<double>(x, f);
                          if (k == "B_f") cr.boundary_tol = read<double>(x, f);
                          if (k == "R_f") cr.gradient_tol = read<double>(x, f);
                          if (k == "max_epochs") cr.max_epochs = read<long>(x, f);
                        });
               c.criteria = cr;
             } else if (key == "method_params") {
               auto& m = c.method_params;
               each_key(v, field,
                        {"beta", "alpha", "gamma", "beta0", "lambda0", "lr_beta", "lr_lambda", "gradient_reference",
                         "n_test", "quad_points"},
                        [&](const std::string& k, const json& x, const std::string& f) {
                          if (k == "beta") m.beta = read<double>(x, f);
                          if (k == "alpha") m.alpha = read<double>(x, f);
                          if (k == "gamma") m.gamma = read<double>(x, f);
                          if (k == "beta0") m.beta0 = read<double>(x, f);
                          if (k == "lambda0") m.lambda0 = read<double>(x, f);
                          if (k == "lr_beta") m.lr_beta = read<double>(x, f);
                          if (k == "lr_lambda") m.lr_lambda = read<double>(x, f);
                          if (k == "gradient_reference")
                            m.gradient_reference = parse_reference(read<std::string>(x, f), f);
                          if (k == "n_test") m.n_test = read<int>(x, f);
                          if (k == "quad_points") m.quad_points = read<int>(x, f);
                        });
             } else if (key == "problem_params") {
               auto& p = c.problem_params;
               each_key(v, field, {"sigma", "E", "nu", "u0", "fisher_mu", "fisher_rate", "disk_boundary_points"},
                        [&](const std::string& k, const json& x, const std::string& f) {
                          if (k == "sigma") p.heat_sigma = read<double>(x, f);
                          if (k == "E") p.youngs_modulus = read<double>(x, f);
                          if (k == "nu") p.poisson_ratio = read<double>(x, f);
                          if (k == "u0") p.pipe_u0 = read<double>(x, f);
                          if (k == "fisher_mu") p.fisher_mu = read<double>(x, f);
                          if (k == "fisher_rate") p.fisher_rate = read<double>(x, f);
                          if (k == "disk_boundary_points") p.disk_boundary_points = read<int>(x, f);
                        });
             } else if (key == "seed") {
               c.seed = read<std::uint64_t>(v, field);
             } else if (key == "output_dir") {
               c.output_dir = read<std::string>(v, field);
             }
           });
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail("config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config", "expected a JSON object");
  std::string base = "fisher_branch";
  if (j.contains("preset")) base = read<std::string>(j["preset"], "preset");
  else if (j.contains("problem")) base = read<std::string>(j["problem"], "problem");
  return merge(preset(base), j);
}

json to_json(const RunConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["method"] = c.method;
  j["grid_n"] = c.grid_n;
  j["network"] = {{"hidden_layers", c.network.hidden_layers}, {"width", c.network.width}};
  j["lr"] = c.lr;
  if (c.criteria) {
    j["criteria"] = {{"Z_f", c.criteria->objective_tol},
                     {"B_f", c.criteria->boundary_tol},
                     {"R_f", c.criteria->gradient_tol},
                     {"max_epochs", c.criteria->max_epochs}};
  } else {
    j["epochs"] = c.epochs;
  }
  const auto& m = c.method_params;
  j["method_params"] = {{"beta", m.beta},         {"alpha", m.alpha},
                        {"gamma", m.gamma},       {"beta0", m.beta0},
                        {"lambda0", m.lambda0},   {"lr_beta", m.lr_beta},
                        {"lr_lambda", m.lr_lambda}, {"gradient_reference", reference_name(m.gradient_reference)},
                        {"n_test", m.n_test},     {"quad_points", m.quad_points}};
  const auto& p = c.problem_params;
  j["problem_params"] = {{"sigma", p.heat_sigma},         {"E", p.youngs_modulus},
                         {"nu", p.poisson_ratio},         {"u0", p.pipe_u0},
                         {"fisher_mu", p.fisher_mu},      {"fisher_rate", p.fisher_rate},
                         {"disk_boundary_points", p.disk_boundary_points}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  return j;
}

}  // namespace alpinn::app
