#include "app/config.hpp"
#include "app/runs.hpp"

#include "alpinn/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace alpinn;

namespace {

struct Common {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<long> epochs;
  std::string out;
  long progress = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset_name, "Reference settings for a problem")
      ->check(CLI::IsMember(physics::problem_names()));
  cmd->add_option("--seed", c.seed, "Network initialization seed");
  cmd->add_option("--epochs", c.epochs, "Epoch budget (safeguard for al)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--progress", c.progress, "Print progress every N epochs (0: quiet)")->check(CLI::NonNegativeNumber);
}

app::RunConfig resolve(const Common& c, const std::string& fallback) {
  app::RunConfig cfg;
  if (!c.config_path.empty()) {
    cfg = app::load_config(c.config_path);
    if (!c.preset_name.empty()) throw ConfigError("preset: give either --preset or --config");
  } else {
    cfg = app::preset(c.preset_name.empty() ? fallback : c.preset_name);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.epochs) {
    cfg.epochs = *c.epochs;
    if (cfg.criteria) cfg.criteria->max_epochs = *c.epochs;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

app::Progress progress_of(const Common& c) { return {c.progress, &std::cerr}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Boundary-condition enforcement for physics-informed neural networks"};
  cli.require_subcommand(1);

  Common solve_opts, study_opts, bar_opts, geom_opts;
  auto* solve = cli.add_subcommand("solve", "Train one network and write history, fields and summary");
  add_common(solve, solve_opts);
  auto* study = cli.add_subcommand("study2d", "Compare the enforcement strategies on the disk");
  add_common(study, study_opts);
  auto* bar = cli.add_subcommand("bar1d", "Strong- versus weak-form training on the 1D bar");
  add_common(bar, bar_opts);
  auto* geom = cli.add_subcommand("geom-check", "Build and summarize the quadrature grids of a problem");
  add_common(geom, geom_opts);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : app::kUsage;
  }

  try {
    if (*solve) {
      const auto cfg = resolve(solve_opts, "fisher_branch");
      const auto t = app::run_solve(cfg, progress_of(solve_opts));
      std::cout << cfg.problem << " " << cfg.method << ": " << t.status() << " after " << t.epochs()
                << " epochs, I = " << t.interior_error << ", B = " << t.boundary_error << "\n";
      if (t.diverged) std::cerr << t.message << "\n";
      return t.exit_code();
    }
    if (*study) {
      const auto rows = app::run_study2d(resolve(study_opts, "disk2d"), progress_of(study_opts));
      for (const auto& r : rows)
        std::cout << r.label << ": I = " << r.interior_error << ", B = " << r.boundary_error << " (" << r.status
                  << ")\n";
      return app::kOk;
    }
    if (*bar) {
      const auto o = app::run_bar1d(resolve(bar_opts, "bar1d"), progress_of(bar_opts));
      std::cout << "strong form error " << o.strong_error << ", weak form error " << o.weak_error << "\n";
      return app::kOk;
    }
    if (*geom) {
      const auto r = app::run_geom_check(resolve(geom_opts, "fisher_branch"));
      std::cout << r.problem << ": " << r.interior_points << " interior points (volume " << r.volume << "), "
                << r.surface_points << " surface points (" << r.dirichlet_points << " Dirichlet, " << r.flux_points
                << " flux), area " << r.area << ", normal closure " << r.normal_closure << "\n";
      return app::kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return app::kUsage;
  } catch (const DivergedError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return app::kDiverged;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return app::kOk;
}
