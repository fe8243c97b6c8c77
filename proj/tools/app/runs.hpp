#pragma once

#include "config.hpp"

#include "alpinn/enforce.hpp"
#include "alpinn/losses.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace alpinn::app {

enum ExitCode { kOk = 0, kUsage = 2, kDiverged = 3, kNotConverged = 4 };

/// Progress lines on a stream every `every` epochs; 0 disables them.
struct Progress {
  long every = 0;
  std::ostream* out = nullptr;
};

/// A finished (or aborted) training run.
struct Training {
  std::unique_ptr<physics::Problem> problem;
  losses::Discretization disc;
  diffnet::MlpParams params;
  std::vector<enforce::HistoryRow> history;
  enforce::Termination termination = enforce::Termination::fixed_epochs;
  bool diverged = false;
  std::string message;
  double interior_error = 0.0;
  double boundary_error = 0.0;
  int outer_iterations = 0;
  double beta_max = 0.0;
  double wall_time_seconds = 0.0;

  long epochs() const { return static_cast<long>(history.size()); }
  bool converged() const { return termination == enforce::Termination::converged; }
  /// 0 on success or convergence, 3 on divergence, 4 when the safeguard fired.
  int exit_code() const;
  std::string status() const;
};

/// Trains a strong-form PINN as configured (methods al, lra, penalty, sa,
/// minmax and strong1d). Divergence is reported in the result.
Training train(const RunConfig& config, const Progress& progress = {});

/// train() followed by history.csv, fields.vtk and summary.json in output_dir.
Training run_solve(const RunConfig& config, const Progress& progress = {});

struct StudyRow {
  std::string label;
  std::string method;
  double beta = 0.0;
  double interior_error = 0.0;  // averaged over the last 100 epochs
  double boundary_error = 0.0;
  std::string status;
};

/// The five enforcement strategies (penalty at two weights) on the disk,
/// each for config.epochs epochs. Writes table.csv and one history file per
/// row; a failing row is reported and the others still run.
std::vector<StudyRow> run_study2d(const RunConfig& config, const Progress& progress = {});

struct BarOutcome {
  double strong_error = 0.0;  // relative L1 against the exact displacement
  double weak_error = 0.0;
  std::vector<double> strong_loss, weak_loss;
};

/// Strong- and weak-form training on the bar, same initialization, config.epochs
/// epochs each. Writes solutions.csv and losses.csv.
BarOutcome run_bar1d(const RunConfig& config, const Progress& progress = {});

struct GeometryReport {
  std::string problem;
  long interior_points = 0;
  double volume = 0.0;
  long surface_points = 0;
  long dirichlet_points = 0;
  long flux_points = 0;
  double area = 0.0;
  double normal_closure = 0.0;  // |sum n dA| / sum dA
};

/// Builds the quadrature grids of a problem and summarizes them; writes
/// geometry.json (and surface.vtk when a mesh exists) to output_dir.
GeometryReport run_geom_check(const RunConfig& config);

// Writers, shared with the tests.
void write_history_csv(const std::filesystem::path& path, const std::vector<enforce::HistoryRow>& rows);
void write_fields_vtk(std::ostream& out, const Eigen::MatrixXd& points, const Eigen::MatrixXd& u_hat,
                      const Eigen::MatrixXd& u_exact);

/// Mean of a history column over the last n rows.
double tail_mean(const std::vector<enforce::HistoryRow>& rows, double enforce::HistoryRow::*column, std::size_t n);

}  // namespace alpinn::app
