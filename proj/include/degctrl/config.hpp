#ifndef DEGCTRL_CONFIG_HPP
#define DEGCTRL_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "degctrl/game.hpp"
#include "degctrl/oracle.hpp"

namespace degctrl {

/// Thrown for malformed or out-of-range configuration; the CLI maps it to
/// exit code 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FieldSpec {
  std::string kind = "zero";  // zero | bump | samples | eigenmode | checkerboard
  double center = 0.5;
  double width = 0.15;
  double scale = 1.0;
  bool normalize = true;
  int index = 0;  // eigenmode index
  std::vector<double> values;
};

struct DensitySpec {
  std::string kind = "uniform";  // uniform | mask | values
  std::vector<int> cells;        // subregion-relative indices (mask)
  std::vector<double> values;
};

struct SolverConfig {
  double tol = 1e-7;
  int max_iters = 50000;
  int n_starts = 3;
  int dual_starts = 2;
  int dc_max_iters = 15;
  int subproblem_max_iters = 2000;
  int obs_samples = 200;
  int outer_iters = 30;
  double do_tol_rel = 0.05;
  double do_tol_abs = 1e-6;
  int do_max_rounds = 40;
  std::uint64_t seed = 0x5EEDD00DULL;
  int threads = 0;  // 0: resolve from the environment
};

struct VerifyConfig {
  int samples = 100;
  int n = 64;
  int n_steps = 256;
  bool break_symmetry = false;  // test hook: corrupts the operator stencil
};

struct ExperimentConfig {
  int n = 64;
  double alpha = 0.5;
  double epsilon_cut = 0.3;

  double T = 1.0;
  double tau = 0.25;
  int n_steps = 256;

  double lambda = 0.5;
  double eps0 = 0.05;
  bool worst_case_y0 = false;
  FieldSpec y0;
  FieldSpec y_d;
  CoefficientSpec a;
  DensitySpec beta;

  SolverConfig solver;
  VerifyConfig verify;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;

  /// FNV-1a of the canonical serialization.
  std::uint64_t hash() const;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

Field materialize_field(const FieldSpec& spec, const System& sys);
ActuatorDensity materialize_density(const DensitySpec& spec, const GridPtr& grid,
                                    double lambda);

struct AuditResult {
  std::string name;
  std::string identity;  // the checked property, human readable
  double observed = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct RunRecord {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  nlohmann::json outputs;  // scalar outputs; bitwise reproducible
  std::vector<std::string> files;
  std::vector<AuditResult> audits;
  int exit_code = 0;

  nlohmann::json to_json() const;
  /// Writes record.json plus any queued CSVs into out_dir (created if
  /// missing). Returns the record path.
  std::string write(const std::string& out_dir) const;
};

void write_field_csv(const std::string& path, const SpatialGrid& grid,
                     const std::vector<double>& values);
void write_mask_csv(const std::string& path, const SpatialGrid& grid,
                    const std::vector<std::uint8_t>& omega1_mask);

/// Minimum-norm control for an explicit initial state and density.
RunRecord cmd_solve_control(const ExperimentConfig& cfg,
                            const std::string& out_dir);

/// Full placement pipeline: ball assembly, density ascent, double oracle,
/// level-set extraction.
RunRecord cmd_optimize_actuator(const ExperimentConfig& cfg,
                                const std::string& out_dir);

/// Double-oracle game value only (no density ascent).
RunRecord cmd_game_value(const ExperimentConfig& cfg, const std::string& out_dir);

/// Runs the module invariant audits; exit code 2 on any failure.
RunRecord cmd_verify(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace degctrl

#endif
