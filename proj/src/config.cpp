#include "degctrl/config.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "degctrl/parallel.hpp"

namespace degctrl {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

FieldSpec field_spec_from_json(const json& j) {
  FieldSpec s;
  if (j.is_string()) {
    s.kind = j.get<std::string>();
    return s;
  }
  read_if(j, "kind", s.kind);
  read_if(j, "center", s.center);
  read_if(j, "width", s.width);
  read_if(j, "scale", s.scale);
  read_if(j, "normalize", s.normalize);
  read_if(j, "index", s.index);
  read_if(j, "values", s.values);
  return s;
}

json field_spec_to_json(const FieldSpec& s) {
  json j;
  j["kind"] = s.kind;
  j["center"] = s.center;
  j["width"] = s.width;
  j["scale"] = s.scale;
  j["normalize"] = s.normalize;
  j["index"] = s.index;
  if (!s.values.empty()) j["values"] = s.values;
  return j;
}

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      read_if(g, "n", c.n);
      read_if(g, "alpha", c.alpha);
      read_if(g, "epsilon_cut", c.epsilon_cut);
    }
    if (j.contains("time")) {
      const auto& t = j.at("time");
      read_if(t, "T", c.T);
      read_if(t, "tau", c.tau);
      read_if(t, "n_steps", c.n_steps);
    }
    if (j.contains("problem")) {
      const auto& p = j.at("problem");
      read_if(p, "lambda", c.lambda);
      read_if(p, "eps0", c.eps0);
      if (p.contains("y0")) {
        if (p.at("y0").is_string() && p.at("y0").get<std::string>() == "worst-case")
          c.worst_case_y0 = true;
        else
          c.y0 = field_spec_from_json(p.at("y0"));
      }
      if (p.contains("y_d")) c.y_d = field_spec_from_json(p.at("y_d"));
      if (p.contains("a")) {
        const auto& a = p.at("a");
        if (a.contains("poly")) c.a = CoefficientSpec::polynomial(a.at("poly").get<std::vector<double>>());
        if (a.contains("samples")) c.a = CoefficientSpec::sampled(a.at("samples").get<std::vector<double>>());
      }
      if (p.contains("beta")) {
        const auto& b = p.at("beta");
        read_if(b, "kind", c.beta.kind);
        read_if(b, "cells", c.beta.cells);
        read_if(b, "values", c.beta.values);
      }
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      read_if(s, "tol", c.solver.tol);
      read_if(s, "max_iters", c.solver.max_iters);
      read_if(s, "n_starts", c.solver.n_starts);
      read_if(s, "dual_starts", c.solver.dual_starts);
      read_if(s, "dc_max_iters", c.solver.dc_max_iters);
      read_if(s, "subproblem_max_iters", c.solver.subproblem_max_iters);
      read_if(s, "obs_samples", c.solver.obs_samples);
      read_if(s, "outer_iters", c.solver.outer_iters);
      read_if(s, "do_tol_rel", c.solver.do_tol_rel);
      read_if(s, "do_tol_abs", c.solver.do_tol_abs);
      read_if(s, "do_max_rounds", c.solver.do_max_rounds);
      read_if(s, "seed", c.solver.seed);
      read_if(s, "threads", c.solver.threads);
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      read_if(v, "samples", c.verify.samples);
      read_if(v, "n", c.verify.n);
      read_if(v, "n_steps", c.verify.n_steps);
      read_if(v, "break_symmetry", c.verify.break_symmetry);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed document: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["grid"] = {{"n", n}, {"alpha", alpha}, {"epsilon_cut", epsilon_cut}};
  j["time"] = {{"T", T}, {"tau", tau}, {"n_steps", n_steps}};
  json p;
  p["lambda"] = lambda;
  p["eps0"] = eps0;
  if (worst_case_y0)
    p["y0"] = "worst-case";
  else
    p["y0"] = field_spec_to_json(y0);
  p["y_d"] = field_spec_to_json(y_d);
  if (!a.poly.empty()) p["a"] = {{"poly", a.poly}};
  if (!a.samples.empty()) p["a"] = {{"samples", a.samples}};
  json b;
  b["kind"] = beta.kind;
  if (!beta.cells.empty()) b["cells"] = beta.cells;
  if (!beta.values.empty()) b["values"] = beta.values;
  p["beta"] = b;
  j["problem"] = p;
  j["solver"] = {{"tol", solver.tol},
                 {"max_iters", solver.max_iters},
                 {"n_starts", solver.n_starts},
                 {"dual_starts", solver.dual_starts},
                 {"dc_max_iters", solver.dc_max_iters},
                 {"subproblem_max_iters", solver.subproblem_max_iters},
                 {"obs_samples", solver.obs_samples},
                 {"outer_iters", solver.outer_iters},
                 {"do_tol_rel", solver.do_tol_rel},
                 {"do_tol_abs", solver.do_tol_abs},
                 {"do_max_rounds", solver.do_max_rounds},
                 {"seed", solver.seed},
                 {"threads", solver.threads}};
  j["verify"] = {{"samples", verify.samples},
                 {"n", verify.n},
                 {"n_steps", verify.n_steps},
                 {"break_symmetry", verify.break_symmetry}};
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string dump = to_json().dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw ConfigError("config: alpha must lie strictly in (0,2) (degenerate diffusion exponent)");
  if (!(epsilon_cut > 0.0 && epsilon_cut < 1.0))
    throw ConfigError("config: epsilon_cut must lie in (0,1) (actuator subregion endpoint)");
  if (n < 4) throw ConfigError("config: grid.n must be at least 4");
  if (!(T > 0.0)) throw ConfigError("config: time horizon T must be positive");
  if (!(tau > 0.0 && tau < T))
    throw ConfigError("config: control start tau must satisfy 0 < tau < T");
  if (n_steps < 2) throw ConfigError("config: n_steps must be at least 2");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ConfigError("config: lambda must lie in (0,1) (actuator volume fraction)");
  if (!(eps0 > 0.0)) throw ConfigError("config: eps0 must be positive (admissible error)");
  if (!(solver.tol > 0.0)) throw ConfigError("config: solver.tol must be positive");
}

Field materialize_field(const FieldSpec& spec, const System& sys) {
  const GridPtr& g = sys.grid;
  if (spec.kind == "zero") return zero_field(g);
  if (spec.kind == "bump")
    return bump_field(g, spec.center, spec.width, spec.scale, spec.normalize);
  if (spec.kind == "samples") {
    if (static_cast<int>(spec.values.size()) != g->n)
      throw ConfigError("config: sampled field length != cell count");
    return Field(g, spec.values);
  }
  if (spec.kind == "checkerboard") {
    Field f(g);
    for (int i = 0; i < g->n; ++i) f[i] = (i % 2 == 0 ? 1.0 : -1.0) * spec.scale;
    return f;
  }
  if (spec.kind == "eigenmode") {
    const int n = g->n;
    if (spec.index < 0 || spec.index >= n)
      throw ConfigError("config: eigenmode index out of range");
    Eigen::MatrixXd dense(n, n);
    const std::vector<double> rows = sys.op.dense_row_major();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dense(i, j) = -rows[static_cast<std::size_t>(i) * n + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    Eigen::VectorXd v = es.eigenvectors().col(spec.index);
    Field f(g, std::vector<double>(v.data(), v.data() + n));
    const double nf = norm(f);
    if (nf > 0.0 && spec.normalize)
      for (double& x : f.values) x /= nf;
    for (double& x : f.values) x *= spec.scale;
    return f;
  }
  throw ConfigError("config: unknown field kind '" + spec.kind + "'");
}

ActuatorDensity materialize_density(const DensitySpec& spec, const GridPtr& grid,
                                    double lambda) {
  if (spec.kind == "uniform") return uniform_density(grid, lambda);
  if (spec.kind == "mask") return mask_density(grid, spec.cells);
  if (spec.kind == "values") return density_from_values(grid, lambda, spec.values);
  throw ConfigError("config: unknown density kind '" + spec.kind + "'");
}

json RunRecord::to_json() const {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["outputs"] = outputs;
  j["files"] = files;
  j["exit_code"] = exit_code;
  if (!audits.empty()) {
    json arr = json::array();
    for (const auto& a : audits)
      arr.push_back({{"name", a.name},
                     {"identity", a.identity},
                     {"observed", a.observed},
                     {"bound", a.bound},
                     {"pass", a.pass}});
    j["audits"] = arr;
  }
  return j;
}

std::string RunRecord::write(const std::string& out_dir) const {
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/record.json";
  std::ofstream out(path);
  out << to_json().dump(2) << "\n";
  return path;
}

void write_field_csv(const std::string& path, const SpatialGrid& grid,
                     const std::vector<double>& values) {
  std::ofstream out(path);
  out << "x,width,value\n";
  out << std::setprecision(17);
  for (int i = 0; i < grid.n; ++i)
    out << grid.cell_centers[static_cast<std::size_t>(i)] << ','
        << grid.cell_widths[static_cast<std::size_t>(i)] << ','
        << values[static_cast<std::size_t>(i)] << '\n';
}

void write_mask_csv(const std::string& path, const SpatialGrid& grid,
                    const std::vector<std::uint8_t>& omega1_mask) {
  std::vector<double> full(static_cast<std::size_t>(grid.n), 0.0);
  for (int i = 0; i < grid.omega1_count(); ++i)
    full[static_cast<std::size_t>(grid.omega1_begin + i)] =
        omega1_mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  write_field_csv(path, grid, full);
}

namespace {

struct Instance {
  GridPtr grid;
  System sys;
};

Instance build_instance(const ExperimentConfig& cfg) {
  GridPtr grid = build_grid(cfg.n, cfg.alpha, cfg.epsilon_cut);
  TimeGrid tg = build_time_grid(cfg.T, cfg.tau, cfg.n_steps);
  System sys = make_system(grid, tg, cfg.a);
  return {grid, std::move(sys)};
}

InnerOptions inner_options(const SolverConfig& s) {
  InnerOptions io;
  io.n_starts = s.n_starts;
  io.dual_starts = s.dual_starts;
  io.dc_max_iters = s.dc_max_iters;
  io.subproblem_max_iters = s.subproblem_max_iters;
  io.seed = s.seed;
  io.threads = s.threads;
  return io;
}

}  // namespace

RunRecord cmd_solve_control(const ExperimentConfig& cfg, const std::string& out_dir) {
  RunRecord rec;
  rec.command = "solve-control";
  rec.started_at = now_iso();
  rec.seed = cfg.solver.seed;
  {
    std::ostringstream os;
    os << std::hex << cfg.hash();
    rec.config_hash = os.str();
  }
  if (cfg.worst_case_y0)
    throw ConfigError("config: solve-control needs an explicit y0, not worst-case");

  Instance inst = build_instance(cfg);
  const Field y0 = materialize_field(cfg.y0, inst.sys);
  const Field y_d = materialize_field(cfg.y_d, inst.sys);
  const ActuatorDensity beta = materialize_density(cfg.beta, inst.grid, cfg.lambda);

  DualSolveOptions opts;
  opts.tol = cfg.solver.tol;
  opts.max_iters = cfg.solver.max_iters;
  opts.seed = cfg.solver.seed;
  const DualSolveReport rep = minimize_dual(beta, y0, y_d, cfg.eps0, inst.sys, opts);

  rec.outputs["H_holds"] = assumption_h_holds(y0, y_d, cfg.eps0, inst.sys);
  rec.outputs["N"] = rep.N;
  rec.outputs["V"] = rep.V;
  rec.outputs["duality_defect"] = std::abs(rep.N * rep.N + 2.0 * rep.V);
  rec.outputs["el_residual"] = rep.el_residual;
  rec.outputs["terminal_residual"] = rep.terminal_residual;
  rec.outputs["eta_norm"] = norm(rep.eta_star);
  rec.outputs["iterations"] = rep.iterations;
  rec.outputs["converged"] = rep.converged;
  rec.outputs["null_optimal"] = rep.null_optimal;
  const ControlSignal u = extract_control(rep.eta_star, beta, inst.sys);
  rec.outputs["control_norm"] = u.space_time_norm();

  std::filesystem::create_directories(out_dir);
  write_field_csv(out_dir + "/eta_star.csv", *inst.grid, rep.eta_star.values);
  rec.files.push_back("eta_star.csv");
  write_field_csv(out_dir + "/beta.csv", *inst.grid, beta.as_field().values);
  rec.files.push_back("beta.csv");
  {
    Trajectory traj = solve_forward(y0, beta, u, inst.sys);
    write_field_csv(out_dir + "/y_terminal.csv", *inst.grid,
                    traj.at(inst.sys.tg.n_steps).values);
    rec.files.push_back("y_terminal.csv");
  }

  rec.exit_code = rep.converged ? 0 : 3;
  rec.finished_at = now_iso();
  rec.write(out_dir);
  return rec;
}

namespace {

RunRecord run_game(const ExperimentConfig& cfg, const std::string& out_dir,
                   bool with_outer, const char* name) {
  RunRecord rec;
  rec.command = name;
  rec.started_at = now_iso();
  rec.seed = cfg.solver.seed;
  {
    std::ostringstream os;
    os << std::hex << cfg.hash();
    rec.config_hash = os.str();
  }
  if (!cfg.worst_case_y0)
    throw ConfigError("config: actuator optimization runs in worst-case mode; set y0 to \"worst-case\"");

  Instance inst = build_instance(cfg);
  const Field y_d = materialize_field(cfg.y_d, inst.sys);

  const BallSpec ball = make_ball(cfg.lambda, y_d, cfg.eps0,
                                  cfg.solver.obs_samples, cfg.solver.seed, inst.sys);
  rec.outputs["obs_constant"] = ball.obs_constant;
  rec.outputs["ball_radius"] = ball.radius;
  rec.outputs["yhat0_norm"] = norm(ball.yhat0);

  if (with_outer) {
    OuterOptions oo;
    oo.max_iters = cfg.solver.outer_iters;
    oo.inner = inner_options(cfg.solver);
    const OuterResult outer =
        outer_maximize(ball, cfg.lambda, y_d, cfg.eps0,
                       uniform_density(inst.grid, cfg.lambda), inst.sys, oo);
    rec.outputs["outer_value"] = outer.value;
    std::filesystem::create_directories(out_dir);
    write_field_csv(out_dir + "/beta_ascent.csv", *inst.grid,
                    outer.density.as_field().values);
    rec.files.push_back("beta_ascent.csv");
  }

  DoubleOracleOptions doo;
  doo.tol_rel = cfg.solver.do_tol_rel;
  doo.tol_abs = cfg.solver.do_tol_abs;
  doo.max_rounds = cfg.solver.do_max_rounds;
  doo.inner = inner_options(cfg.solver);
  const GameResult game = double_oracle(ball, cfg.lambda, y_d, cfg.eps0, inst.sys, doo);

  rec.outputs["V_minus"] = game.value_lower;
  rec.outputs["V_plus"] = game.value_upper;
  rec.outputs["gap"] = game.gap;
  rec.outputs["rounds"] = game.rounds;
  rec.outputs["level_threshold"] = game.level_threshold;
  rec.outputs["fractional_cells"] = game.fractional_cells;
  rec.outputs["level_rounding_mismatch"] = game.level_rounding_mismatch;
  const bool gap_ok =
      game.gap <= std::max(cfg.solver.do_tol_abs,
                           cfg.solver.do_tol_rel * std::abs(game.value_lower));
  rec.outputs["gap_within_target"] = gap_ok;  // best-effort contract: warn, exit 0
  {
    json cells = json::array();
    for (int i = 0; i < static_cast<int>(game.omega_mask.size()); ++i)
      if (game.omega_mask[static_cast<std::size_t>(i)]) cells.push_back(i);
    rec.outputs["omega_cells"] = cells;
  }

  std::filesystem::create_directories(out_dir);
  write_field_csv(out_dir + "/beta_star.csv", *inst.grid,
                  game.density.as_field().values);
  rec.files.push_back("beta_star.csv");
  write_mask_csv(out_dir + "/omega_mask.csv", *inst.grid, game.omega_mask);
  rec.files.push_back("omega_mask.csv");
  write_field_csv(out_dir + "/mixture_energy.csv", *inst.grid,
                  mixture_energy_field(game.mixture, inst.sys).values);
  rec.files.push_back("mixture_energy.csv");

  rec.exit_code = 0;
  rec.finished_at = now_iso();
  rec.write(out_dir);
  return rec;
}

}  // namespace

RunRecord cmd_optimize_actuator(const ExperimentConfig& cfg, const std::string& out_dir) {
  return run_game(cfg, out_dir, true, "optimize-actuator");
}

RunRecord cmd_game_value(const ExperimentConfig& cfg, const std::string& out_dir) {
  return run_game(cfg, out_dir, false, "game-value");
}

// ---------------------------------------------------------------------------
// verify: the invariant audit table
// ---------------------------------------------------------------------------

RunRecord cmd_verify(const ExperimentConfig& cfg, const std::string& out_dir) {
  RunRecord rec;
  rec.command = "verify";
  rec.started_at = now_iso();
  rec.seed = cfg.solver.seed;
  {
    std::ostringstream os;
    os << std::hex << cfg.hash();
    rec.config_hash = os.str();
  }

  auto push = [&rec](const std::string& name, const std::string& identity,
                     double observed, double bound) {
    AuditResult a;
    a.name = name;
    a.identity = identity;
    a.observed = observed;
    a.bound = bound;
    a.pass = observed <= bound;
    rec.audits.push_back(a);
  };

  const std::uint64_t seed = cfg.solver.seed;

  // operator audits over a spread of exponents
  {
    double worst_sym = 0.0, worst_dis = 0.0;
    const double alphas[] = {0.25, 0.75, 1.0, 1.5};
    for (double alpha : alphas) {
      GridPtr g = build_grid(cfg.verify.n, alpha, cfg.epsilon_cut);
      DiscreteOperator op = assemble_operator(g, CoefficientSpec::zero());
      if (cfg.verify.break_symmetry) {
        op.off_upper = op.off;
        op.off_upper[0] *= 1.0 + 1e-3;
      }
      SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(alpha * 100)));
      for (int s = 0; s < cfg.verify.samples; ++s) {
        const Field v = random_field(g, rng), w = random_field(g, rng);
        const double lhs = inner(op.apply(v), w), rhs = inner(v, op.apply(w));
        worst_sym = std::max(worst_sym,
                             std::abs(lhs - rhs) / std::max(1e-300, norm(v) * norm(w)));
        worst_dis = std::max(worst_dis, inner(op.apply(v), v));
      }
    }
    push("operator_self_adjoint",
         "discrete operator symmetric under the quadrature inner product",
         worst_sym, 1e-12);
    push("operator_dissipative",
         "diffusion part negative semidefinite (zero reaction)", worst_dis, 1e-12);
  }

  GridPtr grid = build_grid(cfg.verify.n, cfg.alpha, cfg.epsilon_cut);
  TimeGrid tg = build_time_grid(cfg.T, cfg.tau, cfg.verify.n_steps);
  System sys = make_system(grid, tg, cfg.a);

  // adjoint/forward coincidence (bitwise, shared code path)
  {
    SplitMix64 rng(derive_seed(seed, 11));
    const Field eta = random_field(grid, rng);
    const Trajectory fwd = solve_forward(eta, sys);
    const Trajectory adj = solve_adjoint(eta, sys);
    double diff = 0.0;
    for (int i = 0; i < grid->n; ++i)
      diff = std::max(diff, std::abs(adj.node(0)[i] - fwd.node(tg.n_steps)[i]));
    push("adjoint_forward_coincide",
         "backward solve is the bitwise time reversal of the forward solve",
         diff, 0.0);
  }

  // discrete duality pairing
  {
    double worst = 0.0;
    SplitMix64 rng(derive_seed(seed, 12));
    for (int s = 0; s < 20; ++s) {
      const Field y0 = random_field(grid, rng);
      const Field eta = random_field(grid, rng);
      const ActuatorDensity beta = random_density(grid, cfg.lambda, rng);
      ControlSignal u(grid, tg);
      for (double& x : u.data) x = rng.normal();
      const Trajectory phi = solve_adjoint(eta, sys);
      double pairing = 0.0;
      std::vector<double> sqrt_beta(static_cast<std::size_t>(grid->n), 0.0);
      for (int i = 0; i < grid->omega1_count(); ++i)
        sqrt_beta[static_cast<std::size_t>(grid->omega1_begin + i)] =
            std::sqrt(beta.values[static_cast<std::size_t>(i)]);
      for (int k = tg.k_tau; k < tg.n_steps; ++k) {
        const double* us = u.step(k);
        const double* ph = phi.node(k);
        double dot = 0.0;
        for (int i = 0; i < grid->n; ++i)
          dot += grid->cell_widths[static_cast<std::size_t>(i)] * us[i] *
                 sqrt_beta[static_cast<std::size_t>(i)] * ph[i];
        pairing += tg.dt * dot;
      }
      pairing += inner(y0, phi.at(0));
      const Trajectory y = solve_forward(y0, beta, u, sys);
      const double rhs = inner(y.at(tg.n_steps), eta);
      const double scale = std::max({1.0, std::abs(rhs), norm(y0) * norm(eta)});
      worst = std::max(worst, std::abs(pairing - rhs) / scale);
    }
    push("discrete_duality",
         "window control pairing + initial pairing equals the terminal pairing",
         worst, 1e-9);
  }

  // gramian symmetry and energy match
  {
    const ActuatorDensity beta = uniform_density(grid, cfg.lambda);
    Gramian gram(sys, beta);
    SplitMix64 rng(derive_seed(seed, 13));
    double worst_sym = 0.0, worst_energy = 0.0;
    for (int s = 0; s < 10; ++s) {
      const Field a = random_field(grid, rng), b = random_field(grid, rng);
      const Field ga = gram.apply(a), gb = gram.apply(b);
      worst_sym = std::max(worst_sym, std::abs(inner(ga, b) - inner(a, gb)) /
                                          std::max(1.0, norm(a) * norm(b)));
      const double q = gram.quadratic_form(a.values.data());
      worst_energy = std::max(worst_energy,
                              std::abs(inner(ga, a) - q) / std::max(1.0, q));
    }
    push("gramian_symmetric", "control Gramian symmetric positive semidefinite",
         worst_sym, 1e-10);
    push("gramian_energy_match",
         "Gramian quadratic form equals the weighted window energy",
         worst_energy, 1e-10);
  }

  // dual solve identities on one instance
  {
    const ActuatorDensity beta = uniform_density(grid, cfg.lambda);
    const Field y0 = bump_field(grid, 0.4, 0.15, 1.0, true);
    const Field y_d = bump_field(grid, 0.6, 0.2, 0.5, true);
    DualSolveOptions opts;
    opts.tol = cfg.solver.tol;
    const DualSolveReport rep = minimize_dual(beta, y0, y_d, cfg.eps0, sys, opts);
    push("duality_identity", "squared control norm equals minus twice the value",
         std::abs(rep.N * rep.N + 2.0 * rep.V) / std::max(1.0, rep.N * rep.N),
         1e-8);
    push("control_admissible", "terminal residual within the admissible error",
         rep.terminal_residual, cfg.eps0 * (1.0 + 1e-6));
    push("stationarity_residual", "first-order optimality at the minimizer",
         rep.el_residual, 10.0 * cfg.solver.tol * std::max(1.0, norm(y_d)));
  }

  // density machinery
  {
    SplitMix64 rng(derive_seed(seed, 14));
    std::vector<double> raw(static_cast<std::size_t>(grid->omega1_count()));
    for (double& v : raw) v = rng.normal();
    const ActuatorDensity p1 = project_density(grid, cfg.lambda, raw);
    const ActuatorDensity p2 = project_density(grid, cfg.lambda, p1.values);
    double drift = 0.0;
    for (std::size_t i = 0; i < p1.values.size(); ++i)
      drift = std::max(drift, std::abs(p1.values[i] - p2.values[i]));
    push("projection_idempotent", "density projection fixes its image", drift, 1e-10);
    push("projection_feasible", "projected density satisfies box and mass",
         std::abs(p1.mass() - p1.target_mass()), 1e-10);

    Field e(grid);
    for (int i = 0; i < grid->n; ++i) e[i] = rng.normal();
    std::vector<double> phi(e.values.begin() + grid->omega1_begin, e.values.end());
    const BathtubResult bt = bathtub_maximize(grid, phi, cfg.lambda);
    double best_random = -1e300;
    for (int s = 0; s < 200; ++s) {
      const ActuatorDensity r = random_density(grid, cfg.lambda, rng);
      double val = 0.0;
      for (int i = 0; i < grid->omega1_count(); ++i)
        val += grid->cell_widths[static_cast<std::size_t>(grid->omega1_begin + i)] *
               r.values[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
      best_random = std::max(best_random, val);
    }
    double bt_val = 0.0;
    for (int i = 0; i < grid->omega1_count(); ++i)
      bt_val += grid->cell_widths[static_cast<std::size_t>(grid->omega1_begin + i)] *
                bt.density.values[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
    push("bathtub_dominates", "bathtub density beats random feasible densities",
         best_random - bt_val, 1e-12);
  }

  // observability audit
  {
    const double c_hat =
        estimate_observability_constant(cfg.lambda, 50, derive_seed(seed, 15), sys);
    const int violations =
        observability_violations(c_hat, cfg.lambda, 200, derive_seed(seed, 16), sys);
    push("observability_bound",
         "initial adjoint energy bounded by the weighted window energy",
         static_cast<double>(violations), 0.0);
  }

  bool all_pass = true;
  for (const auto& a : rec.audits) all_pass = all_pass && a.pass;
  rec.exit_code = all_pass ? 0 : 2;
  rec.outputs["all_pass"] = all_pass;
  rec.outputs["audit_count"] = rec.audits.size();
  rec.finished_at = now_iso();
  rec.write(out_dir);
  return rec;
}

}  // namespace degctrl
