// Acceptance suite: one criterion per entry, one pass/fail line each.
// Run with no arguments for the full suite, or with an index (1-11).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "degctrl/config.hpp"
#include "degctrl/game.hpp"
#include "degctrl/oracle.hpp"
#include "degctrl/parallel.hpp"

using namespace degctrl;

namespace {

struct Criterion {
  int index;
  std::string name;
  std::function<bool(std::string&)> run;
};

System make(int n, double alpha, double eps_cut, double T, double tau, int steps,
            CoefficientSpec a = CoefficientSpec::zero()) {
  GridPtr g = build_grid(n, alpha, eps_cut);
  return make_system(g, build_time_grid(T, tau, steps), a);
}

int env_threads() { return resolve_threads(0); }

// --- 1: duality identity on 20 random instances -----------------------------

bool crit_duality(std::string& detail) {
  double worst = 0.0;
  bool all_converged = true;
  std::vector<double> defects(20, 0.0);
  std::vector<int> converged(20, 1);
  parallel_for(20, env_threads(), [&](int t) {
    const double alpha = (t % 2 == 0) ? 0.5 : 1.5;
    System sys = make(64, alpha, 0.3, 1.0, 0.25, 256);
    SplitMix64 rng(derive_seed(0xACC1, static_cast<std::uint64_t>(t)));
    const ActuatorDensity beta = random_density(sys.grid, 0.3 + 0.4 * rng.uniform(), rng);
    const Field y0 = random_unit_field(sys.grid, rng);
    const Field y_d = 0.3 * random_unit_field(sys.grid, rng);
    const DualSolveReport rep = minimize_dual(beta, y0, y_d, 0.05, sys);
    converged[static_cast<std::size_t>(t)] = rep.converged ? 1 : 0;
    defects[static_cast<std::size_t>(t)] =
        std::abs(rep.N * rep.N + 2.0 * rep.V) / std::max(1.0, rep.N * rep.N);
  });
  for (int t = 0; t < 20; ++t) {
    worst = std::max(worst, defects[static_cast<std::size_t>(t)]);
    all_converged = all_converged && converged[static_cast<std::size_t>(t)];
  }
  std::ostringstream os;
  os. precision(3);
  os << "worst scaled defect " << worst << " (bound 1e-8), all converged: "
     << (all_converged ? "yes" : "no");
  detail = os.str();
  return all_converged && worst <= 1e-8;
}

// --- 2: admissibility and optimality against the least-norm oracle ----------

bool crit_admissible_optimal(std::string& detail) {
  double worst_terminal_excess = 0.0;
  double worst_rel = 0.0;
  for (int t = 0; t < 10; ++t) {
    System sys = make(8, (t % 2 == 0) ? 0.5 : 1.25, 0.4, 0.5, 0.125, 32);
    SplitMix64 rng(derive_seed(0xACC2, static_cast<std::uint64_t>(t)));
    const ActuatorDensity beta = random_density(sys.grid, 0.5, rng);
    const Field y0 = random_unit_field(sys.grid, rng);
    const Field y_d = 0.3 * random_unit_field(sys.grid, rng);
    const double eps0 = 0.05;
    if (!assumption_h_holds(y0, y_d, eps0, sys)) continue;

    const DualSolveReport rep = minimize_dual(beta, y0, y_d, eps0, sys);
    if (!rep.converged) {
      detail = "a dual solve failed to converge";
      return false;
    }
    worst_terminal_excess =
        std::max(worst_terminal_excess, rep.terminal_residual / eps0 - 1.0);
    const double n_oracle = oracle_min_norm(beta, y0, y_d, eps0, sys);
    worst_rel = std::max(worst_rel,
                         std::abs(rep.N - n_oracle) / std::max(1e-12, n_oracle));
  }
  std::ostringstream os;
  os.precision(3);
  os << "terminal excess " << worst_terminal_excess
     << " (bound 1e-6), oracle mismatch " << worst_rel << " (bound 1e-4)";
  detail = os.str();
  return worst_terminal_excess <= 1e-6 && worst_rel <= 1e-4;
}

// --- 3: stationarity residual and the alignment identity --------------------

bool crit_stationarity(std::string& detail) {
  double worst_el = 0.0, worst_align = 0.0;
  const double tol = 1e-7;
  for (int t = 0; t < 6; ++t) {
    System sys = make(48, (t % 2 == 0) ? 0.5 : 1.5, 0.3, 1.0, 0.25, 128);
    SplitMix64 rng(derive_seed(0xACC3, static_cast<std::uint64_t>(t)));
    const ActuatorDensity beta = random_density(sys.grid, 0.5, rng);
    const Field y0 = random_unit_field(sys.grid, rng);
    const Field y_d = 0.4 * random_unit_field(sys.grid, rng);
    const double eps0 = 0.05;
    DualSolveOptions opts;
    opts.tol = tol;
    const DualSolveReport rep = minimize_dual(beta, y0, y_d, eps0, sys, opts);
    if (!rep.converged || norm(rep.eta_star) == 0.0) continue;
    worst_el = std::max(
        worst_el, rep.el_residual / (10.0 * tol * std::max(1.0, norm(y_d))));

    const ControlSignal u = extract_control(rep.eta_star, beta, sys);
    const Trajectory y = solve_forward(y0, beta, u, sys);
    const double lhs = inner(y.at(sys.tg.n_steps) - y_d, rep.eta_star);
    const double rhs = -eps0 * norm(rep.eta_star);
    worst_align = std::max(worst_align, std::abs(lhs - rhs) / std::abs(rhs));
  }
  std::ostringstream os;
  os.precision(3);
  os << "stationarity ratio " << worst_el << " (bound 1), alignment error "
     << worst_align << " (bound 1e-6)";
  detail = os.str();
  return worst_el <= 1.0 && worst_align <= 1e-6;
}

// --- 4: discrete terminal-pairing identity -----------------------------------

bool crit_adjoint_identity(std::string& detail) {
  System sys = make(64, 0.5, 0.3, 1.0, 0.25, 256, CoefficientSpec::polynomial({0.3}));
  SplitMix64 rng(0xACC4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Field y0 = random_field(sys.grid, rng);
    const Field eta = random_field(sys.grid, rng);
    const ActuatorDensity beta = random_density(sys.grid, 0.4, rng);
    ControlSignal u(sys.grid, sys.tg);
    for (double& x : u.data) x = rng.normal();

    const Trajectory phi = solve_adjoint(eta, sys);
    std::vector<double> sqrt_beta(static_cast<std::size_t>(sys.grid->n), 0.0);
    for (int i = 0; i < sys.grid->omega1_count(); ++i)
      sqrt_beta[static_cast<std::size_t>(sys.grid->omega1_begin + i)] =
          std::sqrt(beta.values[static_cast<std::size_t>(i)]);
    double pairing = 0.0;
    for (int k = sys.tg.k_tau; k < sys.tg.n_steps; ++k) {
      const double* us = u.step(k);
      const double* ph = phi.node(k);
      double dot = 0.0;
      for (int i = 0; i < sys.grid->n; ++i)
        dot += sys.grid->cell_widths[static_cast<std::size_t>(i)] * us[i] *
               sqrt_beta[static_cast<std::size_t>(i)] * ph[i];
      pairing += sys.tg.dt * dot;
    }
    pairing += inner(y0, phi.at(0));
    const Trajectory y = solve_forward(y0, beta, u, sys);
    const double rhs = inner(y.at(sys.tg.n_steps), eta);
    const double scale = std::abs(rhs) + norm(y0) * norm(eta) + 1.0;
    worst = std::max(worst, std::abs(pairing - rhs) / scale);
  }
  std::ostringstream os;
  os.precision(3);
  os << "worst relative defect " << worst << " (bound 1e-9)";
  detail = os.str();
  return worst <= 1e-9;
}

// --- 5: bathtub equals exhaustive binary maximum ----------------------------

bool crit_bathtub(std::string& detail) {
  SplitMix64 rng(0xACC5);
  double worst_gap = 0.0;
  long cases = 0;
  for (const auto& [m2, k] : std::vector<std::pair<int, int>>{
           {6, 3}, {10, 4}, {12, 6}, {16, 5}}) {
    const int n = 2 * m2;  // subregion = trailing half
    GridPtr g = build_grid(n, 0.5, 0.5);
    const int m = g->omega1_count();
    const double lambda = static_cast<double>(k) / m;
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> phi(static_cast<std::size_t>(m));
      for (double& v : phi) v = rng.normal();
      const BathtubResult bt = bathtub_maximize(g, phi, lambda);
      if (bt.fractional_cells != 0) {
        detail = "fractional cell on integer mass";
        return false;
      }
      auto score = [&](const std::vector<double>& vals) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
          acc += g->cell_widths[static_cast<std::size_t>(g->omega1_begin + i)] *
                 vals[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
        return acc;
      };
      const double bt_score = score(bt.density.values);

      double best_binary = -1e300;
      std::vector<int> comb(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
      for (;;) {
        ++cases;
        std::vector<double> vals(static_cast<std::size_t>(m), 0.0);
        for (int c : comb) vals[static_cast<std::size_t>(c)] = 1.0;
        best_binary = std::max(best_binary, score(vals));
        int i = k - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == m - k + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
          comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      }
      worst_gap = std::max(worst_gap, std::abs(bt_score - best_binary));

      for (int s = 0; s < 1000; ++s) {
        const ActuatorDensity r = random_density(g, lambda, rng);
        if (score(r.values) > bt_score + 1e-12) {
          detail = "random relaxed density beat the bathtub";
          return false;
        }
      }
    }
  }
  std::ostringstream os;
  os.precision(3);
  os << cases << " binary patterns, worst |bathtub - enumeration| = " << worst_gap;
  detail = os.str();
  return worst_gap <= 1e-12;
}

// --- 6: game weak duality and gap closure ------------------------------------

bool crit_game_gap(std::string& detail) {
  std::ostringstream os;
  os.precision(4);
  bool ok = true;
  for (double alpha : {0.5, 1.5}) {
    System sys = make(64, alpha, 0.8125, 1.0, 0.25, 128);
    if (sys.grid->omega1_count() != 12) {
      detail = "subregion sizing broke";
      return false;
    }
    const Field y_d = bump_field(sys.grid, 0.6, 0.2, 0.5, true);
    const double eps0 = 0.05;
    const BallSpec ball = make_ball(1.0 / 3.0, y_d, eps0, 100, 0xACC6, sys);

    DoubleOracleOptions doo;
    doo.max_rounds = 40;
    doo.tol_rel = 0.05;
    doo.inner.threads = env_threads();
    doo.inner.n_starts = 3;
    doo.inner.dual_starts = 1;
    doo.inner.dc_max_iters = 12;
    doo.inner.subproblem_max_iters = 1200;
    const GameResult res = double_oracle(ball, 1.0 / 3.0, y_d, eps0, sys, doo);

    bool weak = true;
    for (const auto& [lower, upper] : res.round_bounds)
      weak = weak && lower <= upper + 1e-9 * std::max(1.0, std::abs(lower));
    const double target =
        std::max(1e-6, 0.05 * std::abs(res.value_lower));
    os << "alpha=" << alpha << ": V-=" << res.value_lower
       << " V+=" << res.value_upper << " gap=" << res.gap << " (target "
       << target << ", " << res.rounds << " rounds) ";
    ok = ok && weak && res.gap <= target;
  }
  detail = os.str();
  return ok;
}

// --- 7: level-set / bang-bang structure --------------------------------------

bool crit_level_set(std::string& detail) {
  System sys = make(48, 0.5, 0.5, 0.5, 0.125, 64);
  SplitMix64 rng(0xACC7);
  const double lambda = 0.35;

  int worst_fractional = 0;
  for (int trial = 0; trial < 25; ++trial) {
    DiracMixture mix;
    const int atoms = 1 + static_cast<int>(rng.next() % 4);
    double left = 1.0;
    for (int a = 0; a < atoms; ++a) {
      const double w = (a + 1 == atoms) ? left : left * rng.uniform();
      left -= (a + 1 == atoms) ? 0.0 : w;
      mix.atoms.push_back({w, 3.0 * random_unit_field(sys.grid, rng)});
    }
    const BathtubResult br = best_response_density(mix, lambda, sys);
    worst_fractional = std::max(worst_fractional, br.fractional_cells);

    // rounding the response to its level set moves the mixed payoff by at
    // most cell width times the field bound
    const Field H = mixture_energy_field(mix, sys);
    std::vector<double> H1(H.values.begin() + sys.grid->omega1_begin, H.values.end());
    const LevelSetResult level = extract_level_set(sys.grid, H1, lambda);
    double h_max = 0.0;
    for (double v : H1) h_max = std::max(h_max, std::abs(v));
    double move = 0.0;
    for (int i = 0; i < sys.grid->omega1_count(); ++i) {
      const double delta = br.density.values[static_cast<std::size_t>(i)] -
                           (level.mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
      move += 0.5 * sys.grid->cell_widths[static_cast<std::size_t>(sys.grid->omega1_begin + i)] *
              delta * H1[static_cast<std::size_t>(i)];
    }
    if (std::abs(move) > sys.grid->cell_widths[0] * std::max(h_max, 1e-300)) {
      detail = "level-set rounding moved the value too far";
      return false;
    }
  }
  std::ostringstream os;
  os << "max fractional cells " << worst_fractional << " (bound 1)";
  detail = os.str();
  return worst_fractional <= 1;
}

// --- 8: observability audit ---------------------------------------------------

bool crit_observability(std::string& detail) {
  System sys = make(48, 0.5, 0.3, 0.6, 0.15, 96);
  std::ostringstream os;
  os.precision(4);
  for (double lambda : {0.3, 0.5, 0.7}) {
    const double c_hat =
        estimate_observability_constant(lambda, 200, 0xACC8, sys);
    const int violations =
        observability_violations(c_hat, lambda, 1000, 0xACC9, sys);
    os << "lambda=" << lambda << ": constant " << c_hat << ", violations "
       << violations << "/1000; ";
    if (violations != 0) {
      detail = os.str();
      return false;
    }
  }
  detail = os.str();
  return true;
}

// --- 9: scaling law -----------------------------------------------------------

bool crit_scaling(std::string& detail) {
  System sys = make(48, 0.5, 0.3, 0.3, 0.075, 96);
  const ActuatorDensity beta = uniform_density(sys.grid, 0.5);
  const Field y0 = bump_field(sys.grid, 0.4, 0.15, 1.0, true);
  const Field y_d = zero_field(sys.grid);
  const double eps0 = 0.002;
  if (!assumption_h_holds(y0, y_d, eps0, sys)) {
    detail = "instance trivially reachable";
    return false;
  }
  const double base = minimize_dual(beta, y0, y_d, eps0, sys).N;
  double worst = 0.0;
  // joint homogeneity: scaling the state scales the admissible error too
  for (double mu : {0.5, 2.0, 10.0}) {
    const double scaled = minimize_dual(beta, mu * y0, y_d, mu * eps0, sys).N;
    worst = std::max(worst, std::abs(scaled - mu * base) / (mu * base));
  }
  std::ostringstream os;
  os.precision(3);
  os << "worst relative defect " << worst << " (bound 1e-6)";
  detail = os.str();
  return worst <= 1e-6;
}

// --- 10: gradient checks -------------------------------------------------------

bool crit_gradients(std::string& detail) {
  System sys = make(24, 0.75, 0.4, 0.5, 0.125, 32);
  SplitMix64 rng(0xACCA);
  const ActuatorDensity beta = random_density(sys.grid, 0.4, rng);
  const Field y0 = random_unit_field(sys.grid, rng);
  const Field y_d = 0.4 * random_unit_field(sys.grid, rng);
  const double eps0 = 0.05;

  double worst_dual = 0.0;
  auto dual_f = [&](const Field& eta) {
    return dual_objective(eta, beta, y0, y_d, eps0, sys);
  };
  for (int t = 0; t < 20; ++t) {
    const Field eta = (0.5 + rng.uniform()) * random_unit_field(sys.grid, rng);
    const Field g = dual_gradient(eta, beta, y0, y_d, eps0, sys);
    const Field fd = fd_gradient(dual_f, eta, 1e-6);
    worst_dual = std::max(worst_dual, norm(g - fd) / std::max(1.0, norm(g)));
  }

  double worst_game = 0.0;
  auto game_f = [&](const Field& eta) {
    return game_payoff(beta, eta, y_d, eps0, sys);
  };
  for (int t = 0; t < 20; ++t) {
    const Field eta = (0.5 + rng.uniform()) * random_unit_field(sys.grid, rng);
    const Field g = game_gradient(beta, eta, y_d, eps0, 1e-9, sys);
    const Field fd = fd_gradient(game_f, eta, 1e-6);
    worst_game = std::max(worst_game, norm(g - fd) / std::max(1.0, norm(g)));
  }
  std::ostringstream os;
  os.precision(3);
  os << "dual " << worst_dual << ", payoff " << worst_game << " (bounds 1e-5)";
  detail = os.str();
  return worst_dual <= 1e-5 && worst_game <= 1e-5;
}

// --- 11: relaxation dominance ---------------------------------------------------

bool crit_relaxation(std::string& detail) {
  System sys = make(20, 0.5, 0.5, 0.4, 0.1, 32);
  if (sys.grid->omega1_count() != 10) {
    detail = "corpus sizing broke";
    return false;
  }
  const Field y_d = bump_field(sys.grid, 0.6, 0.2, 0.4, true);
  const double eps0 = 0.05;
  const double lambda = 0.4;  // 4 of 10 cells
  BallSpec ball = make_ball(lambda, y_d, eps0, 60, 0xACCB, sys);

  InnerOptions io;
  io.n_starts = 3;
  io.dual_starts = 1;
  io.dc_max_iters = 10;
  io.subproblem_max_iters = 800;

  const ActuatorEnumResult enumer =
      oracle_best_actuator(4, ball, y_d, eps0, sys, io, env_threads());

  OuterOptions oo;
  oo.max_iters = 30;
  oo.inner = io;
  const OuterResult outer = outer_maximize(
      ball, lambda, y_d, eps0, uniform_density(sys.grid, lambda), sys, oo);

  std::ostringstream os;
  os.precision(5);
  os << "ascent value " << outer.value << ", binary best " << enumer.best_value
     << " (tolerance 1e-3)";
  detail = os.str();
  return outer.value >= enumer.best_value - 1e-3;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "duality identity", crit_duality},
      {2, "admissibility and least-norm optimality", crit_admissible_optimal},
      {3, "stationarity residual and alignment", crit_stationarity},
      {4, "discrete terminal-pairing identity", crit_adjoint_identity},
      {5, "bathtub optimality", crit_bathtub},
      {6, "game weak duality and gap closure", crit_game_gap},
      {7, "level-set structure of best responses", crit_level_set},
      {8, "observability audit", crit_observability},
      {9, "scaling law", crit_scaling},
      {10, "gradient checks", crit_gradients},
      {11, "relaxation dominance", crit_relaxation},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.index != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", pass ? "PASS" : "FAIL", c.index,
                c.name.c_str(), detail.c_str(), secs);
    if (!pass) ++failures;
  }
  return failures;
}
