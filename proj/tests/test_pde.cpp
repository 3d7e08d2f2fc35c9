#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "degctrl/pde.hpp"

using namespace degctrl;

namespace {

System make(int n, double alpha, double eps_cut, double T, double tau, int steps,
            CoefficientSpec a = CoefficientSpec::zero()) {
  GridPtr g = build_grid(n, alpha, eps_cut);
  return make_system(g, build_time_grid(T, tau, steps), a);
}

}  // namespace

TEST_CASE("free evolution is a contraction and zero is a fixed point") {
  System sys = make(48, 0.5, 0.5, 0.4, 0.1, 128);
  SplitMix64 rng(1);
  const Field y0 = random_field(sys.grid, rng);
  const Trajectory traj = solve_forward(y0, sys);
  double prev = norm(traj.at(0));
  for (int k = 1; k <= sys.tg.n_steps; ++k) {
    const double cur = norm(traj.at(k));
    CHECK(cur <= prev * (1.0 + 1e-13));
    prev = cur;
  }

  const Trajectory zero = solve_forward(zero_field(sys.grid), sys);
  for (int k = 0; k <= sys.tg.n_steps; ++k) CHECK(norm(zero.at(k)) == 0.0);
}

TEST_CASE("slowest mode decays like its eigenvalue") {
  const int n = 128;
  System sys = make(n, 0.5, 0.5, 0.3, 0.1, 1024);
  Eigen::MatrixXd dense(n, n);
  const auto rows = sys.op.dense_row_major();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dense(i, j) = -rows[static_cast<std::size_t>(i) * n + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const double lambda1 = es.eigenvalues()(0);
  Eigen::VectorXd v = es.eigenvectors().col(0);
  Field y0(sys.grid, std::vector<double>(v.data(), v.data() + n));

  const Trajectory traj = solve_forward(y0, sys);
  const double ratio = norm(traj.at(sys.tg.n_steps)) / norm(y0);
  const double expected = std::exp(-lambda1 * sys.tg.T);
  CHECK(std::abs(ratio - expected) <= 0.02 * expected);
}

TEST_CASE("adjoint solve: zero datum, contraction, forward coincidence") {
  System sys = make(32, 1.5, 0.6, 0.5, 0.125, 64,
                    CoefficientSpec::polynomial({0.4, 0.2}));
  const Trajectory zero = solve_adjoint(zero_field(sys.grid), sys);
  for (int k = 0; k <= sys.tg.n_steps; ++k) CHECK(norm(zero.at(k)) == 0.0);

  SplitMix64 rng(2);
  const Field eta = random_field(sys.grid, rng);
  const Trajectory adj = solve_adjoint(eta, sys);
  CHECK(norm(adj.at(0)) <= norm(eta));

  // bitwise: same code path, reversed
  const Trajectory fwd = solve_forward(eta, sys);
  for (int k = 0; k <= sys.tg.n_steps; ++k)
    for (int i = 0; i < sys.grid->n; ++i)
      CHECK(adj.node(k)[i] == fwd.node(sys.tg.n_steps - k)[i]);
}

TEST_CASE("discrete duality pairing holds to solver precision") {
  System sys = make(64, 0.5, 0.5, 1.0, 0.25, 256,
                    CoefficientSpec::polynomial({0.3}));
  SplitMix64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
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
    CHECK(std::abs(pairing - rhs) <= 1e-10 * scale);
  }
}

TEST_CASE("terminal norm is stable under grid refinement") {
  auto terminal_norm = [](int n) {
    System sys = make(n, 0.5, 0.5, 0.2, 0.05, 512);
    const Field y0 = bump_field(sys.grid, 0.5, 0.2, 1.0, true);
    return norm(free_terminal(y0, sys));
  };
  const double coarse = terminal_norm(64);
  const double fine = terminal_norm(256);
  CHECK(std::abs(coarse - fine) <= 0.02 * fine);
}

TEST_CASE("control signal norm matches a hand sum") {
  System sys = make(8, 1.0, 0.5, 1.0, 0.5, 4);
  ControlSignal u(sys.grid, sys.tg);
  CHECK(u.n_ctrl() == 2);
  for (double& x : u.data) x = 2.0;
  // dt * steps * sum w * 4 = 0.25 * 2 * 4 = 2
  CHECK(u.space_time_norm() == doctest::Approx(std::sqrt(2.0)));
}
