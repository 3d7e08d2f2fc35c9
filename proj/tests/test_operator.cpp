#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "degctrl/operator.hpp"

using namespace degctrl;

namespace {

Eigen::MatrixXd dense_of(const DiscreteOperator& op) {
  const int n = op.grid->n;
  const auto rows = op.dense_row_major();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i) * n + j];
  return m;
}

double smallest_eigenvalue_of_negation(int n, double alpha) {
  GridPtr g = build_grid(n, alpha, 0.5);
  const DiscreteOperator op = assemble_operator(g, CoefficientSpec::zero());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-dense_of(op));
  return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("self-adjointness under the quadrature inner product") {
  for (double alpha : {0.25, 0.75, 1.0, 1.5}) {
    GridPtr g = build_grid(32, alpha, 0.5);
    const DiscreteOperator op = assemble_operator(g, CoefficientSpec::polynomial({0.3, 1.0}));
    SplitMix64 rng(42);
    for (int s = 0; s < 100; ++s) {
      const Field v = random_field(g, rng), w = random_field(g, rng);
      const double defect = std::abs(inner(op.apply(v), w) - inner(v, op.apply(w)));
      CHECK(defect <= 1e-12 * norm(v) * norm(w));
    }
  }
}

TEST_CASE("dissipativity of the diffusion part") {
  for (double alpha : {0.25, 0.75, 1.0, 1.5}) {
    GridPtr g = build_grid(24, alpha, 0.5);
    const DiscreteOperator op = assemble_operator(g, CoefficientSpec::zero());
    SplitMix64 rng(43);
    for (int s = 0; s < 50; ++s) {
      const Field v = random_field(g, rng);
      CHECK(inner(op.apply(v), v) <= 1e-12);
    }
  }
}

TEST_CASE("alpha = 1: no flux through the x = 0 face") {
  GridPtr g = build_grid(4, 1.0, 0.5);
  const DiscreteOperator op = assemble_operator(g, CoefficientSpec::zero());
  // first row only sees the face at x = h (coefficient h^alpha = h)
  const double h = 0.25;
  CHECK(op.diag[0] == doctest::Approx(-h / (h * h)));
  CHECK(op.off[0] == doctest::Approx(h / (h * h)));
  CHECK(op.left_bc == DiscreteOperator::LeftBc::ZeroFluxAtZero);
}

TEST_CASE("alpha < 1 carries the Dirichlet transmissibility") {
  GridPtr g = build_grid(4, 0.5, 0.5);
  const DiscreteOperator op = assemble_operator(g, CoefficientSpec::zero());
  const double h = 0.25;
  const double t_left = (1.0 - 0.5) * std::pow(0.5 * h, -0.5);
  const double kappa1 = std::pow(h, 0.5);
  CHECK(op.diag[0] == doctest::Approx(-kappa1 / (h * h) - t_left / h));
  CHECK(op.left_bc == DiscreteOperator::LeftBc::DirichletAtZero);
}

TEST_CASE("reaction coefficient enters as a negative diagonal shift") {
  GridPtr g = build_grid(8, 0.5, 0.5);
  const DiscreteOperator base = assemble_operator(g, CoefficientSpec::zero());
  const DiscreteOperator shifted =
      assemble_operator(g, CoefficientSpec::polynomial({2.0, -1.0}));
  for (int i = 0; i < g->n; ++i) {
    const double a = 2.0 - g->cell_centers[static_cast<std::size_t>(i)];
    CHECK(shifted.diag[static_cast<std::size_t>(i)] ==
          doctest::Approx(base.diag[static_cast<std::size_t>(i)] - a));
  }
}

TEST_CASE("coarse spectral accuracy at the degenerate end") {
  // grid-convergence check: the slowest mode survives coarsening
  const double coarse = smallest_eigenvalue_of_negation(8, 0.5);
  const double fine = smallest_eigenvalue_of_negation(256, 0.5);
  CHECK(std::abs(coarse - fine) <= 0.05 * fine);
}

TEST_CASE("implicit stepper solves the shifted system") {
  GridPtr g = build_grid(16, 0.75, 0.5);
  const DiscreteOperator op = assemble_operator(g, CoefficientSpec::polynomial({0.5}));
  const double dt = 0.01;
  const ImplicitStepper stepper(op, dt);
  SplitMix64 rng(44);
  Field rhs = random_field(g, rng);
  Field x = rhs;
  stepper.solve_in_place(x.values.data());
  // (I - dt M) x == rhs
  Field mx = op.apply(x);
  for (int i = 0; i < g->n; ++i)
    CHECK(x[i] - dt * mx[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
}
