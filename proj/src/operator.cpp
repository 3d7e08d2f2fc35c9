#include "degctrl/operator.hpp"

#include <cmath>
#include <stdexcept>

namespace degctrl {

void DiscreteOperator::apply(const double* v, double* out) const {
  const int n = grid->n;
  const std::vector<double>& up = off_upper.empty() ? off : off_upper;
  for (int i = 0; i < n; ++i) {
    double acc = diag[static_cast<std::size_t>(i)] * v[i];
    if (i > 0) acc += off[static_cast<std::size_t>(i - 1)] * v[i - 1];
    if (i < n - 1) acc += up[static_cast<std::size_t>(i)] * v[i + 1];
    out[i] = acc;
  }
}

Field DiscreteOperator::apply(const Field& v) const {
  Field out(v.grid);
  apply(v.values.data(), out.values.data());
  return out;
}

std::vector<double> DiscreteOperator::dense_row_major() const {
  const int n = grid->n;
  const std::vector<double>& up = off_upper.empty() ? off : off_upper;
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    m[static_cast<std::size_t>(i) * n + i] = diag[static_cast<std::size_t>(i)];
    if (i < n - 1) {
      m[static_cast<std::size_t>(i) * n + i + 1] = up[static_cast<std::size_t>(i)];
      m[static_cast<std::size_t>(i + 1) * n + i] = off[static_cast<std::size_t>(i)];
    }
  }
  return m;
}

DiscreteOperator assemble_operator(const GridPtr& grid,
                                   const CoefficientSpec& a) {
  const int n = grid->n;
  const double h = grid->cell_widths[0];
  const double alpha = grid->alpha;

  DiscreteOperator op;
  op.grid = grid;
  op.left_bc = alpha < 1.0 ? DiscreteOperator::LeftBc::DirichletAtZero
                           : DiscreteOperator::LeftBc::ZeroFluxAtZero;
  op.diag.assign(static_cast<std::size_t>(n), 0.0);
  op.off.assign(static_cast<std::size_t>(n - 1), 0.0);

  // interior faces at x = i*h, i = 1..n-1
  for (int i = 1; i < n; ++i) {
    const double kappa = std::pow(i * h, alpha);
    const double t = kappa / (h * h);
    op.diag[static_cast<std::size_t>(i - 1)] -= t;
    op.diag[static_cast<std::size_t>(i)] -= t;
    op.off[static_cast<std::size_t>(i - 1)] += t;
  }

  // x = 0 face: zero flux for alpha >= 1; for alpha < 1 the Dirichlet value
  // at x=0 couples through the exact half-cell transmissibility.
  if (alpha < 1.0) {
    const double t_left = (1.0 - alpha) * std::pow(0.5 * h, alpha - 1.0);
    op.diag[0] -= t_left / h;
  }

  // x = 1 face: v(1) = 0 over the right half cell, face coefficient 1^alpha.
  op.diag[static_cast<std::size_t>(n - 1)] -= 2.0 / (h * h);

  const std::vector<double> coeff = a.evaluate(*grid);
  for (int i = 0; i < n; ++i)
    op.diag[static_cast<std::size_t>(i)] -= coeff[static_cast<std::size_t>(i)];

  return op;
}

ImplicitStepper::ImplicitStepper(const DiscreteOperator& op, double dt)
    : n_(op.grid->n), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("stepper: dt must be positive");
  std::vector<double> main(static_cast<std::size_t>(n_));
  lower_.assign(static_cast<std::size_t>(n_ - 1), 0.0);
  upper_mod_.assign(static_cast<std::size_t>(n_ - 1), 0.0);
  inv_denom_.assign(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i)
    main[static_cast<std::size_t>(i)] = 1.0 - dt * op.diag[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < n_; ++i)
    lower_[static_cast<std::size_t>(i)] = -dt * op.off[static_cast<std::size_t>(i)];

  double denom = main[0];
  inv_denom_[0] = 1.0 / denom;
  for (int i = 0; i + 1 < n_; ++i) {
    upper_mod_[static_cast<std::size_t>(i)] =
        lower_[static_cast<std::size_t>(i)] * inv_denom_[static_cast<std::size_t>(i)];
    denom = main[static_cast<std::size_t>(i + 1)] -
            lower_[static_cast<std::size_t>(i)] * upper_mod_[static_cast<std::size_t>(i)];
    if (denom == 0.0 || !std::isfinite(denom))
      throw std::runtime_error("stepper: singular implicit system");
    inv_denom_[static_cast<std::size_t>(i + 1)] = 1.0 / denom;
  }
}

void ImplicitStepper::solve_in_place(double* rhs) const {
  rhs[0] *= inv_denom_[0];
  for (int i = 1; i < n_; ++i)
    rhs[i] = (rhs[i] - lower_[static_cast<std::size_t>(i - 1)] * rhs[i - 1]) *
             inv_denom_[static_cast<std::size_t>(i)];
  for (int i = n_ - 2; i >= 0; --i)
    rhs[i] -= upper_mod_[static_cast<std::size_t>(i)] * rhs[i + 1];
}

System make_system(const GridPtr& grid, const TimeGrid& tg,
                   const CoefficientSpec& a) {
  DiscreteOperator op = assemble_operator(grid, a);
  ImplicitStepper stepper(op, tg.dt);
  return System{grid, tg, std::move(op), std::move(stepper)};
}

}  // namespace degctrl
