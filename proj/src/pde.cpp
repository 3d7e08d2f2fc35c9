#include "degctrl/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace degctrl {

Trajectory::Trajectory(GridPtr g, int steps)
    : grid(std::move(g)),
      n_steps(steps),
      data(static_cast<std::size_t>(steps + 1) * grid->n, 0.0) {}

Field Trajectory::at(int k) const {
  if (k < 0 || k > n_steps) throw std::out_of_range("trajectory: node index");
  Field f(grid);
  std::copy(node(k), node(k) + grid->n, f.values.begin());
  return f;
}

ControlSignal::ControlSignal(GridPtr g, const TimeGrid& t)
    : grid(std::move(g)),
      tg(t),
      data(static_cast<std::size_t>(t.control_steps()) * grid->n, 0.0) {}

double ControlSignal::space_time_norm() const {
  double acc = 0.0;
  const int n = grid->n;
  for (int s = 0; s < n_ctrl(); ++s) {
    const double* u = data.data() + static_cast<std::size_t>(s) * n;
    for (int i = 0; i < n; ++i)
      acc += grid->cell_widths[static_cast<std::size_t>(i)] * u[i] * u[i];
  }
  return std::sqrt(tg.dt * acc);
}

Trajectory solve_forward(const Field& y0, const System& sys) {
  if (!same_grid(*y0.grid, *sys.grid))
    throw std::invalid_argument("solve_forward: grid mismatch");
  const int n = sys.grid->n;
  Trajectory traj(sys.grid, sys.tg.n_steps);
  std::copy(y0.values.begin(), y0.values.end(), traj.node(0));
  for (int k = 0; k < sys.tg.n_steps; ++k) {
    std::memcpy(traj.node(k + 1), traj.node(k),
                static_cast<std::size_t>(n) * sizeof(double));
    sys.stepper.solve_in_place(traj.node(k + 1));
  }
  return traj;
}

Trajectory solve_forward(const Field& y0, const ActuatorDensity& beta,
                         const ControlSignal& u, const System& sys) {
  if (!same_grid(*y0.grid, *sys.grid) || !same_grid(*beta.grid, *sys.grid) ||
      !same_grid(*u.grid, *sys.grid))
    throw std::invalid_argument("solve_forward: grid mismatch");
  if (u.tg.n_steps != sys.tg.n_steps || u.tg.k_tau != sys.tg.k_tau)
    throw std::invalid_argument("solve_forward: time grid mismatch");

  const int n = sys.grid->n;
  const int i0 = sys.grid->omega1_begin;
  std::vector<double> sqrt_beta(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < sys.grid->omega1_count(); ++i)
    sqrt_beta[static_cast<std::size_t>(i0 + i)] =
        std::sqrt(beta.values[static_cast<std::size_t>(i)]);

  Trajectory traj(sys.grid, sys.tg.n_steps);
  std::copy(y0.values.begin(), y0.values.end(), traj.node(0));
  for (int k = 0; k < sys.tg.n_steps; ++k) {
    double* next = traj.node(k + 1);
    std::memcpy(next, traj.node(k), static_cast<std::size_t>(n) * sizeof(double));
    if (k >= sys.tg.k_tau) {
      const double* us = u.step(k);
      for (int i = 0; i < n; ++i)
        next[i] += sys.tg.dt * sqrt_beta[static_cast<std::size_t>(i)] * us[i];
    }
    sys.stepper.solve_in_place(next);
  }
  return traj;
}

Trajectory solve_adjoint(const Field& eta, const System& sys) {
  // time reversal: in s = T - t the backward equation is the homogeneous
  // forward one, so reuse that code path and flip the node order
  Trajectory fwd = solve_forward(eta, sys);
  Trajectory traj(sys.grid, sys.tg.n_steps);
  const int n = sys.grid->n;
  for (int k = 0; k <= sys.tg.n_steps; ++k)
    std::memcpy(traj.node(k), fwd.node(sys.tg.n_steps - k),
                static_cast<std::size_t>(n) * sizeof(double));
  return traj;
}

void free_terminal_raw(const System& sys, const double* y0, double* out) {
  const int n = sys.grid->n;
  std::memcpy(out, y0, static_cast<std::size_t>(n) * sizeof(double));
  for (int k = 0; k < sys.tg.n_steps; ++k) sys.stepper.solve_in_place(out);
}

Field free_terminal(const Field& y0, const System& sys) {
  if (!same_grid(*y0.grid, *sys.grid))
    throw std::invalid_argument("free_terminal: grid mismatch");
  Field out(sys.grid);
  free_terminal_raw(sys, y0.values.data(), out.values.data());
  return out;
}

}  // namespace degctrl
