#ifndef DEGCTRL_PDE_HPP
#define DEGCTRL_PDE_HPP

#include <vector>

#include "degctrl/density.hpp"
#include "degctrl/field.hpp"
#include "degctrl/operator.hpp"

namespace degctrl {

/// State history: one field per time node, stored contiguously.
struct Trajectory {
  GridPtr grid;
  int n_steps = 0;
  std::vector<double> data;  // (n_steps+1) x n, node-major

  Trajectory() = default;
  Trajectory(GridPtr g, int steps);

  double* node(int k) { return data.data() + static_cast<std::size_t>(k) * grid->n; }
  const double* node(int k) const {
    return data.data() + static_cast<std::size_t>(k) * grid->n;
  }
  Field at(int k) const;
};

/// Control values on the window (tau, T): one field per control step. The
/// value at step s (for s in [k_tau, n_steps)) acts on (t_s, t_{s+1}] and is
/// paired with the time node t_s by the left-endpoint quadrature rule, which
/// is what makes the discrete duality identity exact. Implicitly zero
/// outside the window.
struct ControlSignal {
  GridPtr grid;
  TimeGrid tg;
  std::vector<double> data;  // control_steps x n, step-major

  ControlSignal() = default;
  ControlSignal(GridPtr g, const TimeGrid& t);

  int n_ctrl() const { return tg.control_steps(); }
  double* step(int s) {  // s is the absolute step index, >= tg.k_tau
    return data.data() + static_cast<std::size_t>(s - tg.k_tau) * grid->n;
  }
  const double* step(int s) const {
    return data.data() + static_cast<std::size_t>(s - tg.k_tau) * grid->n;
  }

  /// Space-time norm sqrt( dt * sum_s sum_i w_i u(x_i,s)^2 ).
  double space_time_norm() const;
};

/// Homogeneous evolution from y0 over [0,T].
Trajectory solve_forward(const Field& y0, const System& sys);

/// Controlled evolution: implicit Euler with source sqrt(beta)*u on the
/// control window, beta extended by zero outside the actuator subregion.
Trajectory solve_forward(const Field& y0, const ActuatorDensity& beta,
                         const ControlSignal& u, const System& sys);

/// Backward evolution with terminal datum eta, solved by time reversal of
/// the homogeneous forward solver: at(0) here is bitwise the forward at(T).
Trajectory solve_adjoint(const Field& eta, const System& sys);

/// Terminal state of the homogeneous evolution (no trajectory storage).
Field free_terminal(const Field& y0, const System& sys);
void free_terminal_raw(const System& sys, const double* y0, double* out);

}  // namespace degctrl

#endif
