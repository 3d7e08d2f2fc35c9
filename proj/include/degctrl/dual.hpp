#ifndef DEGCTRL_DUAL_HPP
#define DEGCTRL_DUAL_HPP

#include <cstdint>
#include <vector>

#include "degctrl/pde.hpp"

namespace degctrl {

/// Pointwise-in-space adjoint energy integrated over the control window:
/// E(x_i) = dt * sum_{k in window} phi(x_i, t_k; eta)^2, nonnegative.
Field adjoint_energy_field(const Field& eta, const System& sys);

/// The controllability Gramian of the relaxed system: eta maps to the
/// terminal state reached from zero with source beta * phi(.; eta) on the
/// control window. Symmetric positive semidefinite in the quadrature inner
/// product. An instance owns a private trajectory workspace, so share one
/// instance per solve, not across threads.
class Gramian {
 public:
  Gramian(const System& sys, const ActuatorDensity& beta);

  void apply(const double* eta, double* out) const;
  Field apply(const Field& eta) const;

  /// <Gramian eta, eta> = <beta, E(eta)> evaluated from one adjoint pass.
  double quadratic_form(const double* eta) const;

  /// Largest eigenvalue estimate by power iteration (relative tol ~1e-4),
  /// inflated by 2% so it upper-bounds the true Lipschitz constant.
  double lambda_max(std::uint64_t seed) const;

  const System& system() const { return sys_; }

 private:
  const System& sys_;
  std::vector<double> beta_full_;       // density extended by zero
  mutable std::vector<double> window_;  // adjoint values on the window
  mutable std::vector<double> work_;
};

double dual_objective(const Field& eta, const ActuatorDensity& beta,
                      const Field& y0, const Field& y_d, double eps0,
                      const System& sys);

/// Quadrature-consistent gradient of the dual objective. At eta = 0 returns
/// the minimum-norm subgradient selection (the smooth part only), so zero is
/// optimal iff that vector has norm <= eps0.
Field dual_gradient(const Field& eta, const ActuatorDensity& beta,
                    const Field& y0, const Field& y_d, double eps0,
                    const System& sys);

struct DualSolveOptions {
  double tol = 1e-7;       // on the gradient-map norm, scaled by max(1,|y_d|)
  int max_iters = 50000;   // accelerated proximal-gradient iteration cap
  bool polish = true;      // secular refinement of the stationarity system
  std::uint64_t seed = 0x5eed0001ULL;  // power-iteration start
};

struct DualSolveReport {
  Field eta_star;
  double V = 0.0;  // minimum of the dual objective, <= 0
  double N = 0.0;  // minimum control norm
  double el_residual = 0.0;
  double terminal_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool null_optimal = false;  // free evolution already lands within eps0
  double grad_map_norm = 0.0;
};

/// Minimizes the convex dual functional by accelerated proximal gradient
/// (exact prox of the eps0-norm term, monotone restart), then refines the
/// stationarity system Gramian*eta + r(eta/|eta|)*eps0 = y_d - freeT(y0)
/// through a secular fixed point on |eta| with conjugate-gradient solves.
/// Non-convergence is reported through the flag, never thrown.
DualSolveReport minimize_dual(const ActuatorDensity& beta, const Field& y0,
                              const Field& y_d, double eps0, const System& sys,
                              const DualSolveOptions& opts = {});

/// u* = sqrt(beta) * phi(.; eta_star) on the control window.
ControlSignal extract_control(const Field& eta_star,
                              const ActuatorDensity& beta, const System& sys);

/// Norm of the stationarity defect at a nonzero minimizer. Throws
/// std::invalid_argument at eta = 0 (use dual_gradient's subgradient test).
double euler_lagrange_residual(const Field& eta_star,
                               const ActuatorDensity& beta, const Field& y0,
                               const Field& y_d, double eps0,
                               const System& sys);

/// True iff the free evolution misses the target by more than eps0, i.e. a
/// nonzero control is required.
bool assumption_h_holds(const Field& y0, const Field& y_d, double eps0,
                        const System& sys);

}  // namespace degctrl

#endif
