#ifndef DEGCTRL_ORACLE_HPP
#define DEGCTRL_ORACLE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "degctrl/dual.hpp"
#include "degctrl/game.hpp"
#include "degctrl/pde.hpp"

namespace degctrl {

/// Materialized control-to-terminal-state map: y(T) = K u + b with u the
/// stacked control values (step-major) and b the free terminal state. Built
/// by pushing unit controls through the production stepping scheme, so the
/// two paths agree to roundoff. Test-side only; sizes are capped.
struct DenseControlOperator {
  Eigen::MatrixXd K;  // n x (n * control_steps)
  Eigen::VectorXd b;
  GridPtr grid;
  TimeGrid tg;

  static DenseControlOperator build(const ActuatorDensity& beta,
                                    const Field& y0, const System& sys);

  Eigen::VectorXd terminal(const Eigen::VectorXd& u) const { return K * u + b; }
};

/// Direct least-norm solve of the constrained problem: bisection on the
/// Tikhonov multiplier until the terminal residual enters
/// [eps0*(1-1e-8), eps0]; returns the control norm (0 when the free
/// evolution is already admissible). Throws when the residual floor exceeds
/// eps0, i.e. the target is not reachable at this resolution.
double oracle_min_norm(const ActuatorDensity& beta, const Field& y0,
                       const Field& y_d, double eps0, const System& sys);

/// Trace of (multiplier, residual) pairs visited by the bisection, for the
/// monotonicity audit.
std::vector<std::pair<double, double>> oracle_min_norm_trace(
    const ActuatorDensity& beta, const Field& y0, const Field& y_d,
    double eps0, const System& sys);

/// Central finite differences of a scalar functional, returned as a
/// quadrature-consistent gradient field (each partial divided by the cell
/// weight).
Field fd_gradient(const std::function<double(const Field&)>& f,
                  const Field& eta, double step);

struct ActuatorEnumResult {
  std::vector<int> best_cells;  // subregion-relative indices
  double best_value = 0.0;      // largest inner value (= smallest worst norm)
  std::vector<double> values;   // one per enumerated mask, enumeration order
  std::vector<std::vector<int>> masks;
};

/// Exhaustive enumeration of binary locations with k cells, each scored by
/// the best-found inner value at that location (worst-case mode) or by the
/// largest dual value over a provided set of initial states. Throws when
/// the combinatorial budget C(m,k) > 1e5 is exceeded.
ActuatorEnumResult oracle_best_actuator(int k_cells, const BallSpec& ball,
                                        const Field& y_d, double eps0,
                                        const System& sys,
                                        const InnerOptions& inner,
                                        int threads = 1,
                                        const std::vector<Field>* y0_set = nullptr);

/// Grid search of the payoff over the span of the leading Gramian
/// eigenvectors intersected with the ball: a restriction, so the result is
/// an upper bound on the global minimum with a net_points^rank budget.
double lowrank_inner_oracle(const ActuatorDensity& beta, const BallSpec& ball,
                            const Field& y_d, double eps0, int rank,
                            int net_points, const System& sys);

}  // namespace degctrl

#endif
