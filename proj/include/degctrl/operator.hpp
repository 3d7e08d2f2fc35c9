#ifndef DEGCTRL_OPERATOR_HPP
#define DEGCTRL_OPERATOR_HPP

#include <vector>

#include "degctrl/field.hpp"
#include "degctrl/grid.hpp"

namespace degctrl {

/// Symmetric tridiagonal discretization of the degenerate diffusion operator
/// minus the reaction coefficient, under the quadrature inner product.
///
/// Finite-volume stencil on uniform cells: the flux through an interior face
/// is x_face^alpha * (v_right - v_left) / h. The x=0 face carries zero flux
/// for alpha >= 1 (the face factor 0^alpha vanishes); for alpha < 1 the
/// homogeneous Dirichlet value at x=0 enters through the exact steady-flux
/// transmissibility of the left half cell, (1-alpha)*(h/2)^(alpha-1). The
/// x=1 face enforces v(1)=0 through the half-cell difference.
struct DiscreteOperator {
  enum class LeftBc { DirichletAtZero, ZeroFluxAtZero };

  GridPtr grid;
  LeftBc left_bc = LeftBc::DirichletAtZero;
  std::vector<double> diag;  // n entries
  std::vector<double> off;   // n-1 entries; symmetric sub/super diagonal
  // verification hook: when nonempty these replace the super-diagonal in
  // apply(), deliberately breaking self-adjointness for the negative audit
  std::vector<double> off_upper;

  /// out = M v (raw buffers of length n; aliasing not allowed)
  void apply(const double* v, double* out) const;
  Field apply(const Field& v) const;

  /// Dense copy, for eigensolver oracles and small direct solves.
  std::vector<double> dense_row_major() const;
};

DiscreteOperator assemble_operator(const GridPtr& grid,
                                   const CoefficientSpec& a);

/// Factored solver for (I - dt*M) x = rhs, reused across all time steps.
/// The matrix is a symmetric M-matrix, so the Thomas algorithm is stable
/// without pivoting. Instances are immutable after construction and safe to
/// share across threads.
class ImplicitStepper {
 public:
  ImplicitStepper(const DiscreteOperator& op, double dt);

  int size() const { return n_; }
  double dt() const { return dt_; }

  /// Solves in place: rhs becomes the solution.
  void solve_in_place(double* rhs) const;

 private:
  int n_;
  double dt_;
  std::vector<double> lower_;      // sub-diagonal of (I - dt M)
  std::vector<double> upper_mod_;  // Thomas-eliminated super-diagonal
  std::vector<double> inv_denom_;
};

/// Grid + time axis + assembled operator + factored stepper, built once per
/// problem instance and shared by every solver.
struct System {
  GridPtr grid;
  TimeGrid tg;
  DiscreteOperator op;
  ImplicitStepper stepper;
};

System make_system(const GridPtr& grid, const TimeGrid& tg,
                   const CoefficientSpec& a);

}  // namespace degctrl

#endif
