#ifndef DEGCTRL_GRID_HPP
#define DEGCTRL_GRID_HPP

#include <memory>
#include <vector>

namespace degctrl {

/// Cell-centered discretization of the unit interval with a diffusion
/// coefficient x^alpha that degenerates at x=0, plus the actuator subregion
/// (epsilon_cut, 1) as a contiguous trailing index range.
struct SpatialGrid {
  int n = 0;
  double alpha = 0.0;        // degeneracy exponent, in (0,2) strictly
  double epsilon_cut = 0.0;  // left endpoint of the actuator subregion
  std::vector<double> cell_centers;
  std::vector<double> cell_widths;
  int omega1_begin = 0;  // subregion cells are [omega1_begin, n)

  int omega1_count() const { return n - omega1_begin; }
  double omega1_measure() const;  // sum of subregion cell widths
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

/// Uniform grid of n cells. Throws std::invalid_argument when n < 4,
/// alpha is outside (0,2), or epsilon_cut is outside (0,1).
GridPtr build_grid(int n, double alpha, double epsilon_cut);

/// True when two grids are interchangeable for field arithmetic.
bool same_grid(const SpatialGrid& a, const SpatialGrid& b);

/// Time axis [0,T] with n_steps implicit-Euler steps and a control window
/// (tau, T). tau is rounded to the nearest interior step boundary so the
/// window indicator is unambiguous per step; the applied shift is recorded.
struct TimeGrid {
  double T = 0.0;
  double tau = 0.0;  // rounded value actually used
  int n_steps = 0;
  double dt = 0.0;
  int k_tau = 0;              // node index with tau == k_tau * dt
  double tau_rounding = 0.0;  // |tau_used - tau_requested|

  int control_steps() const { return n_steps - k_tau; }
};

/// Throws std::invalid_argument unless T > 0, 0 < tau < T, n_steps >= 2.
TimeGrid build_time_grid(double T, double tau, int n_steps);

/// Reaction coefficient a(x): polynomial in x, or values sampled at cell
/// centers. Default-constructed spec is a == 0.
struct CoefficientSpec {
  std::vector<double> poly;     // c0 + c1 x + c2 x^2 + ...
  std::vector<double> samples;  // takes precedence when nonempty

  static CoefficientSpec zero() { return {}; }
  static CoefficientSpec polynomial(std::vector<double> c) {
    CoefficientSpec s;
    s.poly = std::move(c);
    return s;
  }
  static CoefficientSpec sampled(std::vector<double> v) {
    CoefficientSpec s;
    s.samples = std::move(v);
    return s;
  }

  /// Values at cell centers. Throws when sampled data does not match the
  /// grid or any value is non-finite.
  std::vector<double> evaluate(const SpatialGrid& grid) const;
};

}  // namespace degctrl

#endif
