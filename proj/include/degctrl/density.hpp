#ifndef DEGCTRL_DENSITY_HPP
#define DEGCTRL_DENSITY_HPP

#include <cstdint>
#include <vector>

#include "degctrl/field.hpp"
#include "degctrl/grid.hpp"
#include "degctrl/rng.hpp"

namespace degctrl {

/// Relaxed actuator: values in [0,1] on the subregion cells, with quadrature
/// mass lambda * |subregion|. A 0/1-valued density is a classical actuator.
struct ActuatorDensity {
  GridPtr grid;
  double lambda = 0.0;
  std::vector<double> values;  // one entry per subregion cell

  double mass() const;
  double target_mass() const { return lambda * grid->omega1_measure(); }
  /// Extension by zero to the whole domain.
  Field as_field() const;
  /// Checks the box and mass invariants (mass within 1e-10).
  bool feasible() const;
};

/// lambda spread uniformly: every subregion cell carries the value lambda.
ActuatorDensity uniform_density(const GridPtr& grid, double lambda);

/// Binary density from subregion-relative cell indices; lambda is inferred
/// from the selected measure.
ActuatorDensity mask_density(const GridPtr& grid,
                             const std::vector<int>& omega1_cells);

/// Density from explicit values (validated against the box constraint and
/// mass within 1e-8, e.g. parsed from a config file).
ActuatorDensity density_from_values(const GridPtr& grid, double lambda,
                                    std::vector<double> values);

/// Random feasible density: uniform noise projected onto the constraint set.
ActuatorDensity random_density(const GridPtr& grid, double lambda,
                               SplitMix64& rng);

/// Weighted Euclidean projection onto { 0 <= b <= 1, sum w_i b_i = mass }:
/// b_i = clip(v_i - shift, 0, 1) with the shift found by bisection until the
/// mass matches within 1e-12. Throws when mass is infeasible.
std::vector<double> project_capped_simplex(const std::vector<double>& v,
                                           const std::vector<double>& w,
                                           double mass);

/// Projection of raw subregion values onto the admissible density set.
ActuatorDensity project_density(const GridPtr& grid, double lambda,
                                const std::vector<double>& raw);

struct BathtubResult {
  ActuatorDensity density;
  double threshold = 0.0;    // field value at the boundary cell
  int fractional_cells = 0;  // 0 or 1 by construction
};

/// Maximizes sum_i w_i b_i phi_i over the admissible set: fill cells by
/// descending phi (ties by ascending index) until the mass budget forces at
/// most one fractional cell.
BathtubResult bathtub_maximize(const GridPtr& grid,
                               const std::vector<double>& phi_on_omega1,
                               double lambda);

struct LevelSetResult {
  std::vector<std::uint8_t> mask;  // one entry per subregion cell
  double threshold = 0.0;
  double rounding_mismatch = 0.0;  // |selected width - lambda*|subregion||
  bool degenerate = false;         // constant field; ties broken by index
};

/// Binary upper level set { H >= c } with c chosen so the selected width is
/// nearest to lambda * |subregion|.
LevelSetResult extract_level_set(const GridPtr& grid,
                                 const std::vector<double>& H_on_omega1,
                                 double lambda);

}  // namespace degctrl

#endif
