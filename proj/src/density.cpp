#include "degctrl/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace degctrl {

namespace {
std::vector<double> omega1_widths(const SpatialGrid& g) {
  return std::vector<double>(
      g.cell_widths.begin() + g.omega1_begin, g.cell_widths.end());
}
}  // namespace

double ActuatorDensity::mass() const {
  double m = 0.0;
  for (int i = 0; i < grid->omega1_count(); ++i)
    m += grid->cell_widths[static_cast<std::size_t>(grid->omega1_begin + i)] *
         values[static_cast<std::size_t>(i)];
  return m;
}

Field ActuatorDensity::as_field() const {
  Field f(grid);
  for (int i = 0; i < grid->omega1_count(); ++i)
    f[grid->omega1_begin + i] = values[static_cast<std::size_t>(i)];
  return f;
}

bool ActuatorDensity::feasible() const {
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return std::abs(mass() - target_mass()) <= 1e-10;
}

ActuatorDensity uniform_density(const GridPtr& grid, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("density: lambda must lie in (0,1)");
  ActuatorDensity d;
  d.grid = grid;
  d.lambda = lambda;
  d.values.assign(static_cast<std::size_t>(grid->omega1_count()), lambda);
  return d;
}

ActuatorDensity mask_density(const GridPtr& grid,
                             const std::vector<int>& omega1_cells) {
  const int m = grid->omega1_count();
  ActuatorDensity d;
  d.grid = grid;
  d.values.assign(static_cast<std::size_t>(m), 0.0);
  for (int c : omega1_cells) {
    if (c < 0 || c >= m)
      throw std::invalid_argument("density: mask cell index out of range");
    d.values[static_cast<std::size_t>(c)] = 1.0;
  }
  d.lambda = d.mass() / grid->omega1_measure();
  if (!(d.lambda > 0.0 && d.lambda < 1.0))
    throw std::invalid_argument(
        "density: mask selects an empty or full subregion (lambda not in (0,1))");
  return d;
}

ActuatorDensity density_from_values(const GridPtr& grid, double lambda,
                                    std::vector<double> values) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("density: lambda must lie in (0,1)");
  if (static_cast<int>(values.size()) != grid->omega1_count())
    throw std::invalid_argument("density: value count != subregion cell count");
  ActuatorDensity d;
  d.grid = grid;
  d.lambda = lambda;
  d.values = std::move(values);
  for (double v : d.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("density: values must lie in [0,1]");
  if (std::abs(d.mass() - d.target_mass()) > 1e-8)
    throw std::invalid_argument("density: mass does not match lambda*|subregion|");
  return d;
}

ActuatorDensity random_density(const GridPtr& grid, double lambda,
                               SplitMix64& rng) {
  std::vector<double> raw(static_cast<std::size_t>(grid->omega1_count()));
  for (double& v : raw) v = rng.uniform();
  return project_density(grid, lambda, raw);
}

std::vector<double> project_capped_simplex(const std::vector<double>& v,
                                           const std::vector<double>& w,
                                           double mass) {
  if (v.size() != w.size())
    throw std::invalid_argument("projection: length mismatch");
  double capacity = 0.0;
  for (double wi : w) {
    if (!(wi > 0.0)) throw std::invalid_argument("projection: weights must be positive");
    capacity += wi;
  }
  if (mass < -1e-15 || mass > capacity * (1.0 + 1e-12))
    throw std::invalid_argument("projection: infeasible mass");

  auto mass_at = [&](double shift) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      m += w[i] * std::clamp(v[i] - shift, 0.0, 1.0);
    return m;
  };

  double lo = *std::max_element(v.begin(), v.end()) - 1.0;  // mass == capacity side
  double hi = *std::max_element(v.begin(), v.end());        // mass == 0 side
  lo = std::min(lo, *std::min_element(v.begin(), v.end()) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass_at(mid);
    if (std::abs(m - mass) <= 1e-12) {
      lo = hi = mid;
      break;
    }
    (m > mass ? lo : hi) = mid;
  }
  const double shift = 0.5 * (lo + hi);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = std::clamp(v[i] - shift, 0.0, 1.0);
  return out;
}

ActuatorDensity project_density(const GridPtr& grid, double lambda,
                                const std::vector<double>& raw) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("density: lambda must lie in (0,1)");
  if (static_cast<int>(raw.size()) != grid->omega1_count())
    throw std::invalid_argument("density: raw value count != subregion cell count");
  ActuatorDensity d;
  d.grid = grid;
  d.lambda = lambda;
  d.values = project_capped_simplex(raw, omega1_widths(*grid),
                                    lambda * grid->omega1_measure());
  return d;
}

BathtubResult bathtub_maximize(const GridPtr& grid,
                               const std::vector<double>& phi_on_omega1,
                               double lambda) {
  const int m = grid->omega1_count();
  if (static_cast<int>(phi_on_omega1.size()) != m)
    throw std::invalid_argument("bathtub: field size != subregion cell count");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("bathtub: lambda must lie in (0,1)");

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return phi_on_omega1[static_cast<std::size_t>(a)] >
           phi_on_omega1[static_cast<std::size_t>(b)];
  });

  BathtubResult res;
  res.density.grid = grid;
  res.density.lambda = lambda;
  res.density.values.assign(static_cast<std::size_t>(m), 0.0);

  double remaining = lambda * grid->omega1_measure();
  double threshold = phi_on_omega1[static_cast<std::size_t>(order[0])];
  for (int idx : order) {
    if (remaining <= 0.0) break;
    const double w =
        grid->cell_widths[static_cast<std::size_t>(grid->omega1_begin + idx)];
    if (remaining >= w * (1.0 - 1e-14)) {
      res.density.values[static_cast<std::size_t>(idx)] = 1.0;
      remaining -= w;
      threshold = phi_on_omega1[static_cast<std::size_t>(idx)];
    } else {
      const double frac = remaining / w;
      if (frac > 1e-12) {
        res.density.values[static_cast<std::size_t>(idx)] = frac;
        res.fractional_cells = 1;
        threshold = phi_on_omega1[static_cast<std::size_t>(idx)];
      }
      remaining = 0.0;
    }
  }
  res.threshold = threshold;
  return res;
}

LevelSetResult extract_level_set(const GridPtr& grid,
                                 const std::vector<double>& H_on_omega1,
                                 double lambda) {
  const int m = grid->omega1_count();
  if (static_cast<int>(H_on_omega1.size()) != m)
    throw std::invalid_argument("level set: field size != subregion cell count");

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return H_on_omega1[static_cast<std::size_t>(a)] >
           H_on_omega1[static_cast<std::size_t>(b)];
  });

  const double target = lambda * grid->omega1_measure();
  // choose the prefix length whose width is nearest the target mass
  double best_err = std::abs(target);
  int best_k = 0;
  double width = 0.0;
  for (int k = 1; k <= m; ++k) {
    width += grid->cell_widths[static_cast<std::size_t>(
        grid->omega1_begin + order[static_cast<std::size_t>(k - 1)])];
    const double err = std::abs(width - target);
    if (err < best_err) {
      best_err = err;
      best_k = k;
    }
  }

  LevelSetResult res;
  res.mask.assign(static_cast<std::size_t>(m), 0);
  for (int k = 0; k < best_k; ++k)
    res.mask[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
  res.rounding_mismatch = best_err;
  res.threshold =
      best_k > 0
          ? H_on_omega1[static_cast<std::size_t>(order[static_cast<std::size_t>(best_k - 1)])]
          : *std::max_element(H_on_omega1.begin(), H_on_omega1.end());
  const auto [mn, mx] = std::minmax_element(H_on_omega1.begin(), H_on_omega1.end());
  res.degenerate = (*mx - *mn) <= 0.0;
  return res;
}

}  // namespace degctrl
