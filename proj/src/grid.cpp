#include "degctrl/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace degctrl {

double SpatialGrid::omega1_measure() const {
  double m = 0.0;
  for (int i = omega1_begin; i < n; ++i) m += cell_widths[static_cast<std::size_t>(i)];
  return m;
}

GridPtr build_grid(int n, double alpha, double epsilon_cut) {
  if (n < 4) throw std::invalid_argument("grid: need at least 4 cells");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument(
        "grid: alpha must lie strictly in (0,2) (degeneracy hypothesis)");
  if (!(epsilon_cut > 0.0 && epsilon_cut < 1.0))
    throw std::invalid_argument("grid: epsilon_cut must lie in (0,1)");

  auto g = std::make_shared<SpatialGrid>();
  g->n = n;
  g->alpha = alpha;
  g->epsilon_cut = epsilon_cut;
  const double h = 1.0 / n;
  g->cell_centers.resize(static_cast<std::size_t>(n));
  g->cell_widths.assign(static_cast<std::size_t>(n), h);
  for (int i = 0; i < n; ++i)
    g->cell_centers[static_cast<std::size_t>(i)] = (i + 0.5) * h;

  int first = n;
  for (int i = 0; i < n; ++i) {
    if (g->cell_centers[static_cast<std::size_t>(i)] >= epsilon_cut) {
      first = i;
      break;
    }
  }
  g->omega1_begin = first;
  if (g->omega1_count() <= 0)
    throw std::invalid_argument(
        "grid: actuator subregion is empty; lower epsilon_cut or refine");
  return g;
}

bool same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  return a.n == b.n && a.alpha == b.alpha && a.epsilon_cut == b.epsilon_cut;
}

TimeGrid build_time_grid(double T, double tau, int n_steps) {
  if (!(T > 0.0)) throw std::invalid_argument("time: T must be positive");
  if (n_steps < 2) throw std::invalid_argument("time: need at least 2 steps");
  if (!(tau > 0.0 && tau < T))
    throw std::invalid_argument("time: control start tau must satisfy 0 < tau < T");

  TimeGrid tg;
  tg.T = T;
  tg.n_steps = n_steps;
  tg.dt = T / n_steps;
  int k = static_cast<int>(std::lround(tau / tg.dt));
  if (k < 1) k = 1;
  if (k > n_steps - 1) k = n_steps - 1;
  tg.k_tau = k;
  tg.tau = k * tg.dt;
  tg.tau_rounding = std::abs(tg.tau - tau);
  return tg;
}

std::vector<double> CoefficientSpec::evaluate(const SpatialGrid& grid) const {
  std::vector<double> out(static_cast<std::size_t>(grid.n), 0.0);
  if (!samples.empty()) {
    if (static_cast<int>(samples.size()) != grid.n)
      throw std::invalid_argument("coefficient: sample count != cell count");
    out = samples;
  } else if (!poly.empty()) {
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.cell_centers[static_cast<std::size_t>(i)];
      double acc = 0.0;
      for (std::size_t j = poly.size(); j-- > 0;) acc = acc * x + poly[j];
      out[static_cast<std::size_t>(i)] = acc;
    }
  }
  for (double v : out)
    if (!std::isfinite(v))
      throw std::invalid_argument("coefficient: non-finite value on the domain");
  return out;
}

}  // namespace degctrl
