#ifndef DEGCTRL_FIELD_HPP
#define DEGCTRL_FIELD_HPP

#include <vector>

#include "degctrl/grid.hpp"
#include "degctrl/rng.hpp"

namespace degctrl {

/// Element of the discretized state space: one value per cell, paired with
/// its grid. The inner product is quadrature-weighted by the cell widths.
struct Field {
  GridPtr grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(GridPtr g)
      : grid(std::move(g)), values(static_cast<std::size_t>(grid->n), 0.0) {}
  Field(GridPtr g, std::vector<double> v);

  int size() const { return static_cast<int>(values.size()); }
  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

/// Quadrature inner product sum_i w_i f_i g_i. Throws on grid mismatch.
double inner(const Field& f, const Field& g);
double norm(const Field& f);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& f);

/// f += c*g
void axpy(double c, const Field& g, Field& f);

Field zero_field(const GridPtr& g);
Field constant_field(const GridPtr& g, double value);

/// Smooth bump exp(-((x-center)/width)^2) clipped to the domain, optionally
/// normalized to unit quadrature norm.
Field bump_field(const GridPtr& g, double center, double width, double scale,
                 bool normalize);

/// iid standard normal values per cell.
Field random_field(const GridPtr& g, SplitMix64& rng);

/// Random field scaled to unit quadrature norm.
Field random_unit_field(const GridPtr& g, SplitMix64& rng);

}  // namespace degctrl

#endif
