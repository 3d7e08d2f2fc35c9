#include "degctrl/field.hpp"

#include <cmath>
#include <stdexcept>

namespace degctrl {

namespace {
void require_same(const Field& f, const Field& g) {
  if (!f.grid || !g.grid || !same_grid(*f.grid, *g.grid))
    throw std::invalid_argument("field: grid mismatch");
}
}  // namespace

Field::Field(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (static_cast<int>(values.size()) != grid->n)
    throw std::invalid_argument("field: value count != cell count");
  for (double x : values)
    if (!std::isfinite(x)) throw std::invalid_argument("field: non-finite entry");
}

double inner(const Field& f, const Field& g) {
  require_same(f, g);
  const auto& w = f.grid->cell_widths;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f.values[i] * g.values[i];
  return acc;
}

double norm(const Field& f) { return std::sqrt(inner(f, f)); }

Field operator+(const Field& a, const Field& b) {
  require_same(a, b);
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

Field operator-(const Field& a, const Field& b) {
  require_same(a, b);
  Field out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

Field operator*(double c, const Field& f) {
  Field out = f;
  for (double& v : out.values) v *= c;
  return out;
}

void axpy(double c, const Field& g, Field& f) {
  require_same(f, g);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += c * g.values[i];
}

Field zero_field(const GridPtr& g) { return Field(g); }

Field constant_field(const GridPtr& g, double value) {
  Field f(g);
  for (double& v : f.values) v = value;
  return f;
}

Field bump_field(const GridPtr& g, double center, double width, double scale,
                 bool normalize) {
  Field f(g);
  for (int i = 0; i < g->n; ++i) {
    const double t = (g->cell_centers[static_cast<std::size_t>(i)] - center) / width;
    f[i] = std::exp(-t * t);
  }
  if (normalize) {
    const double nrm = norm(f);
    if (nrm > 0.0)
      for (double& v : f.values) v /= nrm;
  }
  for (double& v : f.values) v *= scale;
  return f;
}

Field random_field(const GridPtr& g, SplitMix64& rng) {
  Field f(g);
  for (double& v : f.values) v = rng.normal();
  return f;
}

Field random_unit_field(const GridPtr& g, SplitMix64& rng) {
  Field f = random_field(g, rng);
  double nrm = norm(f);
  while (nrm <= 1e-14) {
    f = random_field(g, rng);
    nrm = norm(f);
  }
  for (double& v : f.values) v /= nrm;
  return f;
}

}  // namespace degctrl
