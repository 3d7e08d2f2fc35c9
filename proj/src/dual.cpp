#include "degctrl/dual.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace degctrl {

namespace {

// dt * sum over window nodes of <beta, psi^2>, one adjoint pass, no storage
double weighted_window_energy(const System& sys, const double* beta_full,
                              const double* eta, std::vector<double>& work) {
  const int n = sys.grid->n;
  const int window = sys.tg.control_steps();
  work.assign(static_cast<std::size_t>(n), 0.0);
  std::memcpy(work.data(), eta, static_cast<std::size_t>(n) * sizeof(double));
  const auto& w = sys.grid->cell_widths;
  double acc = 0.0;
  for (int m = 1; m <= window; ++m) {
    sys.stepper.solve_in_place(work.data());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = work[static_cast<std::size_t>(i)];
      s += w[static_cast<std::size_t>(i)] * beta_full[i] * v * v;
    }
    acc += s;
  }
  return sys.tg.dt * acc;
}

std::vector<double> extend_density(const ActuatorDensity& beta) {
  const auto& g = *beta.grid;
  std::vector<double> full(static_cast<std::size_t>(g.n), 0.0);
  for (int i = 0; i < g.omega1_count(); ++i)
    full[static_cast<std::size_t>(g.omega1_begin + i)] =
        beta.values[static_cast<std::size_t>(i)];
  return full;
}

double wnorm(const SpatialGrid& g, const double* v) {
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i)
    acc += g.cell_widths[static_cast<std::size_t>(i)] * v[i] * v[i];
  return std::sqrt(acc);
}

double wdot(const SpatialGrid& g, const double* a, const double* b) {
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i)
    acc += g.cell_widths[static_cast<std::size_t>(i)] * a[i] * b[i];
  return acc;
}

}  // namespace

Field adjoint_energy_field(const Field& eta, const System& sys) {
  if (!same_grid(*eta.grid, *sys.grid))
    throw std::invalid_argument("adjoint energy: grid mismatch");
  const int n = sys.grid->n;
  const int window = sys.tg.control_steps();
  std::vector<double> work(eta.values);
  Field energy(sys.grid);
  for (int m = 1; m <= window; ++m) {
    sys.stepper.solve_in_place(work.data());
    for (int i = 0; i < n; ++i) {
      const double v = work[static_cast<std::size_t>(i)];
      energy[i] += v * v;
    }
  }
  for (int i = 0; i < n; ++i) energy[i] *= sys.tg.dt;
  return energy;
}

Gramian::Gramian(const System& sys, const ActuatorDensity& beta)
    : sys_(sys), beta_full_(extend_density(beta)) {
  if (!same_grid(*beta.grid, *sys.grid))
    throw std::invalid_argument("gramian: grid mismatch");
  window_.resize(static_cast<std::size_t>(sys.tg.control_steps()) * sys.grid->n);
  work_.resize(static_cast<std::size_t>(sys.grid->n));
}

void Gramian::apply(const double* eta, double* out) const {
  const int n = sys_.grid->n;
  const int K = sys_.tg.n_steps;
  const int kt = sys_.tg.k_tau;
  const double dt = sys_.tg.dt;

  // adjoint pass: psi^m = phi at node K-m; store the window nodes kt..K-1
  std::memcpy(work_.data(), eta, static_cast<std::size_t>(n) * sizeof(double));
  for (int m = 1; m <= K - kt; ++m) {
    sys_.stepper.solve_in_place(work_.data());
    std::memcpy(window_.data() + static_cast<std::size_t>(K - m - kt) * n,
                work_.data(), static_cast<std::size_t>(n) * sizeof(double));
  }

  // forward accumulation from zero with source beta * phi on the window
  std::memset(out, 0, static_cast<std::size_t>(n) * sizeof(double));
  for (int k = kt; k < K; ++k) {
    const double* phi = window_.data() + static_cast<std::size_t>(k - kt) * n;
    for (int i = 0; i < n; ++i) out[i] += dt * beta_full_[static_cast<std::size_t>(i)] * phi[i];
    sys_.stepper.solve_in_place(out);
  }
}

Field Gramian::apply(const Field& eta) const {
  Field out(sys_.grid);
  apply(eta.values.data(), out.values.data());
  return out;
}

double Gramian::quadratic_form(const double* eta) const {
  return weighted_window_energy(sys_, beta_full_.data(), eta, work_);
}

double Gramian::lambda_max(std::uint64_t seed) const {
  const int n = sys_.grid->n;
  SplitMix64 rng(seed);
  std::vector<double> v(static_cast<std::size_t>(n)), av(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.normal();
  double nv = wnorm(*sys_.grid, v.data());
  if (nv == 0.0) return 0.0;
  for (double& x : v) x /= nv;
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    apply(v.data(), av.data());
    const double next = wdot(*sys_.grid, v.data(), av.data());
    const double na = wnorm(*sys_.grid, av.data());
    if (na <= 1e-300) return 0.0;
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = av[static_cast<std::size_t>(i)] / na;
    if (it > 3 && std::abs(next - lambda) <= 1e-4 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda * 1.02;
}

double dual_objective(const Field& eta, const ActuatorDensity& beta,
                      const Field& y0, const Field& y_d, double eps0,
                      const System& sys) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("dual objective: eps0 must be positive");
  std::vector<double> work;
  const auto beta_full = extend_density(beta);
  const double quad =
      weighted_window_energy(sys, beta_full.data(), eta.values.data(), work);
  const Field phi0 = free_terminal(eta, sys);
  return 0.5 * quad + inner(y0, phi0) - inner(y_d, eta) + eps0 * norm(eta);
}

Field dual_gradient(const Field& eta, const ActuatorDensity& beta,
                    const Field& y0, const Field& y_d, double eps0,
                    const System& sys) {
  Gramian gram(sys, beta);
  Field grad = gram.apply(eta);
  const Field b = free_terminal(y0, sys) - y_d;
  axpy(1.0, b, grad);
  const double r = norm(eta);
  if (r > 0.0) axpy(eps0 / r, eta, grad);
  return grad;
}

ControlSignal extract_control(const Field& eta_star,
                              const ActuatorDensity& beta, const System& sys) {
  const int n = sys.grid->n;
  const auto beta_full = extend_density(beta);
  std::vector<double> sqrt_beta(beta_full.size());
  for (std::size_t i = 0; i < beta_full.size(); ++i)
    sqrt_beta[i] = std::sqrt(beta_full[i]);

  Trajectory phi = solve_adjoint(eta_star, sys);
  ControlSignal u(sys.grid, sys.tg);
  for (int k = sys.tg.k_tau; k < sys.tg.n_steps; ++k) {
    const double* ph = phi.node(k);
    double* us = u.step(k);
    for (int i = 0; i < n; ++i) us[i] = sqrt_beta[static_cast<std::size_t>(i)] * ph[i];
  }
  return u;
}

double euler_lagrange_residual(const Field& eta_star,
                               const ActuatorDensity& beta, const Field& y0,
                               const Field& y_d, double eps0,
                               const System& sys) {
  const double r = norm(eta_star);
  if (r <= 0.0)
    throw std::invalid_argument(
        "stationarity residual undefined at eta = 0; use the subgradient test");
  Gramian gram(sys, beta);
  Field res = gram.apply(eta_star);
  axpy(1.0, free_terminal(y0, sys) - y_d, res);
  axpy(eps0 / r, eta_star, res);
  return norm(res);
}

bool assumption_h_holds(const Field& y0, const Field& y_d, double eps0,
                        const System& sys) {
  return norm(free_terminal(y0, sys) - y_d) > eps0;
}

namespace {

// conjugate gradients for (Gramian + shift*I) x = rhs in the quadrature
// inner product; returns the iteration count, solution in x (warm start in)
int cg_shifted(const Gramian& gram, double shift, const std::vector<double>& rhs,
               std::vector<double>& x, double rel_tol, int max_iters) {
  const SpatialGrid& g = *gram.system().grid;
  const int n = g.n;
  std::vector<double> r(static_cast<std::size_t>(n)), p, ap(static_cast<std::size_t>(n));
  gram.apply(x.data(), r.data());
  for (int i = 0; i < n; ++i)
    r[static_cast<std::size_t>(i)] =
        rhs[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)] -
        shift * x[static_cast<std::size_t>(i)];
  p = r;
  double rs = wdot(g, r.data(), r.data());
  const double stop = rel_tol * wnorm(g, rhs.data());
  int it = 0;
  for (; it < max_iters && std::sqrt(rs) > stop; ++it) {
    gram.apply(p.data(), ap.data());
    for (int i = 0; i < n; ++i) ap[static_cast<std::size_t>(i)] += shift * p[static_cast<std::size_t>(i)];
    const double denom = wdot(g, p.data(), ap.data());
    if (denom <= 0.0) break;
    const double a = rs / denom;
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] += a * p[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= a * ap[static_cast<std::size_t>(i)];
    }
    const double rs_new = wdot(g, r.data(), r.data());
    const double bet = rs_new / rs;
    rs = rs_new;
    for (int i = 0; i < n; ++i)
      p[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] + bet * p[static_cast<std::size_t>(i)];
  }
  return it;
}

}  // namespace

DualSolveReport minimize_dual(const ActuatorDensity& beta, const Field& y0,
                              const Field& y_d, double eps0, const System& sys,
                              const DualSolveOptions& opts) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("minimize_dual: eps0 must be positive");
  const SpatialGrid& g = *sys.grid;
  const int n = g.n;

  DualSolveReport rep;
  rep.eta_star = zero_field(sys.grid);

  const Field b = free_terminal(y0, sys) - y_d;
  const double nb = norm(b);
  const double tol_scale = opts.tol * std::max(1.0, norm(y_d));

  if (nb <= eps0) {
    // the zero subgradient test: free evolution already admissible
    rep.null_optimal = true;
    rep.converged = true;
    rep.terminal_residual = nb;
    return rep;
  }

  Gramian gram(sys, beta);
  const double L = std::max(gram.lambda_max(opts.seed), 1e-300);
  const double step = 1.0 / L;

  std::vector<double> eta(static_cast<std::size_t>(n), 0.0), eta_prev = eta;
  std::vector<double> geta(static_cast<std::size_t>(n), 0.0), geta_prev = geta;
  std::vector<double> z(static_cast<std::size_t>(n)), gz(static_cast<std::size_t>(n));
  std::vector<double> cand(static_cast<std::size_t>(n)), gcand(static_cast<std::size_t>(n));

  auto objective = [&](const std::vector<double>& x, const std::vector<double>& gx) {
    double quad = 0.0, lin = 0.0, nrm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = g.cell_widths[static_cast<std::size_t>(i)];
      quad += w * x[static_cast<std::size_t>(i)] * gx[static_cast<std::size_t>(i)];
      lin += w * x[static_cast<std::size_t>(i)] * b.values[static_cast<std::size_t>(i)];
      nrm2 += w * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    }
    return 0.5 * quad + lin + eps0 * std::sqrt(nrm2);
  };

  double theta = 1.0, theta_prev = 1.0;
  double J_cur = 0.0;
  int it = 0;
  int applies = 0;
  double grad_map = std::numeric_limits<double>::infinity();

  for (it = 1; it <= opts.max_iters; ++it) {
    const double momentum = (theta_prev - 1.0) / theta;
    for (int i = 0; i < n; ++i) {
      z[static_cast<std::size_t>(i)] =
          eta[static_cast<std::size_t>(i)] +
          momentum * (eta[static_cast<std::size_t>(i)] - eta_prev[static_cast<std::size_t>(i)]);
      gz[static_cast<std::size_t>(i)] =
          geta[static_cast<std::size_t>(i)] +
          momentum * (geta[static_cast<std::size_t>(i)] - geta_prev[static_cast<std::size_t>(i)]);
    }
    // proximal step: shrink toward zero by the exact prox of eps0*step*|.|
    double nw2 = 0.0;
    for (int i = 0; i < n; ++i) {
      cand[static_cast<std::size_t>(i)] =
          z[static_cast<std::size_t>(i)] -
          step * (gz[static_cast<std::size_t>(i)] + b.values[static_cast<std::size_t>(i)]);
      nw2 += g.cell_widths[static_cast<std::size_t>(i)] * cand[static_cast<std::size_t>(i)] *
             cand[static_cast<std::size_t>(i)];
    }
    const double nw = std::sqrt(nw2);
    const double shrink = nw > 0.0 ? std::max(0.0, 1.0 - step * eps0 / nw) : 0.0;
    for (double& v : cand) v *= shrink;

    double gmap2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = (z[static_cast<std::size_t>(i)] - cand[static_cast<std::size_t>(i)]) / step;
      gmap2 += g.cell_widths[static_cast<std::size_t>(i)] * d * d;
    }
    grad_map = std::sqrt(gmap2);

    gram.apply(cand.data(), gcand.data());
    ++applies;
    const double J_new = objective(cand, gcand);

    if (it > 1 && J_new > J_cur) {
      // monotone restart: drop the extrapolation and retry from the current
      // iterate with a plain proximal step
      theta = 1.0;
      theta_prev = 1.0;
      eta_prev = eta;
      geta_prev = geta;
      continue;
    }

    eta_prev.swap(eta);
    geta_prev.swap(geta);
    eta = cand;
    geta = gcand;
    J_cur = J_new;
    theta_prev = theta;
    theta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));

    if (grad_map <= tol_scale) break;
  }
  rep.converged = grad_map <= tol_scale;
  rep.grad_map_norm = grad_map;

  // secular refinement: at a nonzero minimizer the stationarity system reads
  // (Gramian + (eps0/r) I) eta = -b with r = |eta|; iterate the scalar fixed
  // point on r, each evaluation one CG solve warm-started from the last.
  if (opts.polish) {
    std::vector<double> rhs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = -b.values[static_cast<std::size_t>(i)];
    std::vector<double> x = eta;
    double r = wnorm(g, x.data());
    if (r <= 0.0) {
      // bootstrap from the unconstrained ray through -b
      x = rhs;
      r = nb;
    }
    for (int j = 0; j < 80; ++j) {
      const int used = cg_shifted(gram, eps0 / r, rhs, x, 1e-13, 4000);
      applies += used;
      const double r_new = wnorm(g, x.data());
      const bool done = std::abs(r_new - r) <= 1e-15 * std::max(1.0, r_new);
      r = std::max(r_new, 1e-300);
      if (done) break;
    }
    gram.apply(x.data(), gcand.data());
    ++applies;
    const double J_polish = objective(x, gcand);
    if (J_polish <= J_cur + 1e-14 * std::max(1.0, std::abs(J_cur))) {
      eta = x;
      geta = gcand;
      J_cur = J_polish;
    }
  }

  rep.eta_star = Field(sys.grid, eta);
  rep.iterations = it + applies;

  const double quad = gram.quadratic_form(eta.data());
  rep.N = std::sqrt(std::max(0.0, quad));
  rep.V = J_cur;

  const double r_final = norm(rep.eta_star);
  if (r_final > 0.0) {
    Field res(sys.grid, geta);
    axpy(1.0, b, res);
    axpy(eps0 / r_final, rep.eta_star, res);
    rep.el_residual = norm(res);
    // converged if either exit test holds at the final iterate
    rep.converged = rep.converged || rep.el_residual <= tol_scale;
  }

  const ControlSignal u = extract_control(rep.eta_star, beta, sys);
  Trajectory yT = solve_forward(y0, beta, u, sys);
  Field terminal = yT.at(sys.tg.n_steps);
  rep.terminal_residual = norm(terminal - y_d);
  return rep;
}

}  // namespace degctrl
