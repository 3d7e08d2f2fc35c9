#include "degctrl/game.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "degctrl/parallel.hpp"

namespace degctrl {

namespace {

// One adjoint sweep shared by most game quantities: the windowed energy
// field and the datum's free-evolution image phi(0; eta).
struct Sweep {
  Field energy;  // E(eta) on the whole domain
  Field phi0;
  double phi0_norm = 0.0;
};

Sweep sweep_eta(const Field& eta, const System& sys) {
  const int n = sys.grid->n;
  const int K = sys.tg.n_steps;
  const int kt = sys.tg.k_tau;
  Sweep s;
  s.energy = Field(eta.grid);
  std::vector<double> work(eta.values);
  for (int m = 1; m <= K; ++m) {
    sys.stepper.solve_in_place(work.data());
    if (m <= K - kt) {
      for (int i = 0; i < n; ++i) {
        const double v = work[static_cast<std::size_t>(i)];
        s.energy[i] += v * v;
      }
    }
  }
  for (int i = 0; i < n; ++i) s.energy[i] *= sys.tg.dt;
  s.phi0 = Field(eta.grid, work);
  s.phi0_norm = norm(s.phi0);
  return s;
}

// beta-independent payoff data for a fixed datum
struct EtaStats {
  Field eta;
  std::vector<double> energy_omega1;  // E restricted to the subregion
  double offset = 0.0;  // -|phi0| - <y_d,eta> + eps0*|eta|
};

EtaStats make_stats(const Field& eta, const Field& y_d, double eps0,
                    const System& sys) {
  EtaStats st;
  st.eta = eta;
  const Sweep s = sweep_eta(eta, sys);
  const int m = sys.grid->omega1_count();
  st.energy_omega1.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    st.energy_omega1[static_cast<std::size_t>(i)] =
        s.energy[sys.grid->omega1_begin + i];
  st.offset = -s.phi0_norm - inner(y_d, eta) + eps0 * norm(eta);
  return st;
}

double payoff_from_stats(const ActuatorDensity& beta, const EtaStats& st) {
  const SpatialGrid& g = *beta.grid;
  double acc = 0.0;
  for (int i = 0; i < g.omega1_count(); ++i)
    acc += g.cell_widths[static_cast<std::size_t>(g.omega1_begin + i)] *
           beta.values[static_cast<std::size_t>(i)] *
           st.energy_omega1[static_cast<std::size_t>(i)];
  return 0.5 * acc + st.offset;
}

std::vector<double> omega1_slice(const Field& f) {
  const SpatialGrid& g = *f.grid;
  return std::vector<double>(f.values.begin() + g.omega1_begin, f.values.end());
}

double smooth_norm(double v, double sigma) {
  return std::sqrt(v * v + sigma * sigma);
}

}  // namespace

bool DiracMixture::valid(double radius) const {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (a.weight < 0.0) return false;
    if (norm(a.eta) > radius * (1.0 + 1e-9)) return false;
    total += a.weight;
  }
  return std::abs(total - 1.0) <= 1e-12;
}

double game_payoff(const ActuatorDensity& beta, const Field& eta,
                   const Field& y_d, double eps0, const System& sys) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("game payoff: eps0 must be positive");
  return payoff_from_stats(beta, make_stats(eta, y_d, eps0, sys));
}

Field game_gradient(const ActuatorDensity& beta, const Field& eta,
                    const Field& y_d, double eps0, double kink_sigma,
                    const System& sys) {
  Gramian gram(sys, beta);
  Field grad = gram.apply(eta);
  const Field phi0 = free_terminal(eta, sys);
  const double np = norm(phi0);
  Field pull = free_terminal(phi0, sys);  // the map is self-adjoint
  axpy(-1.0 / smooth_norm(np, kink_sigma), pull, grad);
  axpy(-1.0, y_d, grad);
  const double ne = norm(eta);
  axpy(eps0 / smooth_norm(ne, kink_sigma), eta, grad);
  return grad;
}

Field find_reachable_preimage(const Field& y_d, double eps0, const System& sys) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("preimage: eps0 must be positive");
  const int n = sys.grid->n;

  if (norm(y_d) <= 0.25 * eps0) return zero_field(sys.grid);

  // dense propagator: column i = free evolution of the i-th unit cell value
  Eigen::MatrixXd F(n, n);
  {
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      std::fill(col.begin(), col.end(), 0.0);
      col[static_cast<std::size_t>(j)] = 1.0;
      for (int k = 0; k < sys.tg.n_steps; ++k) sys.stepper.solve_in_place(col.data());
      for (int i = 0; i < n; ++i) F(i, j) = col[static_cast<std::size_t>(i)];
    }
  }
  Eigen::Map<const Eigen::VectorXd> target(y_d.values.data(), n);
  const Eigen::MatrixXd gram = F.transpose() * F;
  const Eigen::VectorXd rhs = F.transpose() * target;

  for (double gamma = 1.0; gamma >= 1e-14; gamma *= 0.1) {
    Eigen::MatrixXd A = gram;
    A.diagonal().array() += gamma;
    const Eigen::VectorXd z = A.ldlt().solve(rhs);
    Field cand(sys.grid, std::vector<double>(z.data(), z.data() + n));
    // certify with the production stepping path
    const double res = norm(free_terminal(cand, sys) - y_d);
    if (res < 0.5 * eps0) return cand;
  }
  throw std::runtime_error(
      "preimage: target not reachable to eps0/2 at this resolution");
}

namespace {

// adversarial density: minimizes <beta, E> over the admissible set, i.e.
// bathtub on the negated energy
ActuatorDensity adversarial_density(const std::vector<double>& energy_omega1,
                                    double lambda, const GridPtr& grid) {
  std::vector<double> neg(energy_omega1.size());
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -energy_omega1[i];
  return bathtub_maximize(grid, neg, lambda).density;
}

double max_obs_ratio(double lambda, int n_samples, std::uint64_t seed,
                     const System& sys, int* degenerate_count) {
  double worst = 0.0;
  int degenerate = 0;
  const SpatialGrid& g = *sys.grid;
  for (int s = 0; s < n_samples; ++s) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    const Field eta = random_unit_field(sys.grid, rng);
    const Sweep sw = sweep_eta(eta, sys);
    const std::vector<double> energy = omega1_slice(sw.energy);

    std::vector<ActuatorDensity> betas;
    betas.push_back(adversarial_density(energy, lambda, sys.grid));
    betas.push_back(random_density(sys.grid, lambda, rng));
    {
      std::vector<double> raw(energy.size());
      for (double& v : raw) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
      betas.push_back(project_density(sys.grid, lambda, raw));
    }

    const double num = sw.phi0_norm * sw.phi0_norm;
    for (const auto& beta : betas) {
      double denom = 0.0;
      for (int i = 0; i < g.omega1_count(); ++i)
        denom += g.cell_widths[static_cast<std::size_t>(g.omega1_begin + i)] *
                 beta.values[static_cast<std::size_t>(i)] *
                 energy[static_cast<std::size_t>(i)];
      if (denom <= 1e-300) {
        ++degenerate;
        continue;
      }
      worst = std::max(worst, num / denom);
    }
  }
  if (degenerate_count) *degenerate_count = degenerate;
  return worst;
}

}  // namespace

double estimate_observability_constant(double lambda, int n_samples,
                                       std::uint64_t seed, const System& sys) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("observability: lambda must lie in (0,1)");
  int degenerate = 0;
  const double worst = max_obs_ratio(lambda, n_samples, seed, sys, &degenerate);
  if (worst <= 0.0 && degenerate > 0)
    throw std::runtime_error(
        "observability: all sampled pairings degenerate; control window "
        "misconfigured (tau >= T?)");
  return 2.0 * worst;
}

int observability_violations(double c_hat, double lambda, int n_samples,
                             std::uint64_t seed, const System& sys) {
  const SpatialGrid& g = *sys.grid;
  int violations = 0;
  for (int s = 0; s < n_samples; ++s) {
    SplitMix64 rng(derive_seed(seed, 0xAD17ULL + static_cast<std::uint64_t>(s)));
    const Field eta = random_unit_field(sys.grid, rng);
    const Sweep sw = sweep_eta(eta, sys);
    const std::vector<double> energy = omega1_slice(sw.energy);
    std::vector<ActuatorDensity> betas;
    betas.push_back(random_density(sys.grid, lambda, rng));
    betas.push_back(adversarial_density(energy, lambda, sys.grid));
    for (const auto& beta : betas) {
      double denom = 0.0;
      for (int i = 0; i < g.omega1_count(); ++i)
        denom += g.cell_widths[static_cast<std::size_t>(g.omega1_begin + i)] *
                 beta.values[static_cast<std::size_t>(i)] *
                 energy[static_cast<std::size_t>(i)];
      if (sw.phi0_norm * sw.phi0_norm > c_hat * denom) ++violations;
    }
  }
  return violations;
}

double dual_ball_radius(double obs_constant, double eps0, const Field& yhat0) {
  if (!(obs_constant > 0.0) || !(eps0 > 0.0))
    throw std::invalid_argument("ball radius: inputs must be positive");
  const double s = 1.0 + norm(yhat0);
  return obs_constant * s * s / eps0;
}

BallSpec make_ball(double lambda, const Field& y_d, double eps0, int n_samples,
                   std::uint64_t seed, const System& sys) {
  BallSpec ball;
  ball.yhat0 = find_reachable_preimage(y_d, eps0, sys);
  ball.obs_constant = estimate_observability_constant(lambda, n_samples, seed, sys);
  ball.radius = dual_ball_radius(ball.obs_constant, eps0, ball.yhat0);
  return ball;
}

double level_measure_fraction(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("measure bound: lambda must lie in (0,1)");
  const double root = std::sqrt(2.0 * lambda);
  return (2.0 * lambda - root) / (2.0 - root);
}

double level_measure_bound(double lambda, const SpatialGrid& grid) {
  return level_measure_fraction(lambda) * grid.omega1_measure();
}

// ---------------------------------------------------------------------------
// inner minimization: convex-concave descent over the ball
// ---------------------------------------------------------------------------

namespace {

// proximal step of step*(eps0*|.| + indicator of |.| <= radius): both terms
// are radial, so shrink the norm then clamp it
void radial_prox(const SpatialGrid& g, double step_eps0, double radius,
                 std::vector<double>& v) {
  double n2 = 0.0;
  for (int i = 0; i < g.n; ++i)
    n2 += g.cell_widths[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)] *
          v[static_cast<std::size_t>(i)];
  const double r = std::sqrt(n2);
  if (r <= 0.0) return;
  const double shrunk = std::max(0.0, r - step_eps0);
  const double target = std::min(shrunk, radius);
  const double scale = target / r;
  for (double& x : v) x *= scale;
}

struct SubproblemResult {
  std::vector<double> eta;
  int iterations = 0;
};

// minimize 0.5<eta, Gram eta> + <c, eta> + eps0|eta| over |eta| <= radius by
// accelerated proximal gradient with monotone restart
SubproblemResult solve_majorant(const Gramian& gram, double lipschitz,
                                const std::vector<double>& c, double eps0,
                                double radius, const std::vector<double>& start,
                                double tol, int max_iters) {
  const SpatialGrid& g = *gram.system().grid;
  const int n = g.n;
  const double step = 1.0 / std::max(lipschitz, 1e-300);

  std::vector<double> eta = start, eta_prev = start;
  std::vector<double> geta(static_cast<std::size_t>(n)), geta_prev;
  gram.apply(eta.data(), geta.data());
  geta_prev = geta;
  std::vector<double> z(static_cast<std::size_t>(n)), gz(static_cast<std::size_t>(n));
  std::vector<double> cand(static_cast<std::size_t>(n)), gcand(static_cast<std::size_t>(n));

  auto value = [&](const std::vector<double>& x, const std::vector<double>& gx) {
    double quad = 0.0, lin = 0.0, n2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = g.cell_widths[static_cast<std::size_t>(i)];
      quad += w * x[static_cast<std::size_t>(i)] * gx[static_cast<std::size_t>(i)];
      lin += w * x[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
      n2 += w * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    }
    return 0.5 * quad + lin + eps0 * std::sqrt(n2);
  };

  double theta = 1.0, theta_prev = 1.0;
  double J_cur = value(eta, geta);
  int it = 1;
  for (; it <= max_iters; ++it) {
    const double momentum = (theta_prev - 1.0) / theta;
    for (int i = 0; i < n; ++i) {
      z[static_cast<std::size_t>(i)] =
          eta[static_cast<std::size_t>(i)] +
          momentum * (eta[static_cast<std::size_t>(i)] - eta_prev[static_cast<std::size_t>(i)]);
      gz[static_cast<std::size_t>(i)] =
          geta[static_cast<std::size_t>(i)] +
          momentum * (geta[static_cast<std::size_t>(i)] - geta_prev[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n; ++i)
      cand[static_cast<std::size_t>(i)] =
          z[static_cast<std::size_t>(i)] -
          step * (gz[static_cast<std::size_t>(i)] + c[static_cast<std::size_t>(i)]);
    radial_prox(g, step * eps0, radius, cand);

    double gmap2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = (z[static_cast<std::size_t>(i)] - cand[static_cast<std::size_t>(i)]) / step;
      gmap2 += g.cell_widths[static_cast<std::size_t>(i)] * d * d;
    }

    gram.apply(cand.data(), gcand.data());
    const double J_new = value(cand, gcand);
    if (it > 1 && J_new > J_cur) {
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
    if (std::sqrt(gmap2) <= tol) break;
  }
  return {eta, it};
}

}  // namespace

InnerResult inner_minimize(const ActuatorDensity& beta, const BallSpec& ball,
                           const Field& y_d, double eps0, const System& sys,
                           const InnerOptions& opts,
                           const std::vector<Field>* warm_starts) {
  const SpatialGrid& g = *sys.grid;
  const int n = g.n;
  const double sigma = 1e-9 * std::max(ball.radius, 1e-12);

  Gramian gram(sys, beta);
  const double lipschitz = std::max(gram.lambda_max(derive_seed(opts.seed, 7)), 1e-300);

  // start set: zero, caller-provided warm starts, dual solves at slow-mode
  // initial states, random fields at a few scales
  std::vector<Field> starts;
  starts.push_back(zero_field(sys.grid));
  if (warm_starts)
    for (const auto& w : *warm_starts) starts.push_back(w);
  if (opts.dual_starts > 0) {
    // slowest free modes carry the worst-case initial states; their dual
    // minimizers are strong starts for the game's inner problem
    Eigen::MatrixXd dense(n, n);
    const std::vector<double> rows = sys.op.dense_row_major();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dense(i, j) = -rows[static_cast<std::size_t>(i) * n + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    DualSolveOptions dopts;
    dopts.tol = 1e-6;
    dopts.max_iters = 2000;
    for (int m = 0; m < opts.dual_starts; ++m) {
      Eigen::VectorXd v = es.eigenvectors().col(std::min(m, n - 1));
      Field y0(sys.grid, std::vector<double>(v.data(), v.data() + n));
      const double nv = norm(y0);
      if (nv <= 0.0) continue;
      for (double& x : y0.values) x /= nv;
      const DualSolveReport rep = minimize_dual(beta, y0, y_d, eps0, sys, dopts);
      if (norm(rep.eta_star) > 0.0) starts.push_back(rep.eta_star);
      Field flipped = -1.0 * rep.eta_star;
      if (norm(flipped) > 0.0) starts.push_back(flipped);
    }
  }
  for (int s = 0; s < opts.n_starts; ++s) {
    SplitMix64 rng(derive_seed(opts.seed, 100 + static_cast<std::uint64_t>(s)));
    const double scale = std::pow(10.0, rng.uniform(-1.0, 1.0)) *
                         std::min(ball.radius, 10.0 + 0.4 * ball.radius);
    Field f = random_unit_field(sys.grid, rng);
    for (double& x : f.values) x *= scale;
    starts.push_back(f);
  }

  std::vector<InnerResult> results(starts.size());
  auto run_start = [&](int si) {
    std::vector<double> eta = starts[static_cast<std::size_t>(si)].values;
    // clamp the start into the ball
    {
      Field f(sys.grid, eta);
      const double r = norm(f);
      if (r > ball.radius)
        for (double& x : eta) x *= ball.radius / r;
    }
    double value = payoff_from_stats(beta, make_stats(Field(sys.grid, eta), y_d, eps0, sys));
    std::vector<double> c(static_cast<std::size_t>(n));
    for (int dc = 0; dc < opts.dc_max_iters; ++dc) {
      // linearize the concave -|phi0| term at the current iterate
      const Field cur(sys.grid, eta);
      const Field phi0 = free_terminal(cur, sys);
      const double np = norm(phi0);
      Field pull = free_terminal(phi0, sys);
      const double inv = 1.0 / smooth_norm(np, sigma);
      for (int i = 0; i < n; ++i)
        c[static_cast<std::size_t>(i)] = -y_d.values[static_cast<std::size_t>(i)] -
                                         inv * pull.values[static_cast<std::size_t>(i)];
      SubproblemResult sub =
          solve_majorant(gram, lipschitz, c, eps0, ball.radius, eta,
                         opts.subproblem_tol * std::max(1.0, norm(y_d)),
                         opts.subproblem_max_iters);
      const double new_value =
          payoff_from_stats(beta, make_stats(Field(sys.grid, sub.eta), y_d, eps0, sys));
      if (new_value <= value - std::abs(value) * opts.dc_tol - 1e-15) {
        eta.swap(sub.eta);
        value = new_value;
      } else {
        if (new_value < value) {
          eta.swap(sub.eta);
          value = new_value;
        }
        break;
      }
    }
    results[static_cast<std::size_t>(si)] = {Field(sys.grid, eta), value};
  };
  parallel_for(static_cast<int>(starts.size()), opts.threads, run_start);

  InnerResult best{zero_field(sys.grid), 0.0};  // the zero anchor
  for (const auto& r : results)
    if (r.value < best.value) best = r;
  return best;
}

OuterResult outer_maximize(const BallSpec& ball, double lambda,
                           const Field& y_d, double eps0,
                           const ActuatorDensity& init, const System& sys,
                           const OuterOptions& opts) {
  ActuatorDensity beta = init;
  OuterResult best;
  best.density = init;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<Field> warm;

  double step0 = 0.0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    InnerOptions iopts = opts.inner;
    iopts.seed = derive_seed(opts.inner.seed, static_cast<std::uint64_t>(it));
    const InnerResult inner =
        inner_minimize(beta, ball, y_d, eps0, sys, iopts, warm.empty() ? nullptr : &warm);
    if (inner.value > best.value) {
      best.value = inner.value;
      best.density = beta;
      best.eta_at_best = inner.eta_hat;
    }
    best.trace.push_back(inner.value);
    warm.assign(1, inner.eta_hat);

    // supergradient of the concave value function: half the energy field
    const Sweep sw = sweep_eta(inner.eta_hat, sys);
    std::vector<double> super = omega1_slice(sw.energy);
    for (double& v : super) v *= 0.5;

    if (it == 1) {
      double mx = 0.0;
      for (double v : super) mx = std::max(mx, std::abs(v));
      step0 = opts.step0_scale * lambda * sys.grid->omega1_measure() /
              std::max(mx, 1e-12);
    }
    const double step = step0 / std::sqrt(static_cast<double>(it));

    // evaluate both the projected ascent iterate and the extreme (bathtub)
    // candidate of the current supergradient; keep climbing from the ascent
    // iterate, let best-iterate bookkeeping capture the extreme one
    std::vector<double> raw(beta.values);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] += step * super[i];
    beta = project_density(sys.grid, lambda, raw);

    const ActuatorDensity extreme = bathtub_maximize(sys.grid, super, lambda).density;
    InnerOptions xopts = iopts;
    xopts.seed = derive_seed(iopts.seed, 0xE1ULL);
    const InnerResult xres =
        inner_minimize(extreme, ball, y_d, eps0, sys, xopts, &warm);
    if (xres.value > best.value) {
      best.value = xres.value;
      best.density = extreme;
      best.eta_at_best = xres.eta_hat;
    }
  }
  return best;
}

Field mixture_energy_field(const DiracMixture& h, const System& sys) {
  Field H(sys.grid);
  for (const auto& atom : h.atoms) {
    const Sweep sw = sweep_eta(atom.eta, sys);
    axpy(atom.weight, sw.energy, H);
  }
  return H;
}

BathtubResult best_response_density(const DiracMixture& h, double lambda,
                                    const System& sys) {
  Field H = mixture_energy_field(h, sys);
  std::vector<double> half = omega1_slice(H);
  for (double& v : half) v *= 0.5;
  return bathtub_maximize(sys.grid, half, lambda);
}

// ---------------------------------------------------------------------------
// finite zero-sum matrix game: optimistic multiplicative weights
// ---------------------------------------------------------------------------

MatrixGameResult solve_matrix_game(const std::vector<std::vector<double>>& payoff,
                                   int max_rounds, double gap_tol) {
  const int R = static_cast<int>(payoff.size());
  if (R == 0) throw std::invalid_argument("matrix game: empty payoff");
  const int C = static_cast<int>(payoff[0].size());
  for (const auto& row : payoff)
    if (static_cast<int>(row.size()) != C)
      throw std::invalid_argument("matrix game: ragged payoff");

  MatrixGameResult res;
  if (R == 1 && C == 1) {
    res.row_weights = {1.0};
    res.col_weights = {1.0};
    res.value = payoff[0][0];
    res.rounds = 0;
    return res;
  }

  double lo = payoff[0][0], hi = payoff[0][0];
  for (const auto& row : payoff)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double range = hi - lo;
  if (range <= 0.0) {
    res.row_weights.assign(static_cast<std::size_t>(R), 1.0 / R);
    res.col_weights.assign(static_cast<std::size_t>(C), 1.0 / C);
    res.value = payoff[0][0];
    res.rounds = 0;
    return res;
  }

  // normalized payoff in [0,1]
  auto pay = [&](int j, int k) { return (payoff[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] - lo) / range; };

  std::vector<double> srow(static_cast<std::size_t>(R), 0.0), scol(static_cast<std::size_t>(C), 0.0);
  std::vector<double> last_row(static_cast<std::size_t>(R), 0.0), last_col(static_cast<std::size_t>(C), 0.0);
  std::vector<double> p(static_cast<std::size_t>(R)), q(static_cast<std::size_t>(C));
  std::vector<double> pbar(static_cast<std::size_t>(R), 0.0), qbar(static_cast<std::size_t>(C), 0.0);

  std::vector<double> best_p, best_q;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_value = 0.0;
  int rounds = 0;

  const double theta = 0.5 * std::sqrt(std::log(static_cast<double>(std::max(R, C)) + 1.0));

  auto certify = [&](const std::vector<double>& pw, const std::vector<double>& qw) {
    // upper: best pure row against qw; lower: best pure column against pw
    double upper = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < R; ++j) {
      double v = 0.0;
      for (int k = 0; k < C; ++k) v += pay(j, k) * qw[static_cast<std::size_t>(k)];
      upper = std::max(upper, v);
    }
    double lower = std::numeric_limits<double>::infinity();
    for (int k = 0; k < C; ++k) {
      double v = 0.0;
      for (int j = 0; j < R; ++j) v += pay(j, k) * pw[static_cast<std::size_t>(j)];
      lower = std::min(lower, v);
    }
    return std::pair<double, double>(lower, upper);
  };

  for (int t = 1; t <= max_rounds; ++t) {
    rounds = t;
    const double rate = theta / std::sqrt(static_cast<double>(t));
    // optimistic hedge: last round's payoff vector doubles as the predictor
    double zp = 0.0, zq = 0.0;
    for (int j = 0; j < R; ++j)
      zp += (p[static_cast<std::size_t>(j)] =
                 std::exp(rate * (srow[static_cast<std::size_t>(j)] + last_row[static_cast<std::size_t>(j)]) -
                          rate * (srow[0] + last_row[0])));
    for (int k = 0; k < C; ++k)
      zq += (q[static_cast<std::size_t>(k)] =
                 std::exp(-rate * (scol[static_cast<std::size_t>(k)] + last_col[static_cast<std::size_t>(k)]) +
                          rate * (scol[0] + last_col[0])));
    for (double& v : p) v /= zp;
    for (double& v : q) v /= zq;

    for (int j = 0; j < R; ++j) {
      double v = 0.0;
      for (int k = 0; k < C; ++k) v += pay(j, k) * q[static_cast<std::size_t>(k)];
      last_row[static_cast<std::size_t>(j)] = v;
      srow[static_cast<std::size_t>(j)] += v;
    }
    for (int k = 0; k < C; ++k) {
      double v = 0.0;
      for (int j = 0; j < R; ++j) v += pay(j, k) * p[static_cast<std::size_t>(j)];
      last_col[static_cast<std::size_t>(k)] = v;
      scol[static_cast<std::size_t>(k)] += v;
    }
    for (int j = 0; j < R; ++j)
      pbar[static_cast<std::size_t>(j)] += (p[static_cast<std::size_t>(j)] - pbar[static_cast<std::size_t>(j)]) / t;
    for (int k = 0; k < C; ++k)
      qbar[static_cast<std::size_t>(k)] += (q[static_cast<std::size_t>(k)] - qbar[static_cast<std::size_t>(k)]) / t;

    if (t % 8 == 0 || t == max_rounds) {
      // certify both the running averages and the last iterates
      const auto [lo_avg, up_avg] = certify(pbar, qbar);
      if (up_avg - lo_avg < best_gap) {
        best_gap = up_avg - lo_avg;
        best_p = pbar;
        best_q = qbar;
        best_value = 0.5 * (lo_avg + up_avg);
      }
      const auto [lo_last, up_last] = certify(p, q);
      if (up_last - lo_last < best_gap) {
        best_gap = up_last - lo_last;
        best_p = p;
        best_q = q;
        best_value = 0.5 * (lo_last + up_last);
      }
      if (best_gap * range <= gap_tol) break;
    }
  }

  res.row_weights = best_p;
  res.col_weights = best_q;
  res.value = lo + range * best_value;
  res.gap = best_gap * range;
  res.rounds = rounds;
  return res;
}

// ---------------------------------------------------------------------------
// double oracle over growing strategy sets
// ---------------------------------------------------------------------------

GameResult double_oracle(const BallSpec& ball, double lambda, const Field& y_d,
                         double eps0, const System& sys,
                         const DoubleOracleOptions& opts) {
  const SpatialGrid& g = *sys.grid;
  GameResult out;

  std::vector<ActuatorDensity> densities;
  std::vector<EtaStats> data;  // one per datum strategy

  densities.push_back(uniform_density(sys.grid, lambda));
  data.push_back(make_stats(zero_field(sys.grid), y_d, eps0, sys));  // anchor

  {
    InnerOptions iopts = opts.inner;
    iopts.seed = derive_seed(opts.inner.seed, 0xD0ULL);
    const InnerResult first =
        inner_minimize(densities[0], ball, y_d, eps0, sys, iopts, nullptr);
    if (norm(first.eta_hat) > 0.0)
      data.push_back(make_stats(first.eta_hat, y_d, eps0, sys));
  }

  double best_gap = std::numeric_limits<double>::infinity();
  const double add_tol = 1e-12;

  for (int round = 1; round <= opts.max_rounds; ++round) {
    out.rounds = round;

    // restricted game on the current strategy sets
    const int R = static_cast<int>(densities.size());
    const int C = static_cast<int>(data.size());
    std::vector<std::vector<double>> payoff(
        static_cast<std::size_t>(R), std::vector<double>(static_cast<std::size_t>(C)));
    for (int j = 0; j < R; ++j)
      for (int k = 0; k < C; ++k)
        payoff[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            payoff_from_stats(densities[static_cast<std::size_t>(j)],
                              data[static_cast<std::size_t>(k)]);
    const MatrixGameResult restricted = solve_matrix_game(payoff);

    // density best response to the datum mixture: bathtub on the mixed
    // energy field (computed from cached stats), exact over all densities
    std::vector<double> H(static_cast<std::size_t>(g.omega1_count()), 0.0);
    double mix_offset = 0.0;
    for (int k = 0; k < C; ++k) {
      const double w = restricted.col_weights[static_cast<std::size_t>(k)];
      if (w <= 0.0) continue;
      mix_offset += w * data[static_cast<std::size_t>(k)].offset;
      for (int i = 0; i < g.omega1_count(); ++i)
        H[static_cast<std::size_t>(i)] +=
            w * data[static_cast<std::size_t>(k)].energy_omega1[static_cast<std::size_t>(i)];
    }
    std::vector<double> half = H;
    for (double& v : half) v *= 0.5;
    const BathtubResult response = bathtub_maximize(sys.grid, half, lambda);
    double value_upper = mix_offset;
    for (int i = 0; i < g.omega1_count(); ++i)
      value_upper += 0.5 *
                     g.cell_widths[static_cast<std::size_t>(g.omega1_begin + i)] *
                     response.density.values[static_cast<std::size_t>(i)] *
                     H[static_cast<std::size_t>(i)];

    // datum best response at the weighted average density (exact by
    // affinity of the payoff in the density)
    std::vector<double> avg(static_cast<std::size_t>(g.omega1_count()), 0.0);
    for (int j = 0; j < R; ++j) {
      const double w = restricted.row_weights[static_cast<std::size_t>(j)];
      for (int i = 0; i < g.omega1_count(); ++i)
        avg[static_cast<std::size_t>(i)] +=
            w * densities[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(i)];
    }
    const ActuatorDensity beta_bar = project_density(sys.grid, lambda, avg);

    std::vector<Field> warm;
    for (int k = 0; k < C; ++k)
      if (restricted.col_weights[static_cast<std::size_t>(k)] > 1e-8 ||
          k + 1 == C)
        warm.push_back(data[static_cast<std::size_t>(k)].eta);
    InnerOptions iopts = opts.inner;
    iopts.seed = derive_seed(opts.inner.seed, static_cast<std::uint64_t>(round));
    const InnerResult inner =
        inner_minimize(beta_bar, ball, y_d, eps0, sys, iopts, &warm);
    // certificate: never report a lower value above the cached payoffs at
    // the average density, which keeps the weak-duality ordering exact
    double value_lower = inner.value;
    for (int k = 0; k < C; ++k)
      value_lower = std::min(
          value_lower, payoff_from_stats(beta_bar, data[static_cast<std::size_t>(k)]));

    out.round_bounds.emplace_back(value_lower, value_upper);
    const double gap = value_upper - value_lower;
    if (gap < best_gap) {
      best_gap = gap;
      out.value_lower = value_lower;
      out.value_upper = value_upper;
      out.mixture.atoms.clear();
      for (int k = 0; k < C; ++k)
        out.mixture.atoms.push_back(
            {restricted.col_weights[static_cast<std::size_t>(k)],
             data[static_cast<std::size_t>(k)].eta});
    }
    if (gap <= std::max(opts.tol_abs, opts.tol_rel * std::abs(value_lower))) break;

    // grow the strategy sets where the responses beat the restricted value
    bool grew = false;
    if (value_upper > restricted.value + add_tol) {
      densities.push_back(response.density);
      grew = true;
    }
    if (inner.value < restricted.value - add_tol) {
      bool duplicate = false;
      for (const auto& st : data)
        if (norm(st.eta - inner.eta_hat) <= 1e-12 * std::max(1.0, norm(st.eta))) {
          duplicate = true;
          break;
        }
      if (!duplicate) {
        data.push_back(make_stats(inner.eta_hat, y_d, eps0, sys));
        grew = true;
      }
    }
    if (!grew && round > 1) break;  // neither side can improve
  }

  // final extreme response and binary location from the mixture energy
  const BathtubResult final_response =
      best_response_density(out.mixture, lambda, sys);
  out.density = final_response.density;
  out.fractional_cells = final_response.fractional_cells;
  Field H_final = mixture_energy_field(out.mixture, sys);
  const LevelSetResult level =
      extract_level_set(sys.grid, omega1_slice(H_final), lambda);
  out.omega_mask = level.mask;
  out.level_threshold = level.threshold;
  out.level_rounding_mismatch = level.rounding_mismatch;
  out.gap = out.value_upper - out.value_lower;
  return out;
}

}  // namespace degctrl
