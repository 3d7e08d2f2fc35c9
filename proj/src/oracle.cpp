#include "degctrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "degctrl/parallel.hpp"

namespace degctrl {

DenseControlOperator DenseControlOperator::build(const ActuatorDensity& beta,
                                                 const Field& y0,
                                                 const System& sys) {
  const int n = sys.grid->n;
  const int K = sys.tg.n_steps;
  const int kt = sys.tg.k_tau;
  const int n_ctrl = K - kt;
  if (n * n_ctrl > 4096)
    throw std::invalid_argument(
        "dense control operator: control space too large to materialize");

  DenseControlOperator op;
  op.grid = sys.grid;
  op.tg = sys.tg;
  op.K = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(n) * n_ctrl);

  std::vector<double> sqrt_beta(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < sys.grid->omega1_count(); ++i)
    sqrt_beta[static_cast<std::size_t>(sys.grid->omega1_begin + i)] =
        std::sqrt(beta.values[static_cast<std::size_t>(i)]);

  // powers of the one-step solve applied to the unit vectors: after m
  // applications column j holds S^m e_j; the control block for step s = K-m
  // is dt * S^(K-s) diag(sqrt(beta))
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (int m = 1; m <= n_ctrl; ++m) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = P(i, j);
      sys.stepper.solve_in_place(col.data());
      for (int i = 0; i < n; ++i) P(i, j) = col[static_cast<std::size_t>(i)];
    }
    const int s = K - m;  // control step whose block is dt * P * diag(sqrt_beta)
    for (int j = 0; j < n; ++j) {
      const double scale = sys.tg.dt * sqrt_beta[static_cast<std::size_t>(j)];
      for (int i = 0; i < n; ++i)
        op.K(i, static_cast<Eigen::Index>(s - kt) * n + j) = scale * P(i, j);
    }
  }

  const Field bfree = free_terminal(y0, sys);
  op.b = Eigen::Map<const Eigen::VectorXd>(bfree.values.data(), n);
  return op;
}

namespace {

struct RegularizedSolve {
  Eigen::VectorXd u;
  double residual = 0.0;  // quadrature norm of K u + b - y_d
  double unorm = 0.0;     // space-time quadrature norm of u
};

// minimizes |Ku + r|_W^2 + gamma |u|_Q^2 through the small dual system
// (K Q^-1 K^T W + gamma I) z = r, u = -Q^-1 K^T W z
RegularizedSolve solve_regularized(const DenseControlOperator& op,
                                   const Eigen::VectorXd& r, double gamma) {
  const int n = op.grid->n;
  const Eigen::Index ctrl_dim = op.K.cols();
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = op.grid->cell_widths[static_cast<std::size_t>(i)];
  const double dt = op.tg.dt;

  // Q = dt * blockdiag(W): control-space quadrature weights
  Eigen::VectorXd qinv(ctrl_dim);
  for (Eigen::Index c = 0; c < ctrl_dim; ++c)
    qinv(c) = 1.0 / (dt * w(static_cast<int>(c % n)));

  const Eigen::MatrixXd KQiKtW =
      op.K * qinv.asDiagonal() * op.K.transpose() * w.asDiagonal();
  Eigen::MatrixXd A = KQiKtW;
  A.diagonal().array() += gamma;
  const Eigen::VectorXd z = A.partialPivLu().solve(r);

  RegularizedSolve out;
  out.u = -(qinv.asDiagonal() * (op.K.transpose() * (w.asDiagonal() * z)));
  const Eigen::VectorXd resid = op.K * out.u + r;
  out.residual = std::sqrt(resid.dot(w.asDiagonal() * resid));
  double un = 0.0;
  for (Eigen::Index c = 0; c < ctrl_dim; ++c) un += out.u(c) * out.u(c) / qinv(c);
  out.unorm = std::sqrt(un);
  return out;
}

}  // namespace

std::vector<std::pair<double, double>> oracle_min_norm_trace(
    const ActuatorDensity& beta, const Field& y0, const Field& y_d,
    double eps0, const System& sys) {
  std::vector<std::pair<double, double>> trace;
  const DenseControlOperator op = DenseControlOperator::build(beta, y0, sys);
  const int n = sys.grid->n;
  Eigen::VectorXd r = op.b - Eigen::Map<const Eigen::VectorXd>(y_d.values.data(), n);
  double lo = 1e-14, hi = 1e14;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const RegularizedSolve s = solve_regularized(op, r, mid);
    trace.emplace_back(mid, s.residual);
    if (s.residual > eps0)
      hi = mid;
    else if (s.residual < eps0 * (1.0 - 1e-8))
      lo = mid;
    else
      break;
  }
  return trace;
}

double oracle_min_norm(const ActuatorDensity& beta, const Field& y0,
                       const Field& y_d, double eps0, const System& sys) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("oracle: eps0 must be positive");
  const Field bfree = free_terminal(y0, sys);
  if (norm(bfree - y_d) <= eps0) return 0.0;

  const DenseControlOperator op = DenseControlOperator::build(beta, y0, sys);
  const int n = sys.grid->n;
  Eigen::VectorXd r = op.b - Eigen::Map<const Eigen::VectorXd>(y_d.values.data(), n);

  double lo = 1e-14, hi = 1e14;
  const RegularizedSolve at_lo = solve_regularized(op, r, lo);
  if (at_lo.residual > eps0)
    throw std::runtime_error(
        "oracle: residual floor above eps0; target unreachable at this resolution");
  RegularizedSolve best = at_lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const RegularizedSolve s = solve_regularized(op, r, mid);
    if (s.residual > eps0) {
      hi = mid;
    } else {
      best = s;
      if (s.residual >= eps0 * (1.0 - 1e-8)) break;
      lo = mid;
    }
  }
  return best.unorm;
}

Field fd_gradient(const std::function<double(const Field&)>& f,
                  const Field& eta, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd gradient: step must be positive");
  Field grad(eta.grid);
  Field probe = eta;
  for (int i = 0; i < eta.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe);
    probe[i] = orig - step;
    const double fm = f(probe);
    probe[i] = orig;
    grad[i] = (fp - fm) /
              (2.0 * step * eta.grid->cell_widths[static_cast<std::size_t>(i)]);
  }
  return grad;
}

namespace {

std::uint64_t binomial(int m, int k) {
  if (k < 0 || k > m) return 0;
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * static_cast<std::uint64_t>(m - i) / static_cast<std::uint64_t>(i + 1);
  return r;
}

}  // namespace

ActuatorEnumResult oracle_best_actuator(int k_cells, const BallSpec& ball,
                                        const Field& y_d, double eps0,
                                        const System& sys,
                                        const InnerOptions& inner, int threads,
                                        const std::vector<Field>* y0_set) {
  const int m = sys.grid->omega1_count();
  if (k_cells < 1 || k_cells >= m)
    throw std::invalid_argument("enumeration: k must lie in [1, subregion size)");
  if (binomial(m, k_cells) > 100000ULL)
    throw std::invalid_argument("enumeration: combinatorial budget exceeded");

  ActuatorEnumResult out;
  std::vector<int> comb(static_cast<std::size_t>(k_cells));
  for (int i = 0; i < k_cells; ++i) comb[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.masks.push_back(comb);
    int i = k_cells - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == m - k_cells + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k_cells; ++j)
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }

  out.values.assign(out.masks.size(), 0.0);
  parallel_for(static_cast<int>(out.masks.size()), threads, [&](int idx) {
    const ActuatorDensity beta =
        mask_density(sys.grid, out.masks[static_cast<std::size_t>(idx)]);
    if (y0_set && !y0_set->empty()) {
      // provided-initial-states mode: score by the worst dual value
      double worst = 0.0;
      for (const auto& y0 : *y0_set) {
        const DualSolveReport rep = minimize_dual(beta, y0, y_d, eps0, sys);
        worst = std::min(worst, rep.V);
      }
      out.values[static_cast<std::size_t>(idx)] = worst;
    } else {
      InnerOptions iopts = inner;
      iopts.seed = derive_seed(inner.seed, static_cast<std::uint64_t>(idx));
      out.values[static_cast<std::size_t>(idx)] =
          inner_minimize(beta, ball, y_d, eps0, sys, iopts, nullptr).value;
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.values.size(); ++i)
    if (out.values[i] > out.values[best]) best = i;
  out.best_cells = out.masks[best];
  out.best_value = out.values[best];
  return out;
}

double lowrank_inner_oracle(const ActuatorDensity& beta, const BallSpec& ball,
                            const Field& y_d, double eps0, int rank,
                            int net_points, const System& sys) {
  if (rank < 1 || rank > 3)
    throw std::invalid_argument("low-rank oracle: rank must lie in [1,3]");
  const int n = sys.grid->n;

  // dense Gramian and its leading eigenvectors (quadrature-orthonormalized)
  Gramian gram(sys, beta);
  Eigen::MatrixXd G(n, n);
  {
    std::vector<double> e(static_cast<std::size_t>(n), 0.0), col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      e[static_cast<std::size_t>(j)] = 1.0;
      gram.apply(e.data(), col.data());
      e[static_cast<std::size_t>(j)] = 0.0;
      for (int i = 0; i < n; ++i) G(i, j) = col[static_cast<std::size_t>(i)];
    }
  }
  G = 0.5 * (G + G.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);

  std::vector<Field> basis;
  for (int r = 0; r < rank; ++r) {
    Eigen::VectorXd v = es.eigenvectors().col(n - 1 - r);
    Field f(sys.grid, std::vector<double>(v.data(), v.data() + n));
    const double nf = norm(f);
    if (nf <= 0.0) continue;
    for (double& x : f.values) x /= nf;
    basis.push_back(f);
  }

  const double R = ball.radius;
  double best = 0.0;  // zero datum anchors the search
  std::vector<int> idx(static_cast<std::size_t>(basis.size()), 0);
  const int npts = std::max(net_points, 2);
  for (;;) {
    Field eta = zero_field(sys.grid);
    double c2 = 0.0;
    for (std::size_t r = 0; r < basis.size(); ++r) {
      const double c = -R + 2.0 * R * idx[r] / (npts - 1);
      c2 += c * c;
      axpy(c, basis[r], eta);
    }
    if (c2 <= R * R) {
      const double v = game_payoff(beta, eta, y_d, eps0, sys);
      best = std::min(best, v);
    }
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == npts) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }
  return best;
}

}  // namespace degctrl
