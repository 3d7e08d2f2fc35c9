#ifndef DEGCTRL_GAME_HPP
#define DEGCTRL_GAME_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "degctrl/density.hpp"
#include "degctrl/dual.hpp"
#include "degctrl/pde.hpp"

namespace degctrl {

/// Search ball for the adversarial terminal datum, sized from the empirical
/// observability constant so it provably contains every datum with
/// nonpositive payoff.
struct BallSpec {
  double radius = 0.0;        // admissible |eta|
  double obs_constant = 0.0;  // empirical observability constant
  Field yhat0;                // preimage certified to reach y_d within eps0/2
};

struct DiracAtom {
  double weight = 0.0;
  Field eta;
};

/// Finite convex combination of point masses on the dual ball: the
/// minimizing side's mixed strategy.
struct DiracMixture {
  std::vector<DiracAtom> atoms;

  /// weights nonnegative and summing to 1 within 1e-12; every atom inside
  /// radius*(1+1e-9).
  bool valid(double radius) const;
};

/// Worst-initial-state payoff of a location/datum pair:
///   0.5*<beta, E(eta)> - |phi(0;eta)| - <y_d, eta> + eps0*|eta|,
/// affine in the density (only the energy term touches it).
double game_payoff(const ActuatorDensity& beta, const Field& eta,
                   const Field& y_d, double eps0, const System& sys);

/// Subgradient of the payoff in eta. The two norm kinks are smoothed as
/// sqrt(|v|^2 + sigma^2) inside the gradient only; callers pass
/// sigma = 1e-9 * ball radius.
Field game_gradient(const ActuatorDensity& beta, const Field& eta,
                    const Field& y_d, double eps0, double kink_sigma,
                    const System& sys);

/// Tikhonov ladder for a state that reaches y_d within eps0/2 under the free
/// evolution: the multiplier decreases tenfold from 1 until the stepping
/// solver certifies the residual; throws std::runtime_error when the ladder
/// bottoms out below 1e-14 first.
Field find_reachable_preimage(const Field& y_d, double eps0, const System& sys);

/// Empirical constant for |phi(0;eta)|^2 <= C * <beta, E(eta)>: twice the
/// largest sampled ratio over random unit data and feasible densities,
/// including the adversarial density that minimizes the pairing for each
/// sampled datum. Throws std::runtime_error when every denominator
/// degenerates (control window misconfigured).
double estimate_observability_constant(double lambda, int n_samples,
                                       std::uint64_t seed, const System& sys);

/// Number of violations of the inequality with the given constant on fresh
/// samples (the held-out audit; adversarial densities included).
int observability_violations(double c_hat, double lambda, int n_samples,
                             std::uint64_t seed, const System& sys);

/// Ball radius from the empirical constant: C*(1+|yhat0|)^2/eps0.
double dual_ball_radius(double obs_constant, double eps0, const Field& yhat0);

/// Assembles the ball: preimage, constant, radius.
BallSpec make_ball(double lambda, const Field& y_d, double eps0, int n_samples,
                   std::uint64_t seed, const System& sys);

/// (2*lambda - sqrt(2*lambda)) / (2 - sqrt(2*lambda)), the guaranteed
/// fraction of the subregion where a feasible density reaches
/// sqrt(lambda/2); nonpositive (vacuous) for lambda <= 1/2.
double level_measure_fraction(double lambda);
double level_measure_bound(double lambda, const SpatialGrid& grid);

struct InnerOptions {
  int n_starts = 3;          // random starts beyond zero and warm starts
  int dual_starts = 2;       // starts from dual solves at slow-mode states
  int dc_max_iters = 15;     // convex-concave outer iterations
  double dc_tol = 1e-9;      // relative decrease cutoff
  double subproblem_tol = 1e-9;
  int subproblem_max_iters = 2000;
  std::uint64_t seed = 0x1AAE5ULL;
  int threads = 1;
};

struct InnerResult {
  Field eta_hat;
  double value = 0.0;
};

/// Best-found minimization of the payoff over the ball for a fixed density:
/// convex-concave descent (the concave norm term linearized at the current
/// iterate, the convex majorant solved by proximal gradient with the exact
/// radial prox of the norm-plus-ball term), over multiple starts. The value
/// never exceeds 0 because zero is always a candidate.
InnerResult inner_minimize(const ActuatorDensity& beta, const BallSpec& ball,
                           const Field& y_d, double eps0, const System& sys,
                           const InnerOptions& opts,
                           const std::vector<Field>* warm_starts = nullptr);

struct OuterOptions {
  int max_iters = 40;
  double step0_scale = 0.5;  // initial ascent step, relative to the mass
  InnerOptions inner;
};

struct OuterResult {
  ActuatorDensity density;
  double value = 0.0;  // best inner value reached (the sup-inf certificate)
  Field eta_at_best;
  std::vector<double> trace;  // inner value per iterate
};

/// Supergradient ascent over densities with diminishing steps and
/// best-iterate bookkeeping. Each round evaluates both the projected ascent
/// iterate and the extreme (bathtub) density of the current supergradient
/// and keeps whichever scores best.
OuterResult outer_maximize(const BallSpec& ball, double lambda,
                           const Field& y_d, double eps0,
                           const ActuatorDensity& init, const System& sys,
                           const OuterOptions& opts);

/// Pointwise mixture energy sum_k w_k E(eta_k) (exact for finite mixtures).
Field mixture_energy_field(const DiracMixture& h, const System& sys);

/// Extreme density maximizing the mixed payoff: bathtub on half the mixture
/// energy field.
BathtubResult best_response_density(const DiracMixture& h, double lambda,
                                    const System& sys);

struct MatrixGameResult {
  std::vector<double> row_weights;  // maximizing player
  std::vector<double> col_weights;  // minimizing player
  double value = 0.0;
  double gap = 0.0;  // certified primal-dual gap of the returned strategies
  int rounds = 0;
};

/// Finite zero-sum game solved by (optimistic) multiplicative-weights
/// self-play with anytime averaging; stops at the round cap or when the
/// certified gap drops below gap_tol.
MatrixGameResult solve_matrix_game(const std::vector<std::vector<double>>& payoff,
                                   int max_rounds = 10000,
                                   double gap_tol = 1e-6);

struct DoubleOracleOptions {
  double tol_rel = 0.05;  // on the gap, relative to |lower value|
  double tol_abs = 1e-6;
  int max_rounds = 40;
  InnerOptions inner;
};

struct GameResult {
  ActuatorDensity density;  // extreme best response to the final mixture
  DiracMixture mixture;
  double value_lower = 0.0;
  double value_upper = 0.0;
  double gap = 0.0;
  double level_threshold = 0.0;
  std::vector<std::uint8_t> omega_mask;  // binary location, subregion cells
  int fractional_cells = 0;
  int rounds = 0;
  double level_rounding_mismatch = 0.0;
  std::vector<std::pair<double, double>> round_bounds;  // (lower, upper)
};

/// Grows finite strategy sets by alternating best responses against the
/// restricted game's mixed strategies: the density side responds by bathtub
/// on the mixture energy (exact), the datum side by inner minimization at
/// the weighted average density (exact by affinity of the payoff in the
/// density). Terminates when the certified gap closes or rounds run out;
/// the binary location is the level set of the final mixture energy.
GameResult double_oracle(const BallSpec& ball, double lambda, const Field& y_d,
                         double eps0, const System& sys,
                         const DoubleOracleOptions& opts);

}  // namespace degctrl

#endif
