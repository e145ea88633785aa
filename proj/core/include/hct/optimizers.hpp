#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hct/objectives.hpp"
#include "hct/types.hpp"

namespace hct {

/// Componentwise max(v, 0): Euclidean projection onto the nonnegative orthant.
Vector project_nonneg(const Vector& v);

// ---------------------------------------------------------------------------
// Stochastic smoothed and linearized augmented Lagrangian (SSL-ALM)
//
// Inequalities c(x) <= 0 are rewritten as c(x) + s = 0 with slacks s >= 0,
// and the primal variable is the pair (x, s) in R^n x R^m_{>=0}. One
// iteration, with three independent samples xi, zeta1, zeta2:
//
//   y   <- clamp(y + eta * (c(x, zeta1) + s), [-M_y, M_y])
//   G   =  grad f(x, xi) + Jc^T y + rho * Jc^T (c(x, zeta2) + s) + mu * ((x, s) - z)
//   (x, s) <- proj((x, s) - tau * G)
//   z   <- z + beta * ((x_k, s_k) - z)
//
// where Jc is the Jacobian of c + s in (x, s) (identity on the slack block)
// evaluated on zeta1, and (x_k, s_k) is the point before the primal update.
// ---------------------------------------------------------------------------

struct SslAlmConfig {
  double rho = 1.0;
  double mu = 2.0;
  double tau = 0.05;
  double eta = 0.1;
  double beta = 0.5;
  double dual_bound = 100.0;

  void validate() const;
};

struct SslAlmState {
  Vector x;
  Vector s;
  Vector y;
  Vector z;  // anchor for (x, s); size n + m
  std::uint64_t k = 0;

  /// (x, s) stacked.
  Vector joint() const;
};

/// x0 with zero slacks, zero duals, and z = (x0, 0).
SslAlmState ssl_alm_init(const Vector& x0, std::size_t constraint_count);

/// residual is c(x, zeta1) + s at the current point.
SslAlmState ssl_alm_dual_step(SslAlmState state, const Vector& residual,
                              const SslAlmConfig& cfg);

/// constraint_values are raw c(x, zeta2) (slacks are added here); jacobian is
/// the m x n Jacobian of c on zeta1. Uses the current z and y.
SslAlmState ssl_alm_primal_step(SslAlmState state, const Vector& objective_grad,
                                const Vector& constraint_values, const Matrix& jacobian,
                                const SslAlmConfig& cfg);

/// z <- z + beta * (anchor - z), anchor being (x_k, s_k) captured before the
/// primal step of the same iteration.
SslAlmState ssl_alm_z_step(SslAlmState state, const Vector& anchor, const SslAlmConfig& cfg);

/// z step against the state's current (x, s).
SslAlmState ssl_alm_z_step(SslAlmState state, const SslAlmConfig& cfg);

/// One full iteration on a sampled problem. Consumes three sample ids
/// starting at next_sample and advances it.
SslAlmState ssl_alm_iterate(SslAlmState state, const SampledProblem& problem,
                            std::uint64_t& next_sample, const SslAlmConfig& cfg);

// ---------------------------------------------------------------------------
// Stochastic switching subgradient (SSw)
// ---------------------------------------------------------------------------

enum class Branch { Objective, Constraint };

struct SswConfig {
  double eta_f = 0.01;
  double eta_c = 0.01;
  double eps0 = 0.1;
  std::size_t constraint_samples = 1;  // J

  void validate() const;
};

/// The tolerance decays like eps0 / sqrt(k!) and leaves the double range
/// after a few hundred steps, so it is carried as a logarithm.
struct SswState {
  Vector x;
  std::uint64_t k = 1;
  double log_eps = 0.0;
  Branch last_branch = Branch::Objective;

  double eps() const;
};

struct SswEstimate {
  double value = 0.0;          // max over components of the mean constraint vector
  std::size_t component = 0;   // most violated component, lowest index on ties
};

SswState ssw_init(const Vector& x0, const SswConfig& cfg);

/// eps_prev / sqrt(k); k >= 2.
double epsilon_schedule(double eps_prev, std::uint64_t k);

/// log-domain form of epsilon_schedule.
double log_epsilon_schedule(double log_eps_prev, std::uint64_t k);

/// Averages J constraint samples and scalarizes by max.
SswEstimate ssw_constraint_estimate(const std::vector<Vector>& samples);

SswEstimate ssw_constraint_estimate(const Vector& x, std::size_t samples,
                                    const std::function<Vector(const Vector&, std::size_t)>& constraint_fn);

/// True iff the estimate is within tolerance (inclusive), i.e. the
/// objective branch is taken.
bool ssw_within_tolerance(double estimate, double log_eps);

/// If estimate <= eps_k step along -objective_subgrad(), else along
/// -constraint_subgrad(component). Then k advances and eps shrinks.
SswState ssw_step(SswState state, const SswEstimate& estimate,
                  const std::function<Vector()>& objective_subgrad,
                  const std::function<Vector(std::size_t)>& constraint_subgrad,
                  const SswConfig& cfg);

/// One full iteration on a sampled problem; returns the estimate used.
SswEstimate ssw_iterate(SswState& state, const SampledProblem& problem,
                        std::uint64_t& next_sample, const SswConfig& cfg);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  void validate() const;
};

struct AdamState {
  Vector x;
  Vector m1;
  Vector m2;
  std::uint64_t k = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

AdamState adam_init(const Vector& x0, const AdamConfig& cfg = {});

AdamState adam_step(AdamState state, const Vector& grad);

}  // namespace hct
