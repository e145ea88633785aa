#include "hct/optimizers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hct {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string(what) + " has non-finite entries");
}

}  // namespace

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

// --- SSL-ALM ---------------------------------------------------------------

void SslAlmConfig::validate() const {
  require_positive(rho, "ssl_alm.rho");
  require_positive(mu, "ssl_alm.mu");
  require_positive(tau, "ssl_alm.tau");
  require_positive(beta, "ssl_alm.beta");
  if (beta > 1.0) throw std::invalid_argument("ssl_alm.beta must be <= 1");
  require_positive(beta, "ssl_alm.beta");
  require_positive(dual_bound, "ssl_alm.dual_bound");
}

Vector SslAlmState::joint() const {
  Vector xs(x.size() + s.size());
  xs << x, s;
  return xs;
}

SslAlmState ssl_alm_init(const Vector& x0, std::size_t constraint_count) {
  const auto m = static_cast<Eigen::Index>(constraint_count);
  SslAlmState state;
  state.x = x0;
  state.s = Vector::Zero(m);
  state.y = Vector::Zero(m);
  state.z = state.joint();
  return state;
}

SslAlmState ssl_alm_dual_step(SslAlmState state, const Vector& residual,
                              const SslAlmConfig& cfg) {
  require_same_size(residual.size(), state.y.size(), "dual residual");
  require_finite(residual, "dual residual");
  state.y = (state.y + cfg.eta * residual).cwiseMax(-cfg.dual_bound).cwiseMin(cfg.dual_bound);
  return state;
}

SslAlmState ssl_alm_primal_step(SslAlmState state, const Vector& objective_grad,
                                const Vector& constraint_values, const Matrix& jacobian,
                                const SslAlmConfig& cfg) {
  const Eigen::Index n = state.x.size();
  const Eigen::Index m = state.s.size();
  require_same_size(objective_grad.size(), n, "objective gradient");
  require_same_size(constraint_values.size(), m, "constraint values");
  require_same_size(state.z.size(), n + m, "smoothing anchor");
  if (jacobian.rows() != m || (m > 0 && jacobian.cols() != n)) {
    throw DimensionError("constraint Jacobian must be " + std::to_string(m) + " x " +
                         std::to_string(n));
  }

  const Vector residual = constraint_values + state.s;
  // Multiplier seen by both blocks: y + rho * (c + s).
  const Vector weight = state.y + cfg.rho * residual;

  Vector g_x = objective_grad + cfg.mu * (state.x - state.z.head(n));
  if (m > 0) g_x.noalias() += jacobian.transpose() * weight;
  const Vector g_s = weight + cfg.mu * (state.s - state.z.tail(m));
  require_finite(g_x, "primal step direction");
  require_finite(g_s, "slack step direction");

  state.x -= cfg.tau * g_x;
  state.s = project_nonneg(state.s - cfg.tau * g_s);
  ++state.k;
  return state;
}

SslAlmState ssl_alm_z_step(SslAlmState state, const Vector& anchor, const SslAlmConfig& cfg) {
  require_same_size(anchor.size(), state.z.size(), "smoothing anchor");
  state.z += cfg.beta * (anchor - state.z);
  return state;
}

SslAlmState ssl_alm_z_step(SslAlmState state, const SslAlmConfig& cfg) {
  const Vector anchor = state.joint();
  return ssl_alm_z_step(std::move(state), anchor, cfg);
}

SslAlmState ssl_alm_iterate(SslAlmState state, const SampledProblem& problem,
                            std::uint64_t& next_sample, const SslAlmConfig& cfg) {
  const std::uint64_t xi = next_sample++;
  const std::uint64_t zeta1 = next_sample++;
  const std::uint64_t zeta2 = next_sample++;

  const ConstraintSample linearization = problem.constraints(state.x, zeta1, true);
  const Vector value_sample = problem.constraints(state.x, zeta2, false).values;
  const Vector objective_grad = problem.objective_gradient(state.x, xi);

  state = ssl_alm_dual_step(std::move(state), linearization.values + state.s, cfg);
  const Vector anchor = state.joint();
  state = ssl_alm_primal_step(std::move(state), objective_grad, value_sample,
                              linearization.jacobian, cfg);
  return ssl_alm_z_step(std::move(state), anchor, cfg);
}

// --- Switching subgradient -------------------------------------------------

void SswConfig::validate() const {
  require_positive(eta_f, "ssw.eta_f");
  require_positive(eta_c, "ssw.eta_c");
  require_positive(eps0, "ssw.eps0");
  if (constraint_samples == 0) throw std::invalid_argument("ssw.samples must be >= 1");
}

double SswState::eps() const { return std::exp(log_eps); }

SswState ssw_init(const Vector& x0, const SswConfig& cfg) {
  cfg.validate();
  SswState state;
  state.x = x0;
  state.k = 1;
  state.log_eps = std::log(cfg.eps0);
  return state;
}

double epsilon_schedule(double eps_prev, std::uint64_t k) {
  if (k < 2) throw std::invalid_argument("epsilon schedule is defined for k >= 2");
  if (!(eps_prev > 0.0)) throw std::invalid_argument("previous tolerance must be positive");
  return eps_prev / std::sqrt(static_cast<double>(k));
}

double log_epsilon_schedule(double log_eps_prev, std::uint64_t k) {
  if (k < 2) throw std::invalid_argument("epsilon schedule is defined for k >= 2");
  return log_eps_prev - 0.5 * std::log(static_cast<double>(k));
}

SswEstimate ssw_constraint_estimate(const std::vector<Vector>& samples) {
  if (samples.empty()) throw std::invalid_argument("constraint estimate needs J >= 1 samples");
  Vector mean = Vector::Zero(samples.front().size());
  for (const auto& sample : samples) {
    require_same_size(sample.size(), mean.size(), "constraint sample");
    mean += sample;
  }
  mean /= static_cast<double>(samples.size());
  if (mean.size() == 0) throw DimensionError("constraint vector is empty");

  SswEstimate estimate;
  Eigen::Index arg = 0;
  estimate.value = mean.maxCoeff(&arg);  // first maximal index
  estimate.component = static_cast<std::size_t>(arg);
  return estimate;
}

SswEstimate ssw_constraint_estimate(
    const Vector& x, std::size_t samples,
    const std::function<Vector(const Vector&, std::size_t)>& constraint_fn) {
  if (samples == 0) throw std::invalid_argument("constraint estimate needs J >= 1 samples");
  std::vector<Vector> draws;
  draws.reserve(samples);
  for (std::size_t j = 0; j < samples; ++j) draws.push_back(constraint_fn(x, j));
  return ssw_constraint_estimate(draws);
}

bool ssw_within_tolerance(double estimate, double log_eps) {
  if (std::isnan(estimate)) throw NumericalError("constraint estimate is NaN");
  // exp underflows to 0 once the tolerance leaves the double range, which
  // leaves the comparison against 0 in place.
  return estimate <= std::exp(log_eps);
}

SswState ssw_step(SswState state, const SswEstimate& estimate,
                  const std::function<Vector()>& objective_subgrad,
                  const std::function<Vector(std::size_t)>& constraint_subgrad,
                  const SswConfig& cfg) {
  Vector direction;
  double step = 0.0;
  if (ssw_within_tolerance(estimate.value, state.log_eps)) {
    direction = objective_subgrad();
    step = cfg.eta_f;
    state.last_branch = Branch::Objective;
  } else {
    direction = constraint_subgrad(estimate.component);
    step = cfg.eta_c;
    state.last_branch = Branch::Constraint;
  }
  require_same_size(direction.size(), state.x.size(), "subgradient");
  require_finite(direction, "subgradient");

  // The feasible set is all of R^n, so the projection is the identity.
  state.x -= step * direction;
  ++state.k;
  state.log_eps = log_epsilon_schedule(state.log_eps, state.k);
  return state;
}

SswEstimate ssw_iterate(SswState& state, const SampledProblem& problem,
                        std::uint64_t& next_sample, const SswConfig& cfg) {
  std::vector<Vector> draws;
  draws.reserve(cfg.constraint_samples);
  for (std::size_t j = 0; j < cfg.constraint_samples; ++j) {
    draws.push_back(problem.constraints(state.x, next_sample++, false).values);
  }
  const SswEstimate estimate = ssw_constraint_estimate(draws);
  const std::uint64_t fresh = next_sample++;
  const Vector x = state.x;

  state = ssw_step(
      std::move(state), estimate,
      [&] { return problem.objective_gradient(x, fresh); },
      [&](std::size_t component) -> Vector {
        const auto sample = problem.constraints(x, fresh, true);
        return sample.jacobian.row(static_cast<Eigen::Index>(component)).transpose();
      },
      cfg);
  return estimate;
}

// --- Adam ------------------------------------------------------------------

void AdamConfig::validate() const {
  require_positive(lr, "adam.lr");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("adam.beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("adam.beta2 must be in [0, 1)");
  require_positive(eps_hat, "adam.eps");
}

AdamState adam_init(const Vector& x0, const AdamConfig& cfg) {
  cfg.validate();
  AdamState state;
  state.x = x0;
  state.m1 = Vector::Zero(x0.size());
  state.m2 = Vector::Zero(x0.size());
  state.lr = cfg.lr;
  state.beta1 = cfg.beta1;
  state.beta2 = cfg.beta2;
  state.eps_hat = cfg.eps_hat;
  return state;
}

AdamState adam_step(AdamState state, const Vector& grad) {
  require_same_size(grad.size(), state.x.size(), "Adam gradient");
  require_finite(grad, "Adam gradient");
  ++state.k;
  state.m1 = state.beta1 * state.m1 + (1.0 - state.beta1) * grad;
  state.m2 = state.beta2 * state.m2 + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double k = static_cast<double>(state.k);
  const double correction1 = 1.0 - std::pow(state.beta1, k);
  const double correction2 = 1.0 - std::pow(state.beta2, k);
  state.x.array() -= state.lr * (state.m1.array() / correction1) /
                     ((state.m2.array() / correction2).sqrt() + state.eps_hat);
  return state;
}

}  // namespace hct
