#pragma once

#include <cstdint>
#include <vector>

#include "hct/mlp.hpp"
#include "hct/types.hpp"

namespace hct {

enum class RateSurrogate { SoftRate };

/// Per-group positive-rate gap bound: |rate_g - rate_all| <= bound for every g.
struct FairnessSpec {
  std::size_t group_count = 2;
  double bound = 0.05;
  RateSurrogate surrogate = RateSurrogate::SoftRate;

  /// Two one-sided constraints per group.
  std::size_t constraint_count() const { return 2 * group_count; }
  void validate() const;
};

/// A minibatch with protected-group ids. Labels are stored as 0.0 / 1.0.
struct GroupedBatch {
  Matrix features;
  Vector labels;
  std::vector<int> groups;
  std::size_t group_count = 0;

  Eigen::Index size() const { return features.rows(); }
};

struct PositiveRates {
  double overall = 0.0;
  Vector per_group;
};

struct RateReport {
  double overall = 0.0;
  Vector per_group;
  Vector gaps;  // |rate_g - overall|
};

/// Constraint values c(x) (feasible iff every entry <= 0) and, optionally,
/// their Jacobian (one row per constraint entry).
struct ConstraintSample {
  Vector values;
  Matrix jacobian;
};

double sigmoid(double z);

/// Mean binary cross entropy on logits, evaluated in log-sum-exp form.
double bce_with_logits(const Vector& logits, const Vector& labels);

/// d(mean BCE)/d(logit_i) = (sigmoid(z_i) - y_i) / b.
Vector bce_gradient(const Vector& logits, const Vector& labels);

/// Mean sigmoid score per group and overall. Throws DataError if a group is absent.
PositiveRates soft_positive_rates(const Vector& logits, const std::vector<int>& groups,
                                  std::size_t group_count);

/// Entries 2g and 2g+1 are (rate_g - rate_all - c) and (rate_all - rate_g - c).
Vector fairness_constraints(const Vector& logits, const std::vector<int>& groups,
                            const FairnessSpec& spec);

/// Jacobian of fairness_constraints with respect to the network parameters,
/// shape (2 * group_count) x parameter_count.
Matrix fairness_constraint_gradients(const NetworkSpec& net, const Vector& params,
                                     const GroupedBatch& batch, const FairnessSpec& spec);

/// Values and Jacobian from a single forward pass.
ConstraintSample fairness_constraint_sample(const NetworkSpec& net, const Vector& params,
                                            const GroupedBatch& batch, const FairnessSpec& spec,
                                            bool with_jacobian);

/// Objective gradient of mean BCE on a batch with respect to network parameters.
Vector bce_parameter_gradient(const NetworkSpec& net, const Vector& params,
                              const GroupedBatch& batch);

/// Hard-threshold positive rates (prediction 1 iff logit > 0). Reporting only.
RateReport hard_positive_rate_report(const Vector& logits, const std::vector<int>& groups,
                                     std::size_t group_count);

/// A constrained problem min E[f(x, xi)] s.t. E[c(x, zeta)] <= 0 accessed only
/// through samples. A sample id selects a reproducible draw; two calls with
/// the same id see the same draw.
class SampledProblem {
 public:
  virtual ~SampledProblem() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t constraint_count() const = 0;

  /// Stochastic (sub)gradient of the objective.
  virtual Vector objective_gradient(const Vector& x, std::uint64_t sample) const = 0;

  /// Stochastic constraint values and, if requested, (sub)gradients.
  virtual ConstraintSample constraints(const Vector& x, std::uint64_t sample,
                                       bool with_jacobian) const = 0;
};

}  // namespace hct
