#include "hct/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hct {

namespace {

void check_labels(const Vector& logits, const Vector& labels) {
  require_same_size(labels.size(), logits.size(), "labels");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw DataError("label at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

std::vector<Eigen::Index> group_sizes(const std::vector<int>& groups, std::size_t group_count) {
  std::vector<Eigen::Index> counts(group_count, 0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const int g = groups[i];
    if (g < 0 || static_cast<std::size_t>(g) >= group_count) {
      throw DataError("group id " + std::to_string(g) + " at row " + std::to_string(i) +
                      " outside [0, " + std::to_string(group_count) + ")");
    }
    ++counts[static_cast<std::size_t>(g)];
  }
  for (std::size_t g = 0; g < group_count; ++g) {
    if (counts[g] == 0) throw DataError("group " + std::to_string(g) + " is empty in batch");
  }
  return counts;
}

}  // namespace

void FairnessSpec::validate() const {
  if (group_count < 2) throw std::invalid_argument("fairness constraints need >= 2 groups");
  if (!(bound > 0.0)) throw std::invalid_argument("fairness bound must be positive");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logits(const Vector& logits, const Vector& labels) {
  check_labels(logits, labels);
  if (logits.size() == 0) throw DataError("empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    // -y log s(z) - (1-y) log(1-s(z)) = max(z,0) - y z + log(1 + e^{-|z|})
    total += std::max(z, 0.0) - labels[i] * z + std::log1p(std::exp(-std::abs(z)));
  }
  return total / static_cast<double>(logits.size());
}

Vector bce_gradient(const Vector& logits, const Vector& labels) {
  check_labels(logits, labels);
  const double inv_b = 1.0 / static_cast<double>(logits.size());
  Vector grad(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    grad[i] = (sigmoid(logits[i]) - labels[i]) * inv_b;
  }
  return grad;
}

PositiveRates soft_positive_rates(const Vector& logits, const std::vector<int>& groups,
                                  std::size_t group_count) {
  require_same_size(static_cast<Eigen::Index>(groups.size()), logits.size(), "group ids");
  const auto counts = group_sizes(groups, group_count);
  PositiveRates rates;
  rates.per_group = Vector::Zero(static_cast<Eigen::Index>(group_count));
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double s = sigmoid(logits[i]);
    rates.overall += s;
    rates.per_group[groups[static_cast<std::size_t>(i)]] += s;
  }
  rates.overall /= static_cast<double>(logits.size());
  for (std::size_t g = 0; g < group_count; ++g) {
    rates.per_group[static_cast<Eigen::Index>(g)] /= static_cast<double>(counts[g]);
  }
  return rates;
}

Vector fairness_constraints(const Vector& logits, const std::vector<int>& groups,
                            const FairnessSpec& spec) {
  spec.validate();
  const auto rates = soft_positive_rates(logits, groups, spec.group_count);
  Vector values(static_cast<Eigen::Index>(spec.constraint_count()));
  for (Eigen::Index g = 0; g < rates.per_group.size(); ++g) {
    const double gap = rates.per_group[g] - rates.overall;
    values[2 * g] = gap - spec.bound;
    values[2 * g + 1] = -gap - spec.bound;
  }
  return values;
}

ConstraintSample fairness_constraint_sample(const NetworkSpec& net, const Vector& params,
                                            const GroupedBatch& batch, const FairnessSpec& spec,
                                            bool with_jacobian) {
  spec.validate();
  const auto pass = forward_pass(net, params, batch.features);
  ConstraintSample sample;
  sample.values = fairness_constraints(pass.logits, batch.groups, spec);
  if (!with_jacobian) return sample;

  const auto counts = group_sizes(batch.groups, spec.group_count);
  const Eigen::Index b = pass.logits.size();
  const double inv_b = 1.0 / static_cast<double>(b);
  Vector slope(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double s = sigmoid(pass.logits[i]);
    slope[i] = s * (1.0 - s);
  }

  const auto m = static_cast<Eigen::Index>(spec.constraint_count());
  sample.jacobian.resize(m, params.size());
  Vector upstream(b);
  for (std::size_t g = 0; g < spec.group_count; ++g) {
    const double inv_ng = 1.0 / static_cast<double>(counts[g]);
    for (Eigen::Index i = 0; i < b; ++i) {
      const bool member = batch.groups[static_cast<std::size_t>(i)] == static_cast<int>(g);
      upstream[i] = slope[i] * ((member ? inv_ng : 0.0) - inv_b);
    }
    const Vector row = backward(net, params, pass, upstream);
    const auto r = static_cast<Eigen::Index>(2 * g);
    sample.jacobian.row(r) = row.transpose();
    sample.jacobian.row(r + 1) = -row.transpose();
  }
  return sample;
}

Matrix fairness_constraint_gradients(const NetworkSpec& net, const Vector& params,
                                     const GroupedBatch& batch, const FairnessSpec& spec) {
  return fairness_constraint_sample(net, params, batch, spec, true).jacobian;
}

Vector bce_parameter_gradient(const NetworkSpec& net, const Vector& params,
                              const GroupedBatch& batch) {
  const auto pass = forward_pass(net, params, batch.features);
  return backward(net, params, pass, bce_gradient(pass.logits, batch.labels));
}

RateReport hard_positive_rate_report(const Vector& logits, const std::vector<int>& groups,
                                     std::size_t group_count) {
  require_same_size(static_cast<Eigen::Index>(groups.size()), logits.size(), "group ids");
  const auto counts = group_sizes(groups, group_count);
  RateReport report;
  report.per_group = Vector::Zero(static_cast<Eigen::Index>(group_count));
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (logits[i] > 0.0) {
      report.overall += 1.0;
      report.per_group[groups[static_cast<std::size_t>(i)]] += 1.0;
    }
  }
  report.overall /= static_cast<double>(logits.size());
  for (std::size_t g = 0; g < group_count; ++g) {
    report.per_group[static_cast<Eigen::Index>(g)] /= static_cast<double>(counts[g]);
  }
  report.gaps = (report.per_group.array() - report.overall).abs().matrix();
  return report;
}

}  // namespace hct
