#include "hct/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hct {

namespace {

constexpr std::uint64_t kGradientStream = 1;
constexpr std::uint64_t kConstraintStream = 2;

}  // namespace

AnalyticProblem::AnalyticProblem(std::size_t dim, std::size_t m, Oracles oracles,
                                 std::optional<Vector> known_solution,
                                 std::optional<Vector> known_multiplier, double optimal_value,
                                 double noise_std, std::uint64_t noise_seed)
    : dim_(dim),
      m_(m),
      oracles_(std::move(oracles)),
      known_solution_(std::move(known_solution)),
      known_multiplier_(std::move(known_multiplier)),
      optimal_value_(optimal_value),
      noise_std_(noise_std),
      noise_seed_(noise_seed) {
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
}

Vector AnalyticProblem::noise(std::uint64_t sample, std::uint64_t stream,
                              Eigen::Index size) const {
  if (noise_std_ == 0.0) return Vector::Zero(size);
  std::mt19937_64 rng(mix_seed(mix_seed(noise_seed_, stream), sample));
  std::normal_distribution<double> dist(0.0, noise_std_);
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = dist(rng);
  return v;
}

Vector AnalyticProblem::objective_gradient(const Vector& x, std::uint64_t sample) const {
  require_same_size(x.size(), static_cast<Eigen::Index>(dim_), "problem point");
  return oracles_.gradient(x) + noise(sample, kGradientStream, x.size());
}

ConstraintSample AnalyticProblem::constraints(const Vector& x, std::uint64_t sample,
                                              bool with_jacobian) const {
  require_same_size(x.size(), static_cast<Eigen::Index>(dim_), "problem point");
  ConstraintSample out;
  out.values = oracles_.constraints(x) +
               noise(sample, kConstraintStream, static_cast<Eigen::Index>(m_));
  if (with_jacobian) out.jacobian = oracles_.jacobian(x);
  return out;
}

AnalyticProblem make_qp_linear(const Vector& a, double b, const Vector& x0, double noise_std,
                               std::uint64_t noise_seed) {
  require_same_size(x0.size(), a.size(), "QP anchor");
  const double a_sq = a.squaredNorm();
  if (!(a_sq > 0.0)) throw std::invalid_argument("constraint normal a must be nonzero");

  const double violation = a.dot(x0) - b;
  const double multiplier = std::max(violation, 0.0) / a_sq;
  Vector solution = x0 - multiplier * a;
  const double optimal = 0.5 * (solution - x0).squaredNorm();

  AnalyticProblem::Oracles oracles{
      [x0](const Vector& x) { return 0.5 * (x - x0).squaredNorm(); },
      [x0](const Vector& x) -> Vector { return x - x0; },
      [a, b](const Vector& x) -> Vector { return Vector::Constant(1, a.dot(x) - b); },
      [a](const Vector&) -> Matrix { return a.transpose(); },
  };
  return AnalyticProblem(static_cast<std::size_t>(a.size()), 1, std::move(oracles),
                         std::move(solution), Vector::Constant(1, multiplier), optimal,
                         noise_std, noise_seed);
}

AnalyticProblem make_qp_linear(std::size_t n, double noise_std, std::uint64_t noise_seed) {
  const auto dim = static_cast<Eigen::Index>(n);
  return make_qp_linear(Vector::Ones(dim), 1.0, Vector::Ones(dim), noise_std, noise_seed);
}

AnalyticProblem make_nonsmooth(std::size_t n, double noise_std, std::uint64_t noise_seed) {
  if (n == 0) throw std::invalid_argument("nonsmooth problem needs n >= 1");
  const auto dim = static_cast<Eigen::Index>(n);
  AnalyticProblem::Oracles oracles{
      [](const Vector& x) { return x.lpNorm<1>(); },
      [](const Vector& x) -> Vector {
        return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      },
      [](const Vector& x) -> Vector { return Vector::Constant(1, 1.0 - x.sum()); },
      [dim](const Vector&) -> Matrix { return Matrix::Constant(1, dim, -1.0); },
  };
  return AnalyticProblem(n, 1, std::move(oracles),
                         Vector::Constant(dim, 1.0 / static_cast<double>(n)),
                         Vector::Constant(1, 1.0), 1.0, noise_std, noise_seed);
}

double KktResidual::max() const {
  return std::max({stationarity, infeasibility, complementarity});
}

KktResidual kkt_residual(const AnalyticProblem& problem, const Vector& x, const Vector& y) {
  require_same_size(y.size(), static_cast<Eigen::Index>(problem.constraint_count()),
                    "multipliers");
  if ((y.array() < 0.0).any()) throw std::invalid_argument("inequality multipliers must be >= 0");
  const Vector c = problem.constraint_values(x);
  KktResidual r;
  r.stationarity = (problem.gradient(x) + problem.jacobian(x).transpose() * y).norm();
  r.infeasibility = c.cwiseMax(0.0).norm();
  r.complementarity = (y.array() * c.array()).abs().sum();
  return r;
}

}  // namespace hct
