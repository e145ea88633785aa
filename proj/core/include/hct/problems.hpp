#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "hct/objectives.hpp"
#include "hct/types.hpp"

namespace hct {

/// Closed-form constrained problem usable as a convergence oracle.
///
/// Noiseless oracles are exposed directly; the SampledProblem interface adds
/// i.i.d. Gaussian noise of std noise_std to every gradient entry and every
/// constraint value, drawn from a stream keyed by (noise_seed, sample id).
/// The constraint Jacobian is returned exactly.
class AnalyticProblem final : public SampledProblem {
 public:
  struct Oracles {
    std::function<double(const Vector&)> objective;
    std::function<Vector(const Vector&)> gradient;
    std::function<Vector(const Vector&)> constraints;
    std::function<Matrix(const Vector&)> jacobian;
  };

  AnalyticProblem(std::size_t dim, std::size_t m, Oracles oracles,
                  std::optional<Vector> known_solution, std::optional<Vector> known_multiplier,
                  double optimal_value, double noise_std, std::uint64_t noise_seed);

  std::size_t dimension() const override { return dim_; }
  std::size_t constraint_count() const override { return m_; }
  Vector objective_gradient(const Vector& x, std::uint64_t sample) const override;
  ConstraintSample constraints(const Vector& x, std::uint64_t sample,
                               bool with_jacobian) const override;

  double objective(const Vector& x) const { return oracles_.objective(x); }
  Vector gradient(const Vector& x) const { return oracles_.gradient(x); }
  Vector constraint_values(const Vector& x) const { return oracles_.constraints(x); }
  Matrix jacobian(const Vector& x) const { return oracles_.jacobian(x); }

  const std::optional<Vector>& known_solution() const { return known_solution_; }
  const std::optional<Vector>& known_multiplier() const { return known_multiplier_; }
  double optimal_value() const { return optimal_value_; }
  double noise_std() const { return noise_std_; }

 private:
  Vector noise(std::uint64_t sample, std::uint64_t stream, Eigen::Index size) const;

  std::size_t dim_;
  std::size_t m_;
  Oracles oracles_;
  std::optional<Vector> known_solution_;
  std::optional<Vector> known_multiplier_;
  double optimal_value_;
  double noise_std_;
  std::uint64_t noise_seed_;
};

/// min 1/2 ||x - x0||^2  s.t.  a.x - b <= 0. Solution: projection of x0 onto
/// the halfspace, multiplier max(a.x0 - b, 0) / ||a||^2.
AnalyticProblem make_qp_linear(const Vector& a, double b, const Vector& x0, double noise_std,
                               std::uint64_t noise_seed = 0);

/// n-dimensional instance with a = 1, b = 1 and the infeasible anchor x0 = 1.
AnalyticProblem make_qp_linear(std::size_t n, double noise_std, std::uint64_t noise_seed = 0);

/// min ||x||_1  s.t.  1 - sum(x) <= 0. Optimal value 1, attained at x = 1/n.
/// Subgradients use sign(0) = 0.
AnalyticProblem make_nonsmooth(std::size_t n, double noise_std, std::uint64_t noise_seed = 0);

struct KktResidual {
  double stationarity = 0.0;     // ||grad f + Jc^T y||
  double infeasibility = 0.0;    // ||max(c, 0)||
  double complementarity = 0.0;  // sum |y_i c_i|

  double max() const;
};

/// Evaluated with the noiseless oracles. Throws std::invalid_argument if any
/// multiplier is negative.
KktResidual kkt_residual(const AnalyticProblem& problem, const Vector& x, const Vector& y);

}  // namespace hct
