#include <doctest.h>

#include "hct/problems.hpp"

using namespace hct;

TEST_CASE("qp closed form") {
  Vector a(2);
  a << 1.0, 1.0;
  const AnalyticProblem qp = make_qp_linear(a, 1.0, Vector::Ones(2), 0.0);
  REQUIRE(qp.known_solution());
  CHECK((*qp.known_solution() - Vector::Constant(2, 0.5)).norm() < 1e-15);
  CHECK((*qp.known_multiplier())[0] == doctest::Approx(0.5));
  CHECK(qp.optimal_value() == doctest::Approx(0.25));

  // x0 = (2, 0), a = (1, 0), b = 1: projection onto x_0 <= 1
  Vector a2(2), x0(2);
  a2 << 1.0, 0.0;
  x0 << 2.0, 0.0;
  const AnalyticProblem qp2 = make_qp_linear(a2, 1.0, x0, 0.0);
  CHECK((*qp2.known_solution())[0] == doctest::Approx(1.0));
  CHECK((*qp2.known_solution())[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(make_qp_linear(Vector::Zero(2), 1.0, x0, 0.0), std::invalid_argument);
}

TEST_CASE("kkt residual vanishes at the known solution") {
  const AnalyticProblem qp = make_qp_linear(10, 0.0);
  const KktResidual r = kkt_residual(qp, *qp.known_solution(), *qp.known_multiplier());
  CHECK(r.max() < 1e-12);
  const KktResidual off = kkt_residual(qp, Vector::Ones(10), Vector::Zero(1));
  CHECK(off.infeasibility == doctest::Approx(9.0));
  CHECK_THROWS_AS(kkt_residual(qp, Vector::Ones(10), Vector::Constant(1, -1.0)),
                  std::invalid_argument);

  const AnalyticProblem ns = make_nonsmooth(5, 0.0);
  CHECK(ns.objective(*ns.known_solution()) == doctest::Approx(1.0));
  CHECK(kkt_residual(ns, *ns.known_solution(), *ns.known_multiplier()).max() < 1e-12);
}

TEST_CASE("sampled noise is reproducible per sample id") {
  const AnalyticProblem qp = make_qp_linear(3, 0.01, 42);
  const Vector x = Vector::Zero(3);
  CHECK(qp.objective_gradient(x, 7) == qp.objective_gradient(x, 7));
  CHECK(qp.objective_gradient(x, 7) != qp.objective_gradient(x, 8));
  CHECK((qp.objective_gradient(x, 7) - qp.gradient(x)).norm() < 0.1);
  const ConstraintSample s = qp.constraints(x, 3, true);
  CHECK(s.jacobian == qp.jacobian(x));
  CHECK(qp.constraints(x, 3, false).jacobian.size() == 0);

  const AnalyticProblem exact = make_qp_linear(3, 0.0);
  CHECK(exact.objective_gradient(x, 7) == exact.gradient(x));
  CHECK_THROWS_AS(exact.objective_gradient(Vector::Zero(2), 0), DimensionError);
}

TEST_CASE("nonsmooth subgradient uses sign(0) = 0") {
  const AnalyticProblem ns = make_nonsmooth(3, 0.0);
  Vector x(3);
  x << -2.0, 0.0, 0.5;
  const Vector g = ns.gradient(x);
  CHECK(g[0] == -1.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 1.0);
  CHECK(ns.constraint_values(x)[0] == doctest::Approx(2.5));
}
