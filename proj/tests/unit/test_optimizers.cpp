#include <doctest.h>

#include <cmath>
#include <limits>

#include "hct/optimizers.hpp"
#include "hct/problems.hpp"

using namespace hct;

TEST_CASE("projection onto the nonnegative orthant") {
  Vector v(4);
  v << -1.0, 0.0, 2.5, -0.0;
  const Vector p = project_nonneg(v);
  CHECK(p[0] == 0.0);
  CHECK(p[2] == 2.5);
  CHECK((p.array() >= 0.0).all());

  // grid search over [0, 3]^2 for the nearest point to (-0.7, 1.3)
  Vector q(2);
  q << -0.7, 1.3;
  double best = std::numeric_limits<double>::infinity();
  Vector arg(2);
  for (int i = 0; i <= 300; ++i) {
    for (int j = 0; j <= 300; ++j) {
      Vector c(2);
      c << i * 0.01, j * 0.01;
      const double d = (c - q).squaredNorm();
      if (d < best) {
        best = d;
        arg = c;
      }
    }
  }
  CHECK((project_nonneg(q) - arg).norm() < 1e-9);
}

TEST_CASE("ssl-alm two iterations on a 2-d qp") {
  const AnalyticProblem qp = make_qp_linear(2, 0.0);
  SslAlmConfig cfg;
  SslAlmState st = ssl_alm_init(Vector::Ones(2), 1);
  CHECK(st.z.size() == 3);
  std::uint64_t sample = 0;

  st = ssl_alm_iterate(std::move(st), qp, sample, cfg);
  CHECK(sample == 3);
  CHECK(st.y[0] == doctest::Approx(0.1));
  CHECK(st.x[0] == doctest::Approx(0.945));
  CHECK(st.x[1] == doctest::Approx(0.945));
  CHECK(st.s[0] == 0.0);
  CHECK(st.z[0] == doctest::Approx(1.0));
  CHECK(st.z[2] == 0.0);

  st = ssl_alm_iterate(std::move(st), qp, sample, cfg);
  CHECK(st.y[0] == doctest::Approx(0.189));
  CHECK(st.x[0] == doctest::Approx(0.945 - 0.05 * 0.914));
  CHECK(st.z[0] == doctest::Approx(0.9725));
  CHECK(st.k == 2);
}

TEST_CASE("ssl-alm dual clamp and slack projection") {
  SslAlmConfig cfg;
  SslAlmState st = ssl_alm_init(Vector::Zero(1), 2);
  Vector r(2);
  r << 5000.0, -5000.0;
  st = ssl_alm_dual_step(std::move(st), r, cfg);
  CHECK(st.y[0] == 100.0);
  CHECK(st.y[1] == -100.0);

  Matrix jac = Matrix::Zero(2, 1);
  st = ssl_alm_primal_step(std::move(st), Vector::Zero(1), Vector::Constant(2, 1.0), jac, cfg);
  CHECK((st.s.array() >= 0.0).all());

  Vector bad = Vector::Constant(1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(ssl_alm_primal_step(st, bad, Vector::Zero(2), jac, cfg), NumericalError);
  SslAlmConfig neg;
  neg.tau = -1.0;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("ssl-alm z step uses the captured anchor") {
  SslAlmConfig cfg;
  SslAlmState st = ssl_alm_init(Vector::Zero(1), 1);
  Vector anchor(2);
  anchor << 4.0, 2.0;
  st = ssl_alm_z_step(std::move(st), anchor, cfg);
  CHECK(st.z[0] == doctest::Approx(2.0));
  CHECK(st.z[1] == doctest::Approx(1.0));
}

TEST_CASE("epsilon schedule") {
  CHECK(epsilon_schedule(0.1, 2) == doctest::Approx(0.07071067811865475).epsilon(1e-15));
  CHECK(epsilon_schedule(epsilon_schedule(0.1, 2), 3) ==
        doctest::Approx(0.040824829046386304).epsilon(1e-15));
  CHECK_THROWS_AS(epsilon_schedule(0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_schedule(0.0, 2), std::invalid_argument);

  // log form tracks the product past the point where eps underflows
  double log_eps = std::log(0.1);
  double eps = 0.1;
  for (std::uint64_t k = 2; k <= 50; ++k) {
    log_eps = log_epsilon_schedule(log_eps, k);
    eps = epsilon_schedule(eps, k);
  }
  CHECK(std::exp(log_eps) == doctest::Approx(eps).epsilon(1e-12));
  for (std::uint64_t k = 51; k <= 2000; ++k) log_eps = log_epsilon_schedule(log_eps, k);
  CHECK(std::isfinite(log_eps));
  CHECK(std::exp(log_eps) == 0.0);
}

TEST_CASE("switching branch and tolerance boundary") {
  SswConfig cfg;
  SswState st = ssw_init(Vector::Zero(1), cfg);
  CHECK(st.k == 1);
  CHECK(st.eps() == doctest::Approx(0.1));

  auto obj = [] { return Vector::Constant(1, 1.0); };
  auto con = [](std::size_t) { return Vector::Constant(1, -1.0); };

  // estimate exactly at the tolerance takes the objective branch
  SswEstimate at{st.eps(), 0};
  SswState a = ssw_step(st, at, obj, con, cfg);
  CHECK(a.last_branch == Branch::Objective);
  CHECK(a.x[0] == doctest::Approx(-0.01));
  CHECK(a.k == 2);
  CHECK(a.eps() == doctest::Approx(0.07071067811865475));

  SswEstimate above{std::nextafter(st.eps(), 1.0), 0};
  SswState b = ssw_step(st, above, obj, con, cfg);
  CHECK(b.last_branch == Branch::Constraint);
  CHECK(b.x[0] == doctest::Approx(0.01));

  CHECK(ssw_within_tolerance(-5.0, -1000.0));
  CHECK_FALSE(ssw_within_tolerance(1e-300, -1000.0));
}

TEST_CASE("constraint estimate averages then takes the max") {
  Vector a(3), b(3);
  a << 0.1, 0.3, -1.0;
  b << 0.5, 0.3, 0.0;
  const SswEstimate e = ssw_constraint_estimate({a, b});
  CHECK(e.value == doctest::Approx(0.3));
  CHECK(e.component == 0);  // tie between 0 and 1 goes to the lower index
  CHECK_THROWS_AS(ssw_constraint_estimate(std::vector<Vector>{}), std::invalid_argument);
}

TEST_CASE("ssw is plain subgradient descent when always feasible") {
  // min 1/2 (x - 3)^2 s.t. -100 <= 0
  AnalyticProblem::Oracles o{
      [](const Vector& x) { return 0.5 * (x[0] - 3.0) * (x[0] - 3.0); },
      [](const Vector& x) -> Vector { return Vector::Constant(1, x[0] - 3.0); },
      [](const Vector&) -> Vector { return Vector::Constant(1, -100.0); },
      [](const Vector&) -> Matrix { return Matrix::Zero(1, 1); },
  };
  const AnalyticProblem p(1, 1, o, std::nullopt, std::nullopt, 0.0, 0.0, 0);
  SswConfig cfg;
  cfg.eta_f = 0.1;
  SswState st = ssw_init(Vector::Zero(1), cfg);
  double x = 0.0;
  std::uint64_t sample = 0;
  for (int i = 0; i < 20; ++i) {
    ssw_iterate(st, p, sample, cfg);
    x -= 0.1 * (x - 3.0);
    CHECK(st.last_branch == Branch::Objective);
  }
  CHECK(st.x[0] == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("ssw on a 1-d constrained problem") {
  // min |x| s.t. 1 - x <= 0, solution x = 1
  const AnalyticProblem p = make_nonsmooth(1, 0.0);
  SswConfig cfg;
  SswState st = ssw_init(Vector::Zero(1), cfg);
  std::uint64_t sample = 0;
  for (int i = 0; i < 5000; ++i) ssw_iterate(st, p, sample, cfg);
  CHECK(st.x[0] == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("adam first step and bias correction") {
  AdamState st = adam_init(Vector::Ones(1));
  st = adam_step(std::move(st), Vector::Constant(1, 3.0));
  CHECK(st.x[0] == doctest::Approx(0.9990000000033333).epsilon(1e-15));
  CHECK(st.k == 1);
  CHECK(st.m1[0] == doctest::Approx(0.3));
  CHECK(st.m2[0] == doctest::Approx(0.009));

  // constant gradient: every bias-corrected step is close to lr
  for (int i = 0; i < 10; ++i) st = adam_step(std::move(st), Vector::Constant(1, 3.0));
  CHECK(st.x[0] == doctest::Approx(1.0 - 11e-3).epsilon(1e-9));
  CHECK_THROWS_AS(adam_step(st, Vector::Zero(2)), DimensionError);
}
