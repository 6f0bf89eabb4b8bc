#include <limits>

#include "doctest.h"
#include "pace/forward_model.hpp"

using namespace pace;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x << v;
  return x;
}

} // namespace

TEST_CASE("scalar linear model values") {
  ScalarLinearModel model;
  CHECK(model.evaluate(scalar(2.0), scalar(0.5))(0) == doctest::Approx(2.0));
  CHECK(model.evaluate(scalar(2.0), scalar(0.0))(0) == doctest::Approx(1.6));
  CHECK_THROWS_AS(model.evaluate(scalar(1.0), scalar(1.5)), std::domain_error);
}

TEST_CASE("scalar linear model design jacobian") {
  ScalarLinearModel model;
  CHECK(model.design_jacobian(scalar(2.0), scalar(0.5))(0, 0) == doctest::Approx(0.0));
  CHECK(model.design_jacobian(scalar(2.0), scalar(0.0))(0, 0) == doctest::Approx(1.28));
}

TEST_CASE("vector linear model applies one shared gain") {
  VectorLinearModel model(2);
  Vector q(2);
  q << 1.0, -1.0;
  const Vector y = model.evaluate(q, scalar(0.5));
  CHECK(y(0) == doctest::Approx(1.0));
  CHECK(y(1) == doctest::Approx(-1.0));
}

TEST_CASE("linearity in q is exact") {
  VectorLinearModel model(3);
  RngStream rng(5, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Vector q1(3), q2(3);
    for (int i = 0; i < 3; ++i) {
      q1(i) = rng.normal();
      q2(i) = rng.normal();
    }
    const double alpha = rng.uniform(-2.0, 2.0);
    const double beta = rng.uniform(-2.0, 2.0);
    const Vector d = scalar(rng.uniform());
    const Vector lhs = model.evaluate(alpha * q1 + beta * q2, d);
    const Vector rhs = alpha * model.evaluate(q1, d) + beta * model.evaluate(q2, d);
    // linear to the last ulp: only rounding of the reassociated products remains
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <=
          8.0 * std::numeric_limits<double>::epsilon() * rhs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("design jacobians match central finite differences") {
  ScalarLinearModel scalar_model;
  VectorLinearModel vector_model(4);
  RngStream rng(17, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector d = scalar(rng.uniform(0.01, 0.99));
    Vector q1 = scalar(rng.normal() * 2.0);
    const Matrix j1 = scalar_model.design_jacobian(q1, d);
    const Matrix fd1 = finite_difference_design_jacobian(scalar_model, q1, d, 1e-5);
    const double base1 = std::max(1e-12, fd1.cwiseAbs().maxCoeff());
    CHECK((j1 - fd1).cwiseAbs().maxCoeff() / base1 < 1e-4);

    Vector q4(4);
    for (int i = 0; i < 4; ++i) q4(i) = rng.normal();
    const Matrix j4 = vector_model.design_jacobian(q4, d);
    const Matrix fd4 = finite_difference_design_jacobian(vector_model, q4, d, 1e-5);
    const double base4 = std::max(1e-12, fd4.cwiseAbs().maxCoeff());
    CHECK((j4 - fd4).cwiseAbs().maxCoeff() / base4 < 1e-4);
  }
}

TEST_CASE("observe shares one forward evaluation across replicates") {
  ScalarLinearModel model;
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.1);
  RngStream rng(23, 0);
  model.reset_counters();

  const Matrix one = model.observe(scalar(1.0), scalar(0.2), noise, rng, 1);
  CHECK(one.rows() == 1);
  CHECK(model.eval_count() == 1);

  const Matrix many = model.observe(scalar(1.0), scalar(0.2), noise, rng, 30);
  CHECK(many.rows() == 30);
  CHECK(model.eval_count() == 2); // still one h evaluation for all 30 rows

  // rows differ only through the noise; their mean approaches h(q, d)
  RngStream rng2(29, 0);
  const Matrix big = model.observe(scalar(1.0), scalar(0.2), noise, rng2, 20000);
  const double h = model.evaluate(scalar(1.0), scalar(0.2))(0);
  CHECK(big.col(0).mean() == doctest::Approx(h).epsilon(0.01));
}

TEST_CASE("evaluation counters count every call") {
  VectorLinearModel model(2);
  model.reset_counters();
  Vector q(2);
  q << 0.3, -0.4;
  for (int i = 0; i < 7; ++i) model.evaluate(q, scalar(0.5));
  for (int i = 0; i < 3; ++i) model.design_jacobian(q, scalar(0.5));
  CHECK(model.eval_count() == 7);
  CHECK(model.jacobian_count() == 3);
}

TEST_CASE("design domain projection honors box and slab") {
  Vector lo = Vector::Constant(3, -1.0), hi = Vector::Constant(3, 1.0);
  LinearConstraint slab{Vector::Ones(3), 1.0};
  DesignDomain domain(lo, hi, slab);

  Vector inside(3);
  inside << 0.2, -0.3, 0.4;
  CHECK(domain.contains(inside));
  CHECK((domain.project(inside) - inside).cwiseAbs().maxCoeff() == 0.0);

  Vector outside(3);
  outside << 2.0, 2.0, 2.0;
  const Vector p = domain.project(outside);
  CHECK(domain.contains(p, 1e-9));
  CHECK(std::abs(p.sum()) <= 1.0 + 1e-9);
}
