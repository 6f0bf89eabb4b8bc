#include <cmath>

#include "doctest.h"
#include "pace/estimators.hpp"

using namespace pace;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x << v;
  return x;
}

/// h == 0: observations carry no information about q.
class ZeroModel final : public ForwardModel {
public:
  ZeroModel() : domain_(DesignDomain::unit_interval()) {}
  Index param_dim() const override { return 1; }
  Index obs_dim() const override { return 1; }
  Index design_dim() const override { return 1; }
  const DesignDomain& design_domain() const override { return domain_; }

protected:
  Vector evaluate_impl(const Vector&, const Vector&) const override {
    return Vector::Zero(1);
  }
  Matrix design_jacobian_impl(const Vector&, const Vector&) const override {
    return Matrix::Zero(1, 1);
  }

private:
  DesignDomain domain_;
};

/// h(q) = q: the observation determines q up to the noise.
class IdentityModel final : public ForwardModel {
public:
  IdentityModel() : domain_(DesignDomain::unit_interval()) {}
  Index param_dim() const override { return 1; }
  Index obs_dim() const override { return 1; }
  Index design_dim() const override { return 1; }
  const DesignDomain& design_domain() const override { return domain_; }

protected:
  Vector evaluate_impl(const Vector& q, const Vector&) const override { return q; }
  Matrix design_jacobian_impl(const Vector&, const Vector&) const override {
    return Matrix::Zero(1, 1);
  }

private:
  DesignDomain domain_;
};

constexpr double kTecv1d = 4.0 * 1e-4 / 4.0001; // sigma_q = 2, sigma_xi = 0.01, gain 1

} // namespace

TEST_CASE("closed form tECV values") {
  CHECK(closed_form_tecv_linear_gaussian(1.0, 2.0, 0.01, 1) ==
        doctest::Approx(9.99975e-5).epsilon(1e-6));
  CHECK(closed_form_tecv_linear_gaussian(1.0, 2.0, 0.01, 1) ==
        doctest::Approx(kTecv1d).epsilon(1e-12));
  // sigma_xi -> infinity recovers the prior variance
  CHECK(closed_form_tecv_linear_gaussian(1.0, 1.0, 1e9, 5) ==
        doctest::Approx(5.0).epsilon(1e-6));
  CHECK(closed_form_tecv_linear_gaussian(1.0, 1.0, 0.1, 10) ==
        doctest::Approx(10.0 * 0.01 / 1.01).epsilon(1e-12));
}

TEST_CASE("closed form tECV is monotone in gain and noise") {
  double prev = closed_form_tecv_linear_gaussian(0.1, 2.0, 0.01, 1);
  for (double gain = 0.2; gain <= 2.01; gain += 0.1) {
    const double cur = closed_form_tecv_linear_gaussian(gain, 2.0, 0.01, 1);
    CHECK(cur <= prev + 1e-18);
    prev = cur;
  }
  prev = closed_form_tecv_linear_gaussian(1.0, 2.0, 1e-4, 1);
  for (double sx = 2e-4; sx <= 1.0; sx *= 2.0) {
    const double cur = closed_form_tecv_linear_gaussian(1.0, 2.0, sx, 1);
    CHECK(cur >= prev - 1e-18);
    prev = cur;
  }
}

TEST_CASE("pace estimator converges to the closed form") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.01);
  RngStream rng(201, 0);
  const EstimatorReport r = pace_tecv(model, RegressorSpec::linear(), prior, noise,
                                      scalar(0.5), 50000, 50000, 1, rng);
  CHECK(r.tecv == doctest::Approx(kTecv1d).epsilon(0.05));
  CHECK(r.h_evals == 100000);
  CHECK(r.method == "pace-linear");
}

TEST_CASE("pace h-eval accounting matches the model counter") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.01);
  RngStream rng(202, 0);
  model.reset_counters();
  const EstimatorReport r = pace_tecv(model, RegressorSpec::linear(), prior, noise,
                                      scalar(0.5), 500, 400, 7, rng);
  CHECK(r.h_evals == 900);
  CHECK(model.eval_count() == 900);
}

TEST_CASE("uninformative model recovers the prior variance") {
  ZeroModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.5);
  RngStream rng(203, 0);
  const EstimatorReport r = pace_tecv(model, RegressorSpec::linear(), prior, noise,
                                      scalar(0.5), 20000, 20000, 1, rng);
  CHECK(r.tecv == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("noise-free identity model drives tECV to zero") {
  IdentityModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 1e-8);
  RngStream rng(204, 0);
  const EstimatorReport r = pace_tecv(model, RegressorSpec::linear(), prior, noise,
                                      scalar(0.5), 5000, 5000, 1, rng);
  CHECK(r.tecv < 1e-10);
}

TEST_CASE("importance sampling baseline agrees with the closed form in 1d") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.01);
  RngStream rng(205, 0);
  const EstimatorReport r = is_tecv(model, prior, noise, scalar(0.5), 1, 100000, rng);
  CHECK_FALSE(r.degenerate);
  CHECK(r.tecv == doctest::Approx(kTecv1d).epsilon(0.01));
  CHECK(r.h_evals == 100001);
}

TEST_CASE("importance sampling degenerates in high dimension") {
  VectorLinearModel model(20);
  PriorRv prior(GaussianRv::isotropic(20, 0.0, 1.0));
  GaussianRv noise = GaussianRv::isotropic(20, 0.0, 0.1);
  RngStream base(206, 0);
  Index flagged = 0;
  const Index reps = 20;
  for (Index rep = 0; rep < reps; ++rep) {
    RngStream rng = base.substream(rep);
    const EstimatorReport r = is_tecv(model, prior, noise, scalar(0.5), 10, 1000, rng);
    if (r.degenerate) ++flagged;
  }
  CHECK(flagged >= 19); // paper-scale inner budgets fail essentially always
}

TEST_CASE("is h-eval accounting matches the model counter") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.1);
  RngStream rng(207, 0);
  model.reset_counters();
  const EstimatorReport r = is_tecv(model, prior, noise, scalar(0.5), 7, 50, rng);
  CHECK(r.h_evals == (50 + 1) * 7);
  CHECK(model.eval_count() == (50 + 1) * 7);
}

TEST_CASE("law of total variance holds empirically") {
  // Var[Q] = E[Var[Q|Y]] + Var[E[Q|Y]] on the conjugate 1d model.
  RngStream rng(208, 0);
  const Index n = 100000;
  const double sq = 2.0, sxi = 0.01;
  Matrix q(n, 1), y(n, 1);
  for (Index i = 0; i < n; ++i) {
    q(i, 0) = sq * rng.normal();
    y(i, 0) = q(i, 0) + sxi * rng.normal();
  }
  const double slope = linear_ce_gain(1.0, sq, sxi);
  // E[Q | Y] = slope * y exactly for this model
  Vector ce = slope * y.col(0);
  const double var_q = empirical_variance(q)(0);
  Matrix ce_mat = ce;
  const double var_ce = empirical_variance(ce_mat)(0);
  const double ecv = closed_form_tecv_linear_gaussian(1.0, sq, sxi, 1);
  const double residual = var_q - var_ce - ecv;
  // standard error of the empirical variance of q dominates
  const double se = var_q * std::sqrt(2.0 / static_cast<double>(n));
  CHECK(std::abs(residual) < 3.0 * se);
}

TEST_CASE("pace estimate does not exceed the prior variance budget") {
  ZeroModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.5);
  RngStream base(209, 0);
  auto runner = [&](Index, RngStream& rng) {
    return pace_tecv(model, RegressorSpec::linear(), prior, noise, scalar(0.5), 2000,
                     2000, 1, rng);
  };
  const RepetitionSummary s = run_repetitions(runner, 4.0, 50, base);
  const double se = std::sqrt(s.variance / static_cast<double>(s.estimates.size()));
  CHECK(s.mean <= 4.0 + 3.0 * se + 0.05);
}

TEST_CASE("rel_mae of trivial runners") {
  auto exact = [](Index, RngStream&) {
    EstimatorReport r;
    r.tecv = 2.5;
    return r;
  };
  RngStream base(210, 0);
  CHECK(rel_mae(exact, 2.5, 10, base) == doctest::Approx(0.0));

  auto alternating = [](Index rep, RngStream&) {
    EstimatorReport r;
    r.tecv = (rep % 2 == 0) ? 2.5 * 1.25 : 2.5 * 0.75;
    return r;
  };
  CHECK(rel_mae(alternating, 2.5, 10, base) == doctest::Approx(0.25));
}

TEST_CASE("relMAE convergence rate has slope -1/2") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.01);
  const double reference = kTecv1d;
  RngStream base(211, 0);

  std::vector<double> log_n, log_err;
  for (Index n : {100, 1000, 10000}) {
    auto runner = [&, n](Index, RngStream& rng) {
      return pace_tecv(model, RegressorSpec::linear(), prior, noise, scalar(0.5), n, n,
                       1, rng);
    };
    const double err = rel_mae(runner, reference, 300, base.substream(n));
    log_n.push_back(std::log(static_cast<double>(n)));
    log_err.push_back(std::log(err));
    CHECK(err <= pace_theory_rel_mae(n, n));
  }
  const double slope = regression_slope(log_n, log_err);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("augmentation reduces estimator variance") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.01);
  RngStream base(212, 0);
  const auto table =
      variance_reduction_check(model, RegressorSpec::linear(), prior, noise, scalar(0.5),
                               100, 100, {1, 30}, 200, base);
  REQUIRE(table.size() == 2);
  CHECK(table[1].variance <= table[0].variance * 0.8);
}

TEST_CASE("augmentation with a=1 reproduces the crude estimator bitwise") {
  ScalarLinearModel model;
  PriorRv prior(GaussianRv::isotropic(1, 0.0, 2.0));
  GaussianRv noise = GaussianRv::isotropic(1, 0.0, 0.01);
  RngStream r1(213, 5), r2(213, 5);
  const EstimatorReport a = pace_tecv(model, RegressorSpec::linear(), prior, noise,
                                      scalar(0.5), 200, 200, 1, r1);
  const EstimatorReport b = pace_tecv(model, RegressorSpec::linear(), prior, noise,
                                      scalar(0.5), 200, 200, 1, r2);
  CHECK(a.tecv == b.tecv);
}
