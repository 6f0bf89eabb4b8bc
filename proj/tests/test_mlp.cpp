#include <cmath>

#include "doctest.h"
#include "pace/linear_ce.hpp"
#include "pace/mlp.hpp"

using namespace pace;

namespace {

Matrix fd_input_jacobian(const MlpCe& net, const Vector& x, double step = 1e-5) {
  Matrix jac(net.output_dim(), net.input_dim());
  for (Index k = 0; k < net.input_dim(); ++k) {
    Vector xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    jac.col(k) = (net.predict(xp) - net.predict(xm)) / (2.0 * step);
  }
  return jac;
}

} // namespace

TEST_CASE("identical seeds give identical networks") {
  MlpCe a({4, 16, 16, 2}, 77);
  MlpCe b({4, 16, 16, 2}, 77);
  MlpCe c({4, 16, 16, 2}, 78);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_json() != c.to_json());
  CHECK(a.predict(Vector::Zero(4)).allFinite());
}

TEST_CASE("initialization produces non-degenerate outputs") {
  MlpCe net({5, 100, 100, 2}, 3);
  RngStream rng(4, 0);
  Matrix x(1000, 5);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < 5; ++j) x(i, j) = rng.normal();
  const Matrix f = net.predict_batch(x);
  for (Index k = 0; k < 2; ++k) {
    const double sd = std::sqrt((f.col(k).array() - f.col(k).mean()).square().mean());
    CHECK(sd > 0.1);
    CHECK(sd < 10.0);
  }
}

TEST_CASE("single linear layer exposes its weight matrix as jacobian") {
  MlpCe net({3, 2}, 11);
  const Matrix jac = net.input_jacobian(Vector::Zero(3));
  CHECK((jac - net.layers()[0].W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero weights give zero jacobian") {
  MlpCe net({3, 8, 2}, 1);
  for (auto& layer : net.layers()) {
    layer.W.setZero();
    layer.b.setZero();
  }
  CHECK(net.input_jacobian(Vector::Ones(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("input jacobian matches finite differences, calibrated coordinates") {
  MlpCe net({6, 20, 20, 3}, 5);
  Vector in_shift(6), in_scale(6), out_shift(3), out_scale(3);
  RngStream rng(6, 0);
  for (Index i = 0; i < 6; ++i) {
    in_shift(i) = rng.normal();
    in_scale(i) = 0.5 + rng.uniform();
  }
  for (Index i = 0; i < 3; ++i) {
    out_shift(i) = rng.normal();
    out_scale(i) = 0.5 + rng.uniform();
  }
  net.set_calibration(in_shift, in_scale, out_shift, out_scale);

  for (int rep = 0; rep < 50; ++rep) {
    Vector x(6);
    for (Index i = 0; i < 6; ++i) x(i) = 2.0 * rng.normal();
    const Matrix jac = net.input_jacobian(x);
    const Matrix fd = fd_input_jacobian(net, x);
    const double scale = std::max(1e-8, fd.cwiseAbs().maxCoeff());
    CHECK((jac - fd).cwiseAbs().maxCoeff() / scale < 1e-4);
  }
}

TEST_CASE("centered output sums to zero and so does its jacobian") {
  MlpCe net({4, 10, 5}, 9, /*center_output=*/true);
  RngStream rng(10, 0);
  Vector x(4);
  for (Index i = 0; i < 4; ++i) x(i) = rng.normal();
  CHECK(std::abs(net.predict(x).sum()) < 1e-12);
  CHECK(net.input_jacobian(x).colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  const Matrix fd = fd_input_jacobian(net, x);
  CHECK((net.input_jacobian(x) - fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("training reaches an exactly representable constant target") {
  RngStream rng(12, 0);
  const Index n = 400;
  Matrix x(n, 2), t(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    t(i, 0) = 3.25;
  }
  MlpCe net({2, 8, 1}, 13);
  TrainConfig cfg;
  cfg.learning_rate = 2e-2;
  cfg.max_epochs = 4000;
  cfg.patience = 500;
  cfg.seed = 14;
  const TrainResult res = net.train(x, t, cfg);
  CHECK(res.best_test_loss < 1e-6);
}

TEST_CASE("training is bitwise reproducible and a checkpoint round-trips") {
  RngStream rng(15, 0);
  const Index n = 300;
  Matrix x(n, 1), t(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-2.0, 2.0);
    t(i, 0) = std::sin(x(i, 0));
  }
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 20;
  cfg.seed = 99;

  MlpCe a({1, 12, 1}, 21);
  MlpCe b({1, 12, 1}, 21);
  a.train(x, t, cfg);
  b.train(x, t, cfg);
  CHECK(a.to_json() == b.to_json());

  const std::string path = "mlp_roundtrip_test.json";
  a.save(path);
  const MlpCe c = MlpCe::load(path);
  CHECK(c.to_json() == a.to_json());
  Vector probe(1);
  probe << 0.37;
  CHECK(c.predict(probe)(0) == a.predict(probe)(0));
  std::remove(path.c_str());
}

TEST_CASE("mlp matches the closed-form linear CE on conjugate data") {
  // y = q + xi, q ~ N(0, 4), xi ~ N(0, 1e-4): the exact CE is linear and its
  // MSE equals the closed-form tECV. The trained network must come within 5%.
  RngStream rng(16, 0);
  const double sq = 2.0, sxi = 0.01;
  auto draw = [&](Index n, Matrix& x, Matrix& t) {
    x.resize(n, 1);
    t.resize(n, 1);
    for (Index i = 0; i < n; ++i) {
      t(i, 0) = sq * rng.normal();
      x(i, 0) = t(i, 0) + sxi * rng.normal();
    }
  };
  Matrix x_train, t_train, x_eval, t_eval;
  draw(4000, x_train, t_train);
  draw(40000, x_eval, t_eval);

  MlpCe net({1, 16, 16, 1}, 31);
  TrainConfig cfg;
  cfg.max_epochs = 4000;
  cfg.patience = 200;
  cfg.seed = 32;
  net.train(x_train, t_train, cfg);

  const double mse_net = net.mean_squared_residual(x_eval, t_eval);
  const LinearCe ce = fit_linear(t_train, x_train);
  const double mse_lin =
      (t_eval - ce.predict_batch(x_eval)).array().square().sum() /
      static_cast<double>(x_eval.rows());
  CHECK(mse_net == doctest::Approx(mse_lin).epsilon(0.05));
}

TEST_CASE("nan loss aborts with a diagnostic") {
  Matrix x(4, 1), t(4, 1);
  x << 1.0, 2.0, 3.0, 4.0;
  t << 1.0, 1.0, 1.0, std::numeric_limits<double>::quiet_NaN();
  MlpCe net({1, 4, 1}, 3);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.patience = 0;
  cfg.batch_size = 4;
  CHECK_THROWS_AS(net.train(x, t, cfg), std::runtime_error);
}

TEST_CASE("warm starts converge several times faster after a design shift") {
  // Data at gains g1 (source task) and g2 (shifted task) of the conjugate
  // model; epochs-to-best for cold vs warm initialization, median of 10 seeds.
  const double sq = 2.0, sxi = 0.05;
  auto draw = [&](double gain, Index n, std::uint64_t seed, Matrix& x, Matrix& t) {
    RngStream rng(seed, 0);
    x.resize(n, 1);
    t.resize(n, 1);
    for (Index i = 0; i < n; ++i) {
      t(i, 0) = sq * rng.normal();
      x(i, 0) = gain * t(i, 0) + sxi * rng.normal();
    }
  };

  std::vector<double> cold_epochs, warm_epochs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix x1, t1, x2, t2;
    draw(1.0, 1500, 1000 + seed, x1, t1);
    draw(0.9, 1500, 2000 + seed, x2, t2); // small design shift changes the gain

    TrainConfig cfg;
    cfg.max_epochs = 2500;
    cfg.patience = 120;
    cfg.seed = 3000 + seed;

    MlpCe cold({1, 16, 16, 1}, 500 + seed);
    const TrainResult rc = cold.train(x2, t2, cfg);

    MlpCe warm({1, 16, 16, 1}, 500 + seed);
    warm.train(x1, t1, cfg);
    const TrainResult rw = warm.train(x2, t2, cfg);

    cold_epochs.push_back(static_cast<double>(rc.best_epoch));
    warm_epochs.push_back(static_cast<double>(rw.best_epoch));
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(median(warm_epochs) <= median(cold_epochs) / 5.0);
}
