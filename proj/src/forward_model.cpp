#include "pace/forward_model.hpp"

#include <stdexcept>

namespace pace {

void ForwardModel::check_inputs(const Vector& q, const Vector& d) const {
  if (q.size() != param_dim())
    throw std::invalid_argument("ForwardModel: q dimension mismatch");
  if (d.size() != design_dim())
    throw std::invalid_argument("ForwardModel: d dimension mismatch");
  if (!design_domain().contains(d, 1e-9))
    throw std::domain_error("ForwardModel: design outside the design domain");
}

Vector ForwardModel::evaluate(const Vector& q, const Vector& d) const {
  check_inputs(q, d);
  eval_count_.fetch_add(1, std::memory_order_relaxed);
  return evaluate_impl(q, d);
}

Matrix ForwardModel::design_jacobian(const Vector& q, const Vector& d) const {
  check_inputs(q, d);
  jacobian_count_.fetch_add(1, std::memory_order_relaxed);
  return design_jacobian_impl(q, d);
}

Matrix ForwardModel::evaluate_batch(const Matrix& q_rows, const Vector& d) const {
  Matrix out(q_rows.rows(), obs_dim());
  for (Index i = 0; i < q_rows.rows(); ++i)
    out.row(i) = evaluate(q_rows.row(i).transpose(), d).transpose();
  return out;
}

Matrix ForwardModel::observe(const Vector& q, const Vector& d, const GaussianRv& noise,
                             RngStream& rng, Index a) const {
  if (a < 1) throw std::invalid_argument("ForwardModel::observe: a must be >= 1");
  if (noise.dim() != obs_dim())
    throw std::invalid_argument("ForwardModel::observe: noise dimension mismatch");
  const Vector h = evaluate(q, d);
  Matrix out(a, obs_dim());
  for (Index j = 0; j < a; ++j)
    out.row(j) = (h + noise.sample_one(rng)).transpose();
  return out;
}

ScalarLinearModel::ScalarLinearModel() : domain_(DesignDomain::unit_interval()) {}

Vector ScalarLinearModel::evaluate_impl(const Vector& q, const Vector& d) const {
  Vector y(1);
  y(0) = q(0) * gain(d(0));
  return y;
}

Matrix ScalarLinearModel::design_jacobian_impl(const Vector& q, const Vector& d) const {
  const double u = d(0) - 0.5;
  const double denom = u * u + 1.0;
  Matrix jac(1, 1);
  jac(0, 0) = -q(0) * 2.0 * u / (denom * denom);
  return jac;
}

VectorLinearModel::VectorLinearModel(Index n)
    : n_(n), domain_(DesignDomain::unit_interval()) {
  if (n < 1) throw std::invalid_argument("VectorLinearModel: n must be >= 1");
}

Vector VectorLinearModel::evaluate_impl(const Vector& q, const Vector& d) const {
  return q * ScalarLinearModel::gain(d(0));
}

Matrix VectorLinearModel::design_jacobian_impl(const Vector& q, const Vector& d) const {
  const double u = d(0) - 0.5;
  const double denom = u * u + 1.0;
  return q * (-2.0 * u / (denom * denom));
}

Matrix finite_difference_design_jacobian(const ForwardModel& model, const Vector& q,
                                         const Vector& d, double step) {
  Matrix jac(model.obs_dim(), model.design_dim());
  for (Index k = 0; k < model.design_dim(); ++k) {
    Vector dp = d, dm = d;
    dp(k) += step;
    dm(k) -= step;
    jac.col(k) = (model.evaluate(q, dp) - model.evaluate(q, dm)) / (2.0 * step);
  }
  return jac;
}

} // namespace pace
