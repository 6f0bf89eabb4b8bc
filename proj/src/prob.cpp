#include "pace/prob.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace pace {

GaussianRv::GaussianRv(Vector mean, Vector var)
    : mean_(std::move(mean)), var_(std::move(var)) {
  if (mean_.size() != var_.size())
    throw std::invalid_argument("GaussianRv: mean/var dimension mismatch");
  if (mean_.size() == 0) throw std::invalid_argument("GaussianRv: empty");
  if (!(var_.array() > 0.0).all())
    throw std::invalid_argument("GaussianRv: all variances must be > 0");
  std_ = var_.array().sqrt();
  log_norm_ = -0.5 * (var_.array() * 2.0 * kPi).log().sum();
}

GaussianRv GaussianRv::isotropic(Index n, double mean_value, double sigma) {
  return GaussianRv(Vector::Constant(n, mean_value),
                    Vector::Constant(n, sigma * sigma));
}

Matrix GaussianRv::sample(RngStream& rng, Index count) const {
  if (count < 1) throw std::invalid_argument("GaussianRv::sample: count must be >= 1");
  Matrix out(count, dim());
  for (Index i = 0; i < count; ++i)
    for (Index j = 0; j < dim(); ++j)
      out(i, j) = mean_(j) + std_(j) * rng.normal();
  return out;
}

Vector GaussianRv::sample_one(RngStream& rng) const {
  Vector x(dim());
  for (Index j = 0; j < dim(); ++j) x(j) = mean_(j) + std_(j) * rng.normal();
  return x;
}

double GaussianRv::log_density(const Vector& x) const {
  if (x.size() != dim())
    throw std::invalid_argument("GaussianRv::log_density: dimension mismatch");
  const double quad = ((x - mean_).array().square() / var_.array()).sum();
  return log_norm_ - 0.5 * quad;
}

UniformBoxRv::UniformBoxRv(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw std::invalid_argument("UniformBoxRv: bound dimension mismatch");
  if (lower_.size() == 0) throw std::invalid_argument("UniformBoxRv: empty");
  if (!(lower_.array() < upper_.array()).all())
    throw std::invalid_argument("UniformBoxRv: requires lower < upper elementwise");
}

Matrix UniformBoxRv::sample(RngStream& rng, Index count) const {
  if (count < 1) throw std::invalid_argument("UniformBoxRv::sample: count must be >= 1");
  Matrix out(count, dim());
  for (Index i = 0; i < count; ++i)
    for (Index j = 0; j < dim(); ++j)
      out(i, j) = rng.uniform(lower_(j), upper_(j));
  return out;
}

Vector UniformBoxRv::sample_one(RngStream& rng) const {
  Vector x(dim());
  for (Index j = 0; j < dim(); ++j) x(j) = rng.uniform(lower_(j), upper_(j));
  return x;
}

Vector UniformBoxRv::var() const {
  return (upper_ - lower_).array().square() / 12.0;
}

Index PriorRv::dim() const {
  return gaussian_ ? gaussian_->dim() : uniform_->dim();
}

Matrix PriorRv::sample(RngStream& rng, Index count) const {
  return gaussian_ ? gaussian_->sample(rng, count) : uniform_->sample(rng, count);
}

Vector PriorRv::sample_one(RngStream& rng) const {
  return gaussian_ ? gaussian_->sample_one(rng) : uniform_->sample_one(rng);
}

double PriorRv::total_variance() const {
  return gaussian_ ? gaussian_->var().sum() : uniform_->var().sum();
}

Vector empirical_variance(const Matrix& samples) {
  const Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("empirical_variance: needs >= 2 rows");
  const Vector mean = samples.colwise().mean();
  Vector ss = (samples.rowwise() - mean.transpose()).array().square().colwise().sum();
  return ss / static_cast<double>(n - 1);
}

Vector empirical_mean(const Matrix& samples) {
  if (samples.rows() < 1) throw std::invalid_argument("empirical_mean: empty");
  return samples.colwise().mean();
}

double log_sum_exp(const Vector& log_values) {
  if (log_values.size() == 0) throw std::invalid_argument("log_sum_exp: empty");
  const double m = log_values.maxCoeff();
  if (!std::isfinite(m)) return m; // all -inf (or a +inf/nan present)
  const double s = (log_values.array() - m).exp().sum();
  return m + std::log(s);
}

Vector normalize_log_weights(const Vector& log_weights) {
  const double lse = log_sum_exp(log_weights);
  return (log_weights.array() - lse).exp();
}

double effective_sample_size(const Vector& normalized_weights) {
  const double s2 = normalized_weights.array().square().sum();
  return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

} // namespace pace
