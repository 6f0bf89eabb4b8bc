#pragma once

#include <optional>

#include "pace/common.hpp"
#include "pace/rng.hpp"

namespace pace {

/// Gaussian with diagonal covariance. Every distribution used by the
/// estimators and benchmark problems is diagonal; full covariance is out of
/// scope.
class GaussianRv {
public:
  /// var holds the diagonal covariance entries; all must be > 0.
  GaussianRv(Vector mean, Vector var);

  /// Isotropic convenience: N(mean_value * 1_n, sigma^2 I_n).
  static GaussianRv isotropic(Index n, double mean_value, double sigma);

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Vector& var() const { return var_; }
  const Vector& stddev() const { return std_; }

  /// count x dim matrix of i.i.d. draws; deterministic given rng state.
  Matrix sample(RngStream& rng, Index count) const;

  /// Draw a single vector.
  Vector sample_one(RngStream& rng) const;

  /// Exact log density; finite for any finite x. Densities themselves are
  /// only ever exponentiated inside log-sum-exp reductions.
  double log_density(const Vector& x) const;

private:
  Vector mean_;
  Vector var_;
  Vector std_;
  double log_norm_; // -0.5 * sum(log(2 pi var_i))
};

/// Uniform distribution on an axis-aligned box, lower[i] < upper[i].
class UniformBoxRv {
public:
  UniformBoxRv(Vector lower, Vector upper);

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  Matrix sample(RngStream& rng, Index count) const;
  Vector sample_one(RngStream& rng) const;

  Vector mean() const { return 0.5 * (lower_ + upper_); }
  Vector var() const;

private:
  Vector lower_;
  Vector upper_;
};

/// Prior over the inferred quantity: either Gaussian or uniform box.
/// Kept as a small closed variant instead of a virtual hierarchy; the two
/// benchmark families need exactly these.
class PriorRv {
public:
  PriorRv(GaussianRv g) : gaussian_(std::move(g)) {} // NOLINT(google-explicit-constructor)
  PriorRv(UniformBoxRv u) : uniform_(std::move(u)) {} // NOLINT(google-explicit-constructor)

  Index dim() const;
  Matrix sample(RngStream& rng, Index count) const;
  Vector sample_one(RngStream& rng) const;
  /// Sum of per-component variances, Var-total of Q.
  double total_variance() const;

private:
  std::optional<GaussianRv> gaussian_;
  std::optional<UniformBoxRv> uniform_;
};

/// Unbiased per-column sample variance; requires >= 2 rows.
Vector empirical_variance(const Matrix& samples);

Vector empirical_mean(const Matrix& samples);

/// log(sum_i exp(x_i)) computed stably; -inf input rows are permitted.
double log_sum_exp(const Vector& log_values);

/// Normalized weights exp(x_i)/sum exp(x_j), computed in log space. Finite
/// for any finite inputs, no matter how small the maximum log weight is.
Vector normalize_log_weights(const Vector& log_weights);

/// Effective sample size 1 / sum(w_i^2) of normalized weights.
double effective_sample_size(const Vector& normalized_weights);

} // namespace pace
