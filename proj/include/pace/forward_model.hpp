#pragma once

#include <atomic>
#include <memory>

#include "pace/design.hpp"
#include "pace/prob.hpp"

namespace pace {

/// Observational map y = h(q, d) with design Jacobian. Implementations are
/// immutable after construction; evaluate/design_jacobian may be called
/// concurrently. Evaluation counters are the cost metric every experiment is
/// accounted in, so they are part of the interface.
class ForwardModel {
public:
  virtual ~ForwardModel() = default;

  virtual Index param_dim() const = 0;   // n, dim of q
  virtual Index obs_dim() const = 0;     // m, dim of y
  virtual Index design_dim() const = 0;  // delta, dim of d
  virtual const DesignDomain& design_domain() const = 0;

  /// Noise-free observation h(q, d); throws if d is outside the domain.
  Vector evaluate(const Vector& q, const Vector& d) const;

  /// m x delta Jacobian of h w.r.t. d at (q, d).
  Matrix design_jacobian(const Vector& q, const Vector& d) const;

  /// Row-wise evaluation for a batch of parameter samples at one design.
  Matrix evaluate_batch(const Matrix& q_rows, const Vector& d) const;

  /// a noisy replicates of a single forward evaluation: rows are
  /// h(q, d) + xi_j. Counts exactly one h evaluation regardless of a.
  Matrix observe(const Vector& q, const Vector& d, const GaussianRv& noise,
                 RngStream& rng, Index a) const;

  std::uint64_t eval_count() const { return eval_count_.load(); }
  std::uint64_t jacobian_count() const { return jacobian_count_.load(); }
  void reset_counters() const { eval_count_ = 0; jacobian_count_ = 0; }

  /// True when the posterior variance does not depend on the realized
  /// observation (conjugate linear-Gaussian families). The importance
  /// sampling baseline may then use a single outer sample.
  virtual bool posterior_variance_observation_invariant() const { return false; }

protected:
  virtual Vector evaluate_impl(const Vector& q, const Vector& d) const = 0;
  virtual Matrix design_jacobian_impl(const Vector& q, const Vector& d) const = 0;
  void check_inputs(const Vector& q, const Vector& d) const;

private:
  mutable std::atomic<std::uint64_t> eval_count_{0};
  mutable std::atomic<std::uint64_t> jacobian_count_{0};
};

/// h(q, d) = q / ((d - 0.5)^2 + 1) on d in [0, 1], scalar q.
class ScalarLinearModel final : public ForwardModel {
public:
  ScalarLinearModel();
  Index param_dim() const override { return 1; }
  Index obs_dim() const override { return 1; }
  Index design_dim() const override { return 1; }
  const DesignDomain& design_domain() const override { return domain_; }
  bool posterior_variance_observation_invariant() const override { return true; }

  static double gain(double d) { return 1.0 / ((d - 0.5) * (d - 0.5) + 1.0); }

protected:
  Vector evaluate_impl(const Vector& q, const Vector& d) const override;
  Matrix design_jacobian_impl(const Vector& q, const Vector& d) const override;

private:
  DesignDomain domain_;
};

/// Elementwise h(q, d) = q / ((d - 0.5)^2 + 1) with a shared scalar design.
class VectorLinearModel final : public ForwardModel {
public:
  explicit VectorLinearModel(Index n);
  Index param_dim() const override { return n_; }
  Index obs_dim() const override { return n_; }
  Index design_dim() const override { return 1; }
  const DesignDomain& design_domain() const override { return domain_; }
  bool posterior_variance_observation_invariant() const override { return true; }

protected:
  Vector evaluate_impl(const Vector& q, const Vector& d) const override;
  Matrix design_jacobian_impl(const Vector& q, const Vector& d) const override;

private:
  Index n_;
  DesignDomain domain_;
};

/// Central finite-difference Jacobian of h w.r.t. d (test oracle; bypasses
/// no counters -- it calls evaluate).
Matrix finite_difference_design_jacobian(const ForwardModel& model, const Vector& q,
                                         const Vector& d, double step = 1e-5);

} // namespace pace
