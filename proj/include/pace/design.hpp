#pragma once

#include <optional>

#include "pace/common.hpp"

namespace pace {

/// One linear inequality |c.d| <= bound on top of the box; covers the
/// electrode-current budget constraint of the EIT problem.
struct LinearConstraint {
  Vector coeffs;
  double bound = 0.0;

  bool satisfied(const Vector& d, double tol = 0.0) const {
    return std::abs(coeffs.dot(d)) <= bound + tol;
  }
};

/// Design domain: axis-aligned box plus at most one symmetric linear
/// inequality constraint.
class DesignDomain {
public:
  DesignDomain(Vector lower, Vector upper,
               std::optional<LinearConstraint> linear = std::nullopt);

  static DesignDomain unit_interval();            // [0, 1]
  static DesignDomain symmetric_box(Index dim);   // [-1, 1]^dim

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::optional<LinearConstraint>& linear() const { return linear_; }

  bool contains(const Vector& d, double tol = 1e-12) const;

  /// Euclidean-ish projection onto the domain: box clipping alternated with
  /// projection onto the slab |c.d| <= bound. Always feasible for a box
  /// intersected with one symmetric slab that contains a box point.
  Vector project(const Vector& d) const;

private:
  Vector lower_;
  Vector upper_;
  std::optional<LinearConstraint> linear_;
};

} // namespace pace
