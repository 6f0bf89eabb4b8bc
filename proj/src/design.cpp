#include "pace/design.hpp"

#include <stdexcept>

namespace pace {

DesignDomain::DesignDomain(Vector lower, Vector upper,
                           std::optional<LinearConstraint> linear)
    : lower_(std::move(lower)), upper_(std::move(upper)), linear_(std::move(linear)) {
  if (lower_.size() != upper_.size())
    throw std::invalid_argument("DesignDomain: bound dimension mismatch");
  if (!(lower_.array() <= upper_.array()).all())
    throw std::invalid_argument("DesignDomain: requires lower <= upper");
  if (linear_ && linear_->coeffs.size() != lower_.size())
    throw std::invalid_argument("DesignDomain: constraint dimension mismatch");
  if (linear_ && linear_->bound < 0.0)
    throw std::invalid_argument("DesignDomain: constraint bound must be >= 0");
}

DesignDomain DesignDomain::unit_interval() {
  return DesignDomain(Vector::Zero(1), Vector::Ones(1));
}

DesignDomain DesignDomain::symmetric_box(Index dim) {
  return DesignDomain(Vector::Constant(dim, -1.0), Vector::Constant(dim, 1.0));
}

bool DesignDomain::contains(const Vector& d, double tol) const {
  if (d.size() != dim()) return false;
  if ((d.array() < lower_.array() - tol).any()) return false;
  if ((d.array() > upper_.array() + tol).any()) return false;
  if (linear_ && !linear_->satisfied(d, tol)) return false;
  return true;
}

Vector DesignDomain::project(const Vector& d) const {
  if (d.size() != dim())
    throw std::invalid_argument("DesignDomain::project: dimension mismatch");
  Vector x = d.cwiseMax(lower_).cwiseMin(upper_);
  if (!linear_) return x;
  const Vector& c = linear_->coeffs;
  const double b = linear_->bound;
  const double c2 = c.squaredNorm();
  if (c2 == 0.0) return x;
  // Alternating projections box <-> slab; both sets are convex and intersect,
  // so the iteration converges. A handful of sweeps reaches solver precision.
  for (int it = 0; it < 64; ++it) {
    const double v = c.dot(x);
    if (std::abs(v) <= b + 1e-14) break;
    const double target = v > 0.0 ? b : -b;
    x += (target - v) / c2 * c;
    x = x.cwiseMax(lower_).cwiseMin(upper_);
  }
  return x;
}

} // namespace pace
