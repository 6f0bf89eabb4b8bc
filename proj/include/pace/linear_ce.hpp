#pragma once

#include "pace/dataset.hpp"

namespace pace {

/// Affine conditional-expectation approximation f(y) = A y + b with
/// A = Cov[Q, Y] Cov[Y]^-1 and b = E[Q] - A E[Y].
struct LinearCe {
  Matrix A; // n x m
  Vector b; // n

  Vector predict(const Vector& y) const { return A * y + b; }
  Matrix predict_batch(const Matrix& y_rows) const {
    return (y_rows * A.transpose()).rowwise() + b.transpose();
  }
};

/// Fits the empirical affine CE from the (possibly augmented) dataset; each
/// (q_i, y_{i,j}) pair enters the empirical covariances with equal weight.
/// A near-singular empirical Cov[Y] is ridge-regularized with
/// eps = 1e-10 * trace(Cov[Y]) / m and a warning is emitted once.
LinearCe fit_linear(const PairedDataset& data);

/// Convenience overload on plain (q, y) sample matrices.
LinearCe fit_linear(const Matrix& q_rows, const Matrix& y_rows);

/// Closed-form slope of the conditional expectation for the scalar
/// conjugate Gaussian model y = g q + xi: A = g s_q^2 / (g^2 s_q^2 + s_xi^2).
double linear_ce_gain(double gain, double sigma_q, double sigma_xi);

} // namespace pace
