#pragma once

#include <optional>

#include "pace/forward_model.hpp"

namespace pace {

/// Paired samples {(q_i, d_i, y_{i,j})} with augmentation multiplier a.
/// y is stored as an (N*a) x m matrix in row blocks of a replicates per
/// parameter sample; y.row(i*a + j) = h(q_i, d_i) + xi_{i,j}. The forward map
/// is evaluated exactly once per row i regardless of a.
struct PairedDataset {
  Matrix q;                  // N x n
  std::optional<Matrix> d;   // N x delta, present for nonlocal (y, d) fits
  Matrix y;                  // (N*a) x m
  Index a = 1;

  Index size() const { return q.rows(); }
  Index augmented_size() const { return y.rows(); }

  /// Row (i, j) of the augmented set.
  Eigen::Ref<const Vector> y_at(Index i, Index j) const {
    return y.row(i * a + j).transpose();
  }

  /// View of the dataset restricted to rows [begin, end) of q.
  PairedDataset slice(Index begin, Index end) const;
};

/// Draws D_N at one fixed design: q_i ~ prior, y_{i,j} = h(q_i, d) + xi_{i,j}.
/// Costs exactly N evaluations of h.
PairedDataset sample_fixed_design_dataset(const ForwardModel& model, const PriorRv& prior,
                                          const GaussianRv& noise, const Vector& d,
                                          Index count, Index a, RngStream& rng);

/// Draws the nonlocal training set: d_i from the kernel (projected into the
/// design domain), q_i ~ prior, y_{i,j} = h(q_i, d_i) + xi_{i,j}.
PairedDataset sample_kernel_design_dataset(const ForwardModel& model, const PriorRv& prior,
                                           const GaussianRv& noise, const Vector& center,
                                           const Vector& kernel_std, Index count, Index a,
                                           RngStream& rng);

} // namespace pace
