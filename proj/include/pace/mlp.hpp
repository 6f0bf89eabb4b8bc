#pragma once

#include <string>
#include <vector>

#include "pace/common.hpp"
#include "pace/rng.hpp"

namespace pace {

/// Adam state for one parameter block.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;

  void init(Index rows, Index cols) {
    m = Matrix::Zero(rows, cols);
    v = Matrix::Zero(rows, cols);
    step = 0;
  }
};

/// One Adam update; `step` must be advanced by the caller once per batch
/// across all blocks sharing the same clock.
void adam_update(Matrix& param, const Matrix& grad, AdamState& state, long step,
                 double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

struct TrainConfig {
  double learning_rate = 5e-4;
  Index batch_size = 100;
  Index max_epochs = 10000;
  /// Early stop after this many epochs without relative improvement of the
  /// held-out loss; 0 disables the split and early stopping entirely (the
  /// model then trains on all rows for exactly max_epochs).
  Index patience = 200;
  double min_rel_improvement = 1e-4;
  /// Held-out fraction for early stopping; 0.5 gives the 1:1 split.
  double test_fraction = 0.5;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct TrainResult {
  Index epochs_run = 0;
  Index best_epoch = 0;
  double best_test_loss = 0.0;  // equals final train loss when patience == 0
  double final_train_loss = 0.0;
};

/// Fully connected network with tanh hidden layers and affine input/output
/// calibration folded into the model, so predictions and Jacobians are exact
/// in original coordinates. Optionally a final centering layer constrains the
/// outputs to sum to zero.
class MlpCe {
public:
  MlpCe() = default;

  /// widths = {input, hidden..., output}; Glorot-uniform init, deterministic
  /// in seed.
  MlpCe(std::vector<Index> widths, std::uint64_t seed, bool center_output = false);

  Index input_dim() const { return widths_.empty() ? 0 : widths_.front(); }
  Index output_dim() const { return widths_.empty() ? 0 : widths_.back(); }
  const std::vector<Index>& widths() const { return widths_; }
  bool center_output() const { return center_output_; }

  Vector predict(const Vector& x) const;
  Matrix predict_batch(const Matrix& x_rows) const;

  /// Exact Jacobian d f / d x (output_dim x input_dim), original coordinates.
  Matrix input_jacobian(const Vector& x) const;

  /// Mean over rows of || t - f(x) ||_2^2 in original coordinates. This is
  /// the same functional the trainer minimizes and the estimators evaluate.
  double mean_squared_residual(const Matrix& x_rows, const Matrix& t_rows) const;

  /// Fit by Adam on the mean squared residual. Input/output calibration is
  /// computed from the data on the first call and kept fixed afterwards so
  /// that warm starts remain in a consistent coordinate frame.
  TrainResult train(const Matrix& x_rows, const Matrix& t_rows, const TrainConfig& cfg);

  /// Calibration constants. scale entries are >= a small floor.
  const Vector& input_shift() const { return in_shift_; }
  const Vector& input_scale() const { return in_scale_; }

  void save(const std::string& path) const;
  static MlpCe load(const std::string& path);
  std::string to_json() const;
  static MlpCe from_json(const std::string& text);

  /// Direct access for tests and for folding analytic structure.
  struct Layer {
    Matrix W;
    Vector b;
  };
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  void set_calibration(Vector in_shift, Vector in_scale, Vector out_shift, Vector out_scale);

private:
  // forward over columns; returns activations per layer (a[0] = standardized input)
  void forward_cached(const Matrix& x_cols, std::vector<Matrix>& acts) const;
  Matrix output_from_acts(const std::vector<Matrix>& acts) const;
  void ensure_calibrated(const Matrix& x_rows, const Matrix& t_rows);

  std::vector<Index> widths_;
  std::vector<Layer> layers_;
  bool center_output_ = false;
  bool calibrated_ = false;
  Vector in_shift_, in_scale_;   // x_std = (x - shift) / scale
  Vector out_shift_, out_scale_; // f = scale .* g + shift (then centering)
};

} // namespace pace
