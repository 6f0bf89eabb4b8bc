#include "pace/mlp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace pace {

void adam_update(Matrix& param, const Matrix& grad, AdamState& state, long step,
                 double lr, double beta1, double beta2, double eps) {
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  param.array() -=
      lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + eps);
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
  if (patience < 0) throw std::invalid_argument("TrainConfig: patience must be >= 0");
  if (patience > 0 && (test_fraction <= 0.0 || test_fraction >= 1.0))
    throw std::invalid_argument("TrainConfig: test_fraction must lie in (0, 1)");
  if (min_rel_improvement < 0.0)
    throw std::invalid_argument("TrainConfig: min_rel_improvement must be >= 0");
  if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 || adam_beta2 >= 1.0 ||
      adam_eps <= 0.0)
    throw std::invalid_argument("TrainConfig: bad Adam constants");
}

MlpCe::MlpCe(std::vector<Index> widths, std::uint64_t seed, bool center_output)
    : widths_(std::move(widths)), center_output_(center_output) {
  if (widths_.size() < 2) throw std::invalid_argument("MlpCe: needs at least two widths");
  for (Index w : widths_)
    if (w < 1) throw std::invalid_argument("MlpCe: widths must be >= 1");
  RngStream rng(seed, 0x6d6c70ULL);
  layers_.resize(widths_.size() - 1);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const Index fan_in = widths_[l];
    const Index fan_out = widths_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix W(fan_out, fan_in);
    for (Index i = 0; i < fan_out; ++i)
      for (Index j = 0; j < fan_in; ++j) W(i, j) = rng.uniform(-bound, bound);
    layers_[l].W = std::move(W);
    layers_[l].b = Vector::Zero(fan_out);
  }
  in_shift_ = Vector::Zero(input_dim());
  in_scale_ = Vector::Ones(input_dim());
  out_shift_ = Vector::Zero(output_dim());
  out_scale_ = Vector::Ones(output_dim());
}

void MlpCe::set_calibration(Vector in_shift, Vector in_scale, Vector out_shift,
                            Vector out_scale) {
  if (in_shift.size() != input_dim() || in_scale.size() != input_dim() ||
      out_shift.size() != output_dim() || out_scale.size() != output_dim())
    throw std::invalid_argument("MlpCe::set_calibration: dimension mismatch");
  if (!(in_scale.array() > 0.0).all() || !(out_scale.array() > 0.0).all())
    throw std::invalid_argument("MlpCe::set_calibration: scales must be > 0");
  in_shift_ = std::move(in_shift);
  in_scale_ = std::move(in_scale);
  out_shift_ = std::move(out_shift);
  out_scale_ = std::move(out_scale);
  calibrated_ = true;
}

void MlpCe::forward_cached(const Matrix& x_cols, std::vector<Matrix>& acts) const {
  const std::size_t L = layers_.size();
  acts.resize(L + 1);
  acts[0] = ((x_cols.colwise() - in_shift_).array().colwise() / in_scale_.array()).matrix();
  for (std::size_t l = 0; l < L; ++l) {
    Matrix z = (layers_[l].W * acts[l]).colwise() + layers_[l].b;
    if (l + 1 < L) z = z.array().tanh().matrix();
    acts[l + 1] = std::move(z);
  }
}

Matrix MlpCe::output_from_acts(const std::vector<Matrix>& acts) const {
  Matrix f = (acts.back().array().colwise() * out_scale_.array()).matrix().colwise() + out_shift_;
  if (center_output_) {
    const Eigen::RowVectorXd mu = f.colwise().mean();
    f.rowwise() -= mu;
  }
  return f;
}

Vector MlpCe::predict(const Vector& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("MlpCe::predict: dimension mismatch");
  std::vector<Matrix> acts;
  forward_cached(x, acts);
  return output_from_acts(acts).col(0);
}

Matrix MlpCe::predict_batch(const Matrix& x_rows) const {
  if (x_rows.cols() != input_dim())
    throw std::invalid_argument("MlpCe::predict_batch: dimension mismatch");
  std::vector<Matrix> acts;
  forward_cached(x_rows.transpose(), acts);
  return output_from_acts(acts).transpose();
}

Matrix MlpCe::input_jacobian(const Vector& x) const {
  std::vector<Matrix> acts;
  forward_cached(x, acts);
  const std::size_t L = layers_.size();
  Matrix J = layers_[L - 1].W;
  for (std::size_t l = L - 1; l > 0; --l) {
    const Vector deriv = 1.0 - acts[l].col(0).array().square(); // tanh'
    J = (J.array().rowwise() * deriv.transpose().array()).matrix() * layers_[l - 1].W;
  }
  J = (J.array().colwise() * out_scale_.array()).matrix();
  J = (J.array().rowwise() / in_scale_.transpose().array()).matrix();
  if (center_output_) {
    const Eigen::RowVectorXd mu = J.colwise().mean();
    J.rowwise() -= mu;
  }
  return J;
}

double MlpCe::mean_squared_residual(const Matrix& x_rows, const Matrix& t_rows) const {
  if (x_rows.rows() != t_rows.rows())
    throw std::invalid_argument("MlpCe::mean_squared_residual: row mismatch");
  const Matrix f = predict_batch(x_rows);
  return (t_rows - f).array().square().sum() / static_cast<double>(x_rows.rows());
}

void MlpCe::ensure_calibrated(const Matrix& x_rows, const Matrix& t_rows) {
  if (calibrated_) return;
  auto fit = [](const Matrix& rows, Vector& shift, Vector& scale) {
    shift = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - shift.transpose();
    Vector std = (centered.array().square().colwise().sum() /
                  static_cast<double>(std::max<Index>(rows.rows() - 1, 1)))
                     .sqrt();
    scale = std.unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });
  };
  fit(x_rows, in_shift_, in_scale_);
  fit(t_rows, out_shift_, out_scale_);
  calibrated_ = true;
}

TrainResult MlpCe::train(const Matrix& x_rows, const Matrix& t_rows, const TrainConfig& cfg) {
  cfg.validate();
  if (x_rows.rows() != t_rows.rows() || x_rows.rows() < 1)
    throw std::invalid_argument("MlpCe::train: bad dataset");
  if (x_rows.cols() != input_dim() || t_rows.cols() != output_dim())
    throw std::invalid_argument("MlpCe::train: dimension mismatch");

  RngStream rng(cfg.seed, 0x747261696eULL);

  // Optional held-out split for early stopping.
  const Index total = x_rows.rows();
  std::vector<Index> order = shuffled_indices(total, rng);
  Index n_test = 0;
  if (cfg.patience > 0) {
    n_test = static_cast<Index>(std::llround(cfg.test_fraction * static_cast<double>(total)));
    n_test = std::min(std::max<Index>(n_test, 1), total - 1);
  }
  const Index n_train = total - n_test;

  Matrix x_train(n_train, x_rows.cols()), t_train(n_train, t_rows.cols());
  Matrix x_test(n_test, x_rows.cols()), t_test(n_test, t_rows.cols());
  for (Index i = 0; i < n_train; ++i) {
    x_train.row(i) = x_rows.row(order[static_cast<std::size_t>(i)]);
    t_train.row(i) = t_rows.row(order[static_cast<std::size_t>(i)]);
  }
  for (Index i = 0; i < n_test; ++i) {
    x_test.row(i) = x_rows.row(order[static_cast<std::size_t>(n_train + i)]);
    t_test.row(i) = t_rows.row(order[static_cast<std::size_t>(n_train + i)]);
  }

  ensure_calibrated(x_train, t_train);

  // Standardized inputs, columns = samples.
  const Matrix x_cols =
      ((x_train.transpose().colwise() - in_shift_).array().colwise() / in_scale_.array())
          .matrix();
  const Matrix t_cols = t_train.transpose();

  const std::size_t L = layers_.size();
  std::vector<AdamState> st_w(L), st_b(L);
  for (std::size_t l = 0; l < L; ++l) {
    st_w[l].init(layers_[l].W.rows(), layers_[l].W.cols());
    st_b[l].init(layers_[l].b.size(), 1);
  }

  TrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  Index best_epoch = 0;
  std::vector<Layer> best_layers;
  long adam_step = 0;

  std::vector<Matrix> acts;
  const Index batch = std::min<Index>(cfg.batch_size, n_train);

  for (Index epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<Index> perm = shuffled_indices(n_train, rng);
    double epoch_loss = 0.0;
    for (Index start = 0; start < n_train; start += batch) {
      const Index bsz = std::min<Index>(batch, n_train - start);
      Matrix xb(x_cols.rows(), bsz), tb(t_cols.rows(), bsz);
      for (Index c = 0; c < bsz; ++c) {
        const Index src = perm[static_cast<std::size_t>(start + c)];
        xb.col(c) = x_cols.col(src);
        tb.col(c) = t_cols.col(src);
      }

      // forward (xb is already standardized; bypass input calibration)
      acts.resize(L + 1);
      acts[0] = xb;
      for (std::size_t l = 0; l < L; ++l) {
        Matrix z = (layers_[l].W * acts[l]).colwise() + layers_[l].b;
        if (l + 1 < L) z = z.array().tanh().matrix();
        acts[l + 1] = std::move(z);
      }
      Matrix f = (acts[L].array().colwise() * out_scale_.array()).matrix().colwise() + out_shift_;
      if (center_output_) {
        const Eigen::RowVectorXd mu = f.colwise().mean();
        f.rowwise() -= mu;
      }

      const Matrix resid = tb - f;
      const double loss = resid.array().square().sum() / static_cast<double>(bsz);
      if (!std::isfinite(loss))
        throw std::runtime_error("MlpCe::train: non-finite loss at epoch " +
                                 std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(bsz);

      // dL/df with L = (1/B) sum ||t - f||^2
      Matrix delta = (-2.0 / static_cast<double>(bsz)) * resid;
      if (center_output_) {
        const Eigen::RowVectorXd mu = delta.colwise().mean(); // C^T = C
        delta.rowwise() -= mu;
      }
      delta = (delta.array().colwise() * out_scale_.array()).matrix();

      ++adam_step;
      for (std::size_t l = L; l-- > 0;) {
        const Matrix grad_w = delta * acts[l].transpose();
        const Vector grad_b = delta.rowwise().sum();
        if (l > 0) {
          Matrix back = layers_[l].W.transpose() * delta;
          delta = (back.array() * (1.0 - acts[l].array().square())).matrix();
        }
        adam_update(layers_[l].W, grad_w, st_w[l], adam_step, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        Matrix b_as_mat = layers_[l].b;
        adam_update(b_as_mat, grad_b, st_b[l], adam_step, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        layers_[l].b = b_as_mat;
      }
    }
    result.epochs_run = epoch;
    result.final_train_loss = epoch_loss / static_cast<double>(n_train);

    if (cfg.patience > 0) {
      const double test_loss = mean_squared_residual(x_test, t_test);
      if (!std::isfinite(test_loss))
        throw std::runtime_error("MlpCe::train: non-finite held-out loss");
      if (test_loss < best_loss * (1.0 - cfg.min_rel_improvement) ||
          !std::isfinite(best_loss)) {
        best_loss = test_loss;
        best_epoch = epoch;
        best_layers = layers_;
      } else if (test_loss < best_loss) {
        // below best but not by the required margin: keep weights, no reset
        best_loss = test_loss;
        best_layers = layers_;
      }
      if (epoch - best_epoch >= cfg.patience) break;
    }
  }

  if (cfg.patience > 0 && !best_layers.empty()) {
    layers_ = std::move(best_layers);
    result.best_test_loss = best_loss;
    result.best_epoch = best_epoch;
  } else {
    result.best_test_loss = result.final_train_loss;
    result.best_epoch = result.epochs_run;
  }
  return result;
}

std::string MlpCe::to_json() const {
  nlohmann::json j;
  j["format"] = "pace-mlp-v1";
  j["activation"] = "tanh";
  j["widths"] = widths_;
  j["center_output"] = center_output_;
  j["calibrated"] = calibrated_;
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j["input_shift"] = vec(in_shift_);
  j["input_scale"] = vec(in_scale_);
  j["output_shift"] = vec(out_shift_);
  j["output_scale"] = vec(out_scale_);
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : layers_) {
    nlohmann::json jl;
    jl["rows"] = layer.W.rows();
    jl["cols"] = layer.W.cols();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.W.size()));
    for (Index i = 0; i < layer.W.rows(); ++i)
      for (Index k = 0; k < layer.W.cols(); ++k) w.push_back(layer.W(i, k));
    jl["W"] = std::move(w);
    jl["b"] = vec(layer.b);
    j["layers"].push_back(std::move(jl));
  }
  return j.dump();
}

MlpCe MlpCe::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format").get<std::string>() != "pace-mlp-v1")
    throw std::runtime_error("MlpCe::from_json: unknown checkpoint format");
  MlpCe net;
  net.widths_ = j.at("widths").get<std::vector<Index>>();
  net.center_output_ = j.at("center_output").get<bool>();
  net.calibrated_ = j.at("calibrated").get<bool>();
  auto vec = [](const nlohmann::json& arr) {
    const auto v = arr.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())).eval();
  };
  net.in_shift_ = vec(j.at("input_shift"));
  net.in_scale_ = vec(j.at("input_scale"));
  net.out_shift_ = vec(j.at("output_shift"));
  net.out_scale_ = vec(j.at("output_scale"));
  for (const auto& jl : j.at("layers")) {
    Layer layer;
    const Index rows = jl.at("rows").get<Index>();
    const Index cols = jl.at("cols").get<Index>();
    const auto w = jl.at("W").get<std::vector<double>>();
    if (static_cast<Index>(w.size()) != rows * cols)
      throw std::runtime_error("MlpCe::from_json: layer size mismatch");
    layer.W.resize(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index k = 0; k < cols; ++k)
        layer.W(i, k) = w[static_cast<std::size_t>(i * cols + k)];
    layer.b = vec(jl.at("b"));
    net.layers_.push_back(std::move(layer));
  }
  if (net.layers_.size() + 1 != net.widths_.size())
    throw std::runtime_error("MlpCe::from_json: layer count mismatch");
  return net;
}

void MlpCe::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("MlpCe::save: cannot open " + path);
  out << to_json();
  if (!out) throw std::runtime_error("MlpCe::save: write failed for " + path);
}

MlpCe MlpCe::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("MlpCe::load: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

} // namespace pace
