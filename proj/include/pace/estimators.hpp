#pragma once

#include <functional>
#include <string>

#include "pace/dataset.hpp"
#include "pace/linear_ce.hpp"
#include "pace/mlp.hpp"

namespace pace {

/// Point estimate of the total expected conditional variance plus the
/// bookkeeping every experiment is reported in.
struct EstimatorReport {
  double tecv = 0.0;
  Index n_train = 0;
  Index n_test = 0;
  Index a = 1;
  std::uint64_t h_evals = 0;
  std::string method;
  /// Importance sampling only: weight degeneracy was detected. tecv is NaN
  /// when every outer sample degenerated.
  bool degenerate = false;
  double degenerate_fraction = 0.0;
};

/// Which conditional-expectation approximator the PACE estimator fits.
struct RegressorSpec {
  enum class Kind { Linear, Mlp };
  Kind kind = Kind::Linear;
  std::vector<Index> hidden = {100, 100};
  TrainConfig train;

  static RegressorSpec linear() { return {}; }
  static RegressorSpec mlp(std::vector<Index> hidden_widths, TrainConfig cfg) {
    RegressorSpec s;
    s.kind = Kind::Mlp;
    s.hidden = std::move(hidden_widths);
    s.train = std::move(cfg);
    return s;
  }
};

/// Mean over all (i, j) pairs of || q_i - f(y_{i,j}) ||^2: the (reduced
/// variance, if a > 1) MC estimate of the MSE on this dataset.
double mse_on_dataset(const std::function<Matrix(const Matrix&)>& predict_batch,
                      const PairedDataset& data);

/// PACE estimator: fits the regressor on D_N and evaluates the MSE on the
/// independent D_M. Costs exactly N + M forward evaluations.
EstimatorReport pace_tecv(const ForwardModel& model, const RegressorSpec& spec,
                          const PriorRv& prior, const GaussianRv& noise, const Vector& d,
                          Index n_train, Index n_test, Index a, RngStream& rng);

/// Same estimator on caller-provided datasets (no sampling, no h cost).
EstimatorReport pace_tecv_on_datasets(const RegressorSpec& spec, const PairedDataset& train,
                                      const PairedDataset& test);

/// Double-loop importance-sampling baseline. Inner weights are computed in
/// log space and normalized with log-sum-exp; an outer sample whose effective
/// sample size drops below 2 is flagged as degenerate and excluded from the
/// average. If every outer sample degenerates the returned tecv is NaN and
/// the report is marked degenerate. Costs (N_inner + 1) * N_outer
/// evaluations of h.
EstimatorReport is_tecv(const ForwardModel& model, const PriorRv& prior,
                        const GaussianRv& noise, const Vector& d, Index n_outer,
                        Index n_inner, RngStream& rng);

/// n * s_q^2 s_xi^2 / (gain^2 s_q^2 + s_xi^2): conjugate Gaussian tECV for
/// y = gain * q + xi applied independently per component.
double closed_form_tecv_linear_gaussian(double gain, double sigma_q, double sigma_xi,
                                        Index n);

/// Asymptotic relative MAE of the PACE estimator, 2/sqrt(pi N) + 2/sqrt(pi M).
double pace_theory_rel_mae(Index n_train, Index n_test);

/// One estimator repetition: receives its own independent stream.
using EstimatorRunner = std::function<EstimatorReport(Index rep, RngStream& rng)>;

struct RepetitionSummary {
  std::vector<double> estimates; // non-degenerate estimates, by repetition order
  Index repetitions = 0;
  Index degenerate_count = 0;
  double rel_mae = 0.0; // over non-degenerate estimates; NaN if none
  double mean = 0.0;
  double variance = 0.0;

  double degenerate_fraction() const {
    return repetitions == 0
               ? 0.0
               : static_cast<double>(degenerate_count) / static_cast<double>(repetitions);
  }
};

/// Runs R statistically independent repetitions (stream = substream(rep)) and
/// summarizes them against the reference value.
RepetitionSummary run_repetitions(const EstimatorRunner& runner, double reference,
                                  Index repetitions, const RngStream& base,
                                  bool parallel = true);

/// (1/R) sum |V_r - V| / V over independent repetitions.
double rel_mae(const EstimatorRunner& runner, double reference, Index repetitions,
               const RngStream& base);

struct VarianceReductionRow {
  Index a = 1;
  double mean_estimate = 0.0;
  double variance = 0.0;
};

/// Empirical variance of the PACE estimate per augmentation multiplier, with
/// common random seeds across the a values.
std::vector<VarianceReductionRow> variance_reduction_check(
    const ForwardModel& model, const RegressorSpec& spec, const PriorRv& prior,
    const GaussianRv& noise, const Vector& d, Index n_train, Index n_test,
    const std::vector<Index>& a_values, Index repetitions, const RngStream& base);

/// Least-squares slope of y against x (used for log-log convergence rates).
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace pace
