#include "pace/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pace/parallel.hpp"

namespace pace {

double mse_on_dataset(const std::function<Matrix(const Matrix&)>& predict_batch,
                      const PairedDataset& data) {
  const Matrix f = predict_batch(data.y); // (N*a) x n
  double acc = 0.0;
  for (Index i = 0; i < data.size(); ++i)
    for (Index j = 0; j < data.a; ++j)
      acc += (data.q.row(i) - f.row(i * data.a + j)).squaredNorm();
  return acc / static_cast<double>(data.augmented_size());
}

namespace {

std::function<Matrix(const Matrix&)> fit_regressor(const RegressorSpec& spec,
                                                   const PairedDataset& train,
                                                   std::string& method_tag) {
  if (spec.kind == RegressorSpec::Kind::Linear) {
    method_tag = train.a > 1 ? "pace-linear-augmented" : "pace-linear";
    LinearCe ce = fit_linear(train);
    return [ce](const Matrix& y) { return ce.predict_batch(y); };
  }
  method_tag = train.a > 1 ? "pace-mlp-augmented" : "pace-mlp";
  std::vector<Index> widths;
  widths.push_back(train.y.cols());
  for (Index h : spec.hidden) widths.push_back(h);
  widths.push_back(train.q.cols());
  MlpCe net(widths, spec.train.seed);
  Matrix targets(train.augmented_size(), train.q.cols());
  for (Index i = 0; i < train.size(); ++i)
    targets.middleRows(i * train.a, train.a).rowwise() = train.q.row(i);
  net.train(train.y, targets, spec.train);
  return [net = std::move(net)](const Matrix& y) { return net.predict_batch(y); };
}

} // namespace

EstimatorReport pace_tecv_on_datasets(const RegressorSpec& spec, const PairedDataset& train,
                                      const PairedDataset& test) {
  if (train.size() < 2 || test.size() < 2)
    throw std::invalid_argument("pace_tecv: N and M must be >= 2");
  EstimatorReport report;
  auto predict = fit_regressor(spec, train, report.method);
  report.tecv = mse_on_dataset(predict, test);
  report.n_train = train.size();
  report.n_test = test.size();
  report.a = train.a;
  report.h_evals = static_cast<std::uint64_t>(train.size() + test.size());
  return report;
}

EstimatorReport pace_tecv(const ForwardModel& model, const RegressorSpec& spec,
                          const PriorRv& prior, const GaussianRv& noise, const Vector& d,
                          Index n_train, Index n_test, Index a, RngStream& rng) {
  // The two datasets and the regressor seed all derive from the caller's
  // stream, so repeated calls on one stream stay independent.
  const std::uint64_t tag = rng.next_u64();
  RngStream rng_train = rng.substream(tag);
  RngStream rng_test = rng.substream(tag ^ 0x5851f42d4c957f2dULL);
  const PairedDataset train =
      sample_fixed_design_dataset(model, prior, noise, d, n_train, a, rng_train);
  const PairedDataset test =
      sample_fixed_design_dataset(model, prior, noise, d, n_test, a, rng_test);
  RegressorSpec seeded = spec;
  if (seeded.kind == RegressorSpec::Kind::Mlp)
    seeded.train.seed = tag ^ 0x94d049bb133111ebULL;
  return pace_tecv_on_datasets(seeded, train, test);
}

EstimatorReport is_tecv(const ForwardModel& model, const PriorRv& prior,
                        const GaussianRv& noise, const Vector& d, Index n_outer,
                        Index n_inner, RngStream& rng) {
  if (n_outer < 1 || n_inner < 1)
    throw std::invalid_argument("is_tecv: N_outer and N_inner must be >= 1");
  EstimatorReport report;
  report.method = "is";
  report.n_train = n_inner;
  report.n_test = n_outer;
  report.h_evals = static_cast<std::uint64_t>(n_inner + 1) * static_cast<std::uint64_t>(n_outer);

  double acc = 0.0;
  Index valid = 0;
  for (Index i = 0; i < n_outer; ++i) {
    const Vector q_outer = prior.sample_one(rng);
    const Vector y = model.evaluate(q_outer, d) + noise.sample_one(rng);

    const Matrix q_inner = prior.sample(rng, n_inner);
    const Matrix h_inner = model.evaluate_batch(q_inner, d);
    Vector log_w(n_inner);
    for (Index j = 0; j < n_inner; ++j)
      log_w(j) = noise.log_density(h_inner.row(j).transpose() - y);

    const Vector w = normalize_log_weights(log_w);
    if (effective_sample_size(w) < 2.0) {
      ++report.degenerate_fraction; // counts; normalized below
      continue;
    }
    const Vector mean = q_inner.transpose() * w;
    const Vector second = q_inner.array().square().matrix().transpose() * w;
    acc += (second - mean.array().square().matrix()).cwiseMax(0.0).sum();
    ++valid;
  }
  report.degenerate_fraction /= static_cast<double>(n_outer);
  report.degenerate = report.degenerate_fraction > 0.5 || valid == 0;
  report.tecv = valid > 0 ? acc / static_cast<double>(valid)
                          : std::numeric_limits<double>::quiet_NaN();
  return report;
}

double closed_form_tecv_linear_gaussian(double gain, double sigma_q, double sigma_xi,
                                        Index n) {
  if (sigma_q <= 0.0 || sigma_xi <= 0.0)
    throw std::invalid_argument("closed_form_tecv: variances must be positive");
  const double vq = sigma_q * sigma_q;
  const double vxi = sigma_xi * sigma_xi;
  return static_cast<double>(n) * vq * vxi / (gain * gain * vq + vxi);
}

double pace_theory_rel_mae(Index n_train, Index n_test) {
  return 2.0 / std::sqrt(kPi * static_cast<double>(n_train)) +
         2.0 / std::sqrt(kPi * static_cast<double>(n_test));
}

RepetitionSummary run_repetitions(const EstimatorRunner& runner, double reference,
                                  Index repetitions, const RngStream& base, bool parallel) {
  if (repetitions < 1) throw std::invalid_argument("run_repetitions: needs R >= 1");
  std::vector<EstimatorReport> reports(static_cast<std::size_t>(repetitions));
  parallel_for(
      repetitions,
      [&](Index rep) {
        RngStream stream = base.substream(static_cast<std::uint64_t>(rep) + 1);
        reports[static_cast<std::size_t>(rep)] = runner(rep, stream);
      },
      parallel);

  RepetitionSummary s;
  s.repetitions = repetitions;
  double abs_err = 0.0;
  for (const auto& r : reports) {
    if (r.degenerate || !std::isfinite(r.tecv)) {
      ++s.degenerate_count;
      continue;
    }
    s.estimates.push_back(r.tecv);
    abs_err += std::abs(r.tecv - reference);
  }
  const auto n = static_cast<double>(s.estimates.size());
  if (s.estimates.empty()) {
    s.rel_mae = std::numeric_limits<double>::quiet_NaN();
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.variance = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.rel_mae = abs_err / (n * reference);
  double mean = 0.0;
  for (double v : s.estimates) mean += v;
  mean /= n;
  s.mean = mean;
  double var = 0.0;
  for (double v : s.estimates) var += (v - mean) * (v - mean);
  s.variance = s.estimates.size() > 1 ? var / (n - 1.0) : 0.0;
  return s;
}

double rel_mae(const EstimatorRunner& runner, double reference, Index repetitions,
               const RngStream& base) {
  if (reference <= 0.0) throw std::invalid_argument("rel_mae: reference must be > 0");
  if (repetitions < 2) throw std::invalid_argument("rel_mae: needs R >= 2");
  return run_repetitions(runner, reference, repetitions, base).rel_mae;
}

std::vector<VarianceReductionRow> variance_reduction_check(
    const ForwardModel& model, const RegressorSpec& spec, const PriorRv& prior,
    const GaussianRv& noise, const Vector& d, Index n_train, Index n_test,
    const std::vector<Index>& a_values, Index repetitions, const RngStream& base) {
  std::vector<VarianceReductionRow> table;
  for (Index a : a_values) {
    auto runner = [&](Index, RngStream& rng) {
      return pace_tecv(model, spec, prior, noise, d, n_train, n_test, a, rng);
    };
    // reference value is irrelevant for the variance column; reuse 1.0
    RepetitionSummary s = run_repetitions(runner, 1.0, repetitions, base);
    table.push_back({a, s.mean, s.variance});
  }
  return table;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("regression_slope: needs matched x/y with >= 2 points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace pace
