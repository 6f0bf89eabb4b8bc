#include "pace/linear_ce.hpp"

#include <Eigen/Cholesky>
#include <iostream>
#include <stdexcept>

namespace pace {

namespace {

LinearCe fit_from_pairs(const Matrix& q_pairs, const Matrix& y_pairs) {
  const Index count = q_pairs.rows();
  const Index m = y_pairs.cols();
  if (count < m + 2)
    throw std::invalid_argument("fit_linear: needs at least m + 2 samples");

  const Vector q_bar = q_pairs.colwise().mean();
  const Vector y_bar = y_pairs.colwise().mean();
  const Matrix qc = q_pairs.rowwise() - q_bar.transpose();
  const Matrix yc = y_pairs.rowwise() - y_bar.transpose();

  const double inv_count = 1.0 / static_cast<double>(count);
  Matrix cov_qy = (qc.transpose() * yc) * inv_count; // n x m
  Matrix cov_yy = (yc.transpose() * yc) * inv_count; // m x m

  Eigen::LDLT<Matrix> ldlt(cov_yy);
  const double scale = cov_yy.trace() / static_cast<double>(m);
  bool degenerate = ldlt.info() != Eigen::Success;
  if (!degenerate) {
    const Vector dvec = ldlt.vectorD();
    degenerate = dvec.minCoeff() <= scale * 1e-13;
  }
  if (degenerate) {
    const double ridge = 1e-10 * scale;
    std::cerr << "fit_linear: near-singular Cov[Y], applying ridge " << ridge << "\n";
    ldlt.compute(cov_yy + ridge * Matrix::Identity(m, m));
  }

  LinearCe ce;
  ce.A = ldlt.solve(cov_qy.transpose()).transpose();
  ce.b = q_bar - ce.A * y_bar;
  return ce;
}

} // namespace

LinearCe fit_linear(const Matrix& q_rows, const Matrix& y_rows) {
  if (q_rows.rows() != y_rows.rows())
    throw std::invalid_argument("fit_linear: q/y row count mismatch");
  return fit_from_pairs(q_rows, y_rows);
}

LinearCe fit_linear(const PairedDataset& data) {
  if (data.a == 1) return fit_from_pairs(data.q, data.y);
  // Augmented fit: repeat each q row across its a replicates.
  Matrix q_pairs(data.augmented_size(), data.q.cols());
  for (Index i = 0; i < data.size(); ++i)
    q_pairs.middleRows(i * data.a, data.a).rowwise() = data.q.row(i);
  return fit_from_pairs(q_pairs, data.y);
}

double linear_ce_gain(double gain, double sigma_q, double sigma_xi) {
  const double vq = sigma_q * sigma_q;
  const double vxi = sigma_xi * sigma_xi;
  return gain * vq / (gain * gain * vq + vxi);
}

} // namespace pace
