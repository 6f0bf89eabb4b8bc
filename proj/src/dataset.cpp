#include "pace/dataset.hpp"

#include <stdexcept>

namespace pace {

PairedDataset PairedDataset::slice(Index begin, Index end) const {
  if (begin < 0 || end > size() || begin >= end)
    throw std::invalid_argument("PairedDataset::slice: bad range");
  PairedDataset out;
  out.q = q.middleRows(begin, end - begin);
  if (d) out.d = d->middleRows(begin, end - begin);
  out.y = y.middleRows(begin * a, (end - begin) * a);
  out.a = a;
  return out;
}

PairedDataset sample_fixed_design_dataset(const ForwardModel& model, const PriorRv& prior,
                                          const GaussianRv& noise, const Vector& d,
                                          Index count, Index a, RngStream& rng) {
  if (count < 1 || a < 1)
    throw std::invalid_argument("sample_fixed_design_dataset: count and a must be >= 1");
  PairedDataset ds;
  ds.a = a;
  ds.q = prior.sample(rng, count);
  ds.y.resize(count * a, model.obs_dim());
  for (Index i = 0; i < count; ++i) {
    ds.y.middleRows(i * a, a) =
        model.observe(ds.q.row(i).transpose(), d, noise, rng, a);
  }
  return ds;
}

PairedDataset sample_kernel_design_dataset(const ForwardModel& model, const PriorRv& prior,
                                           const GaussianRv& noise, const Vector& center,
                                           const Vector& kernel_std, Index count, Index a,
                                           RngStream& rng) {
  if (count < 1 || a < 1)
    throw std::invalid_argument("sample_kernel_design_dataset: count and a must be >= 1");
  const auto& domain = model.design_domain();
  if (center.size() != domain.dim() || kernel_std.size() != domain.dim())
    throw std::invalid_argument("sample_kernel_design_dataset: dimension mismatch");
  PairedDataset ds;
  ds.a = a;
  ds.q = prior.sample(rng, count);
  ds.d = Matrix(count, domain.dim());
  ds.y.resize(count * a, model.obs_dim());
  for (Index i = 0; i < count; ++i) {
    Vector di(domain.dim());
    for (Index k = 0; k < domain.dim(); ++k)
      di(k) = center(k) + kernel_std(k) * rng.normal();
    di = domain.project(di); // kernel samples outside D are projected, not rejected
    ds.d->row(i) = di.transpose();
    ds.y.middleRows(i * a, a) =
        model.observe(ds.q.row(i).transpose(), di, noise, rng, a);
  }
  return ds;
}

} // namespace pace
