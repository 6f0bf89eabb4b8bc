#include "pace/fem_eit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace pace::eit {

namespace {

struct Quadrature1d {
  std::array<double, 3> points{-0.7745966692414834, 0.0, 0.7745966692414834};
  std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
};

/// 1D Lagrange shape functions on [-1, 1] of order 1 or 2.
void shape_1d(int order, double xi, double* n, double* dn) {
  if (order == 1) {
    n[0] = 0.5 * (1.0 - xi);
    n[1] = 0.5 * (1.0 + xi);
    if (dn) {
      dn[0] = -0.5;
      dn[1] = 0.5;
    }
    return;
  }
  n[0] = 0.5 * xi * (xi - 1.0);
  n[1] = 1.0 - xi * xi;
  n[2] = 0.5 * xi * (xi + 1.0);
  if (dn) {
    dn[0] = xi - 0.5;
    dn[1] = -2.0 * xi;
    dn[2] = xi + 0.5;
  }
}

/// Element boundaries in x. Columns are distributed over the gap/electrode
/// intervals by largest-remainder rounding and graded toward the interval
/// endpoints (cosine map), so electrode edges coincide with mesh lines and
/// cells cluster at the weakly singular electrode corners.
std::vector<double> graded_x_breaks(const EitGeometry& geometry) {
  std::vector<double> marks{0.0};
  for (const auto& el : geometry.electrodes()) {
    if (!el.top) continue; // top and bottom layouts coincide in x
    marks.push_back(el.x0);
    marks.push_back(el.x1);
  }
  marks.push_back(geometry.length);
  std::sort(marks.begin(), marks.end());

  const std::size_t n_intervals = marks.size() - 1;
  const auto nx = static_cast<std::size_t>(geometry.nx);
  if (nx < 2 * n_intervals)
    throw std::invalid_argument("EitGeometry: nx too small for the electrode layout");

  std::vector<std::size_t> cells(n_intervals);
  std::vector<std::pair<double, std::size_t>> remainder(n_intervals);
  std::size_t assigned = 0;
  double weight_total = 0.0;
  for (std::size_t i = 0; i < n_intervals; ++i)
    weight_total += std::sqrt(marks[i + 1] - marks[i]);
  for (std::size_t i = 0; i < n_intervals; ++i) {
    const double share =
        static_cast<double>(nx) * std::sqrt(marks[i + 1] - marks[i]) / weight_total;
    cells[i] = std::max<std::size_t>(1, static_cast<std::size_t>(share));
    remainder[i] = {share - std::floor(share), i};
    assigned += cells[i];
  }
  std::sort(remainder.begin(), remainder.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < nx; ++k, ++assigned) ++cells[remainder[k % n_intervals].second];
  while (assigned > nx) {
    auto it = std::max_element(cells.begin(), cells.end());
    if (*it <= 1) break;
    --*it;
    --assigned;
  }

  std::vector<double> breaks{0.0};
  for (std::size_t i = 0; i < n_intervals; ++i) {
    const double x0 = marks[i], len = marks[i + 1] - marks[i];
    const auto k = cells[i];
    for (std::size_t c = 1; c <= k; ++c) {
      const double t =
          0.5 * (1.0 - std::cos(kPi * static_cast<double>(c) / static_cast<double>(k)));
      breaks.push_back(x0 + len * t);
    }
  }
  breaks.back() = geometry.length;
  return breaks;
}

/// Element boundaries in z: cosine-graded toward the electrode-bearing top
/// and bottom edges, with the ply interface pinned to a mesh line.
std::vector<double> graded_z_breaks(const EitGeometry& geometry) {
  const auto nz = static_cast<std::size_t>(geometry.nz);
  const double h = geometry.height, zi = geometry.ply_interface;
  auto lower = static_cast<std::size_t>(
      std::llround(static_cast<double>(nz) * zi / h));
  lower = std::min(std::max<std::size_t>(lower, 1), nz - 1);
  std::vector<double> breaks{0.0};
  for (std::size_t c = 1; c <= lower; ++c) {
    const double t = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(c) /
                                           static_cast<double>(lower)));
    breaks.push_back(zi * t);
  }
  const std::size_t upper = nz - lower;
  for (std::size_t c = 1; c <= upper; ++c) {
    const double t = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(c) /
                                           static_cast<double>(upper)));
    breaks.push_back(zi + (h - zi) * t);
  }
  breaks.back() = h;
  return breaks;
}

} // namespace

std::vector<EitGeometry::Electrode> EitGeometry::electrodes() const {
  const double w = electrode_width();
  const double gap = (length - 5.0 * w) / 6.0;
  std::vector<Electrode> out;
  out.reserve(kElectrodes);
  for (int k = 0; k < 5; ++k) {
    const double x0 = gap + static_cast<double>(k) * (w + gap);
    out.push_back({x0, x0 + w, /*top=*/true});
  }
  for (int k = 0; k < 5; ++k) {
    const double x0 = gap + static_cast<double>(k) * (w + gap);
    out.push_back({x0, x0 + w, /*top=*/false});
  }
  return out;
}

void EitGeometry::validate() const {
  if (length <= 0.0 || height <= 0.0) throw std::invalid_argument("EitGeometry: bad size");
  if (contact_impedance <= 0.0)
    throw std::invalid_argument("EitGeometry: contact impedance must be > 0");
  if (!(sigma_base.array() > 0.0).all())
    throw std::invalid_argument("EitGeometry: sigma_base must be positive");
  if (ply_interface <= 0.0 || ply_interface >= height)
    throw std::invalid_argument("EitGeometry: ply interface must lie inside the body");
  if (nx < 2 || nz < 1) throw std::invalid_argument("EitGeometry: mesh too coarse");
  if (element_order != 1 && element_order != 2)
    throw std::invalid_argument("EitGeometry: element order must be 1 or 2");
  const double gap = (length - 5.0 * electrode_width()) / 6.0;
  if (gap <= 0.0) throw std::invalid_argument("EitGeometry: electrodes overlap");
}

Eigen::Matrix3d rotated_conductivity(double eta, const Eigen::Vector3d& sigma_base) {
  if (!std::isfinite(eta)) throw std::invalid_argument("rotated_conductivity: angle not finite");
  const double c = std::cos(eta), s = std::sin(eta);
  Eigen::Matrix3d rot;
  rot << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return rot.transpose() * sigma_base.asDiagonal() * rot;
}

Eigen::Matrix2d in_plane_conductivity(double eta, const Eigen::Vector3d& sigma_base) {
  const Eigen::Matrix3d full = rotated_conductivity(eta, sigma_base);
  Eigen::Matrix2d out;
  out << full(0, 0), full(0, 2), full(2, 0), full(2, 2);
  if (!(out(0, 0) > 0.0) || !(out.determinant() > 0.0))
    throw std::invalid_argument("in_plane_conductivity: tensor not positive definite");
  return out;
}

FemSystem::FemSystem(const EitGeometry& geometry, double eta1, double eta2)
    : geometry_(geometry) {
  geometry_.validate();
  assemble(eta1, eta2);
}

void FemSystem::assemble(double eta1, double eta2) {
  const int p = geometry_.element_order;
  const Index nx = geometry_.nx, nz = geometry_.nz;
  const Index nnx = p * nx + 1, nnz = p * nz + 1;
  n_nodes_ = nnx * nnz;
  n_dofs_ = n_nodes_ + EitGeometry::kElectrodes + 1;

  const std::vector<double> xb = graded_x_breaks(geometry_);
  if (static_cast<Index>(xb.size()) != nx + 1)
    throw std::logic_error("FemSystem: x grading produced a wrong cell count");
  const std::vector<double> zb = graded_z_breaks(geometry_);

  coords_.resize(n_nodes_, 2);
  for (Index iz = 0; iz < nnz; ++iz)
    for (Index ix = 0; ix < nnx; ++ix) {
      const Index id = iz * nnx + ix;
      const Index ex = std::min<Index>(ix / p, nx - 1);
      const int a = static_cast<int>(ix - ex * p);
      const double hx_e = xb[static_cast<std::size_t>(ex) + 1] - xb[static_cast<std::size_t>(ex)];
      const Index ez = std::min<Index>(iz / p, nz - 1);
      const int b = static_cast<int>(iz - ez * p);
      const double hz_e = zb[static_cast<std::size_t>(ez) + 1] - zb[static_cast<std::size_t>(ez)];
      coords_(id, 0) = xb[static_cast<std::size_t>(ex)] +
                       hx_e * static_cast<double>(a) / static_cast<double>(p);
      coords_(id, 1) = zb[static_cast<std::size_t>(ez)] +
                       hz_e * static_cast<double>(b) / static_cast<double>(p);
    }

  const Eigen::Matrix2d sigma_top = in_plane_conductivity(eta1, geometry_.sigma_base);
  const Eigen::Matrix2d sigma_bottom = in_plane_conductivity(eta2, geometry_.sigma_base);

  const Quadrature1d quad;
  const int npe = (p + 1) * (p + 1); // nodes per element

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nx * nz * npe * npe + 4096));

  // element stiffness on the affine rectangular mapping
  std::vector<Index> enodes(static_cast<std::size_t>(npe));
  Matrix ke(npe, npe);
  std::vector<double> nx1(3), dnx1(3), nz1(3), dnz1(3);
  for (Index ez = 0; ez < nz; ++ez) {
    const double hz = zb[static_cast<std::size_t>(ez) + 1] - zb[static_cast<std::size_t>(ez)];
    const double zc = 0.5 * (zb[static_cast<std::size_t>(ez)] + zb[static_cast<std::size_t>(ez) + 1]);
    const Eigen::Matrix2d& sigma = zc > geometry_.ply_interface ? sigma_top : sigma_bottom;
    for (Index ex = 0; ex < nx; ++ex) {
      const double hx = xb[static_cast<std::size_t>(ex) + 1] - xb[static_cast<std::size_t>(ex)];
      for (int b = 0; b <= p; ++b)
        for (int a = 0; a <= p; ++a)
          enodes[static_cast<std::size_t>(b * (p + 1) + a)] =
              (p * ez + b) * nnx + (p * ex + a);
      ke.setZero();
      for (std::size_t gz = 0; gz < quad.points.size(); ++gz) {
        shape_1d(p, quad.points[gz], nz1.data(), dnz1.data());
        for (std::size_t gx = 0; gx < quad.points.size(); ++gx) {
          shape_1d(p, quad.points[gx], nx1.data(), dnx1.data());
          const double wq = quad.weights[gx] * quad.weights[gz] * hx * hz / 4.0;
          for (int i = 0; i < npe; ++i) {
            const int ai = i % (p + 1), bi = i / (p + 1);
            const double gxi = dnx1[ai] * nz1[bi] * 2.0 / hx;
            const double gzi = nx1[ai] * dnz1[bi] * 2.0 / hz;
            for (int j = 0; j < npe; ++j) {
              const int aj = j % (p + 1), bj = j / (p + 1);
              const double gxj = dnx1[aj] * nz1[bj] * 2.0 / hx;
              const double gzj = nx1[aj] * dnz1[bj] * 2.0 / hz;
              ke(i, j) += wq * (gxi * (sigma(0, 0) * gxj + sigma(0, 1) * gzj) +
                                gzi * (sigma(1, 0) * gxj + sigma(1, 1) * gzj));
            }
          }
        }
      }
      for (int i = 0; i < npe; ++i)
        for (int j = 0; j < npe; ++j)
          triplets.emplace_back(enodes[static_cast<std::size_t>(i)],
                                enodes[static_cast<std::size_t>(j)], ke(i, j));
    }
  }

  // electrode coupling terms; electrodes may cover element edges partially
  const auto electrodes = geometry_.electrodes();
  const double inv_z = 1.0 / geometry_.contact_impedance;
  std::vector<double> ns(3);
  for (Index l = 0; l < static_cast<Index>(electrodes.size()); ++l) {
    const auto& el = electrodes[static_cast<std::size_t>(l)];
    const Index urow = n_nodes_ + l;
    const Index ez = el.top ? nz - 1 : 0;
    const int b_local = el.top ? p : 0;
    for (Index ex = 0; ex < nx; ++ex) {
      const double x0 = xb[static_cast<std::size_t>(ex)];
      const double hx = xb[static_cast<std::size_t>(ex) + 1] - x0;
      const double lo = std::max(x0, el.x0);
      const double hi = std::min(x0 + hx, el.x1);
      if (hi - lo < 1e-12) continue;
      // map the overlap to the reference edge coordinate
      const double xi_lo = 2.0 * (lo - x0) / hx - 1.0;
      const double xi_hi = 2.0 * (hi - x0) / hx - 1.0;
      std::array<Index, 3> edge_nodes{};
      for (int a = 0; a <= p; ++a)
        edge_nodes[static_cast<std::size_t>(a)] = (p * ez + b_local) * nnx + (p * ex + a);
      for (std::size_t g = 0; g < quad.points.size(); ++g) {
        const double xi = 0.5 * (xi_lo + xi_hi) + 0.5 * (xi_hi - xi_lo) * quad.points[g];
        const double ws = quad.weights[g] * 0.5 * (xi_hi - xi_lo) * hx * 0.5; // ds
        shape_1d(p, xi, ns.data(), nullptr);
        for (int i = 0; i <= p; ++i) {
          const Index ni = edge_nodes[static_cast<std::size_t>(i)];
          for (int j = 0; j <= p; ++j)
            triplets.emplace_back(ni, edge_nodes[static_cast<std::size_t>(j)],
                                  inv_z * ws * ns[static_cast<std::size_t>(i)] *
                                      ns[static_cast<std::size_t>(j)]);
          triplets.emplace_back(ni, urow, -inv_z * ws * ns[static_cast<std::size_t>(i)]);
          triplets.emplace_back(urow, ni, -inv_z * ws * ns[static_cast<std::size_t>(i)]);
        }
        triplets.emplace_back(urow, urow, inv_z * ws);
      }
    }
  }

  // grounding sum(U) = 0 through one Lagrange multiplier keeps the system
  // symmetric
  const Index gnd = n_nodes_ + EitGeometry::kElectrodes;
  for (Index l = 0; l < EitGeometry::kElectrodes; ++l) {
    triplets.emplace_back(n_nodes_ + l, gnd, 1.0);
    triplets.emplace_back(gnd, n_nodes_ + l, 1.0);
  }

  matrix_.resize(n_dofs_, n_dofs_);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
  lu_.compute(matrix_);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("FemSystem: singular system after assembly");
}

Vector FemSystem::solve_full(const Vector& currents) const {
  if (currents.size() != EitGeometry::kElectrodes)
    throw std::invalid_argument("FemSystem::solve: expected 10 electrode currents");
  if (std::abs(currents.sum()) > 1e-12)
    throw std::invalid_argument("FemSystem::solve: currents violate charge conservation");
  Vector rhs = Vector::Zero(n_dofs_);
  rhs.segment(n_nodes_, EitGeometry::kElectrodes) = currents;
  Vector sol = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("FemSystem: solve failed");
  return sol;
}

Vector FemSystem::solve(const Vector& currents) const {
  return solve_full(currents).segment(n_nodes_, EitGeometry::kElectrodes);
}

Vector expand_currents(const Vector& d) {
  if (d.size() != 9) throw std::invalid_argument("expand_currents: expected 9 currents");
  Vector full(10);
  full.head(9) = d;
  full(9) = -d.sum();
  return full;
}

Matrix current_to_voltage_map(const EitGeometry& geometry, double eta1, double eta2) {
  const FemSystem system(geometry, eta1, eta2);
  Matrix g(EitGeometry::kElectrodes, 9);
  for (Index k = 0; k < 9; ++k) {
    Vector pattern = Vector::Zero(10);
    pattern(k) = 1.0;
    pattern(9) = -1.0;
    g.col(k) = system.solve(pattern);
  }
  return g;
}

EitForwardModel::EitForwardModel(EitGeometry geometry)
    : geometry_(std::move(geometry)),
      domain_(Vector::Constant(9, -1.0), Vector::Constant(9, 1.0),
              LinearConstraint{Vector::Ones(9), 1.0}) {
  geometry_.validate();
}

UniformBoxRv EitForwardModel::angle_prior() {
  Vector lo(2), hi(2);
  lo << kPi / 4.5, -kPi / 3.5;
  hi << kPi / 3.5, -kPi / 4.5;
  return UniformBoxRv(lo, hi);
}

std::shared_ptr<const FemSystem> EitForwardModel::system_for(const Vector& q) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (cached_system_ && cached_q_.size() == q.size() && cached_q_ == q)
    return cached_system_;
  auto system = std::make_shared<const FemSystem>(geometry_, q(0), q(1));
  cached_q_ = q;
  cached_system_ = system;
  return system;
}

Vector EitForwardModel::evaluate_impl(const Vector& q, const Vector& d) const {
  return system_for(q)->solve(expand_currents(d));
}

Matrix EitForwardModel::design_jacobian_impl(const Vector& q, const Vector& d) const {
  (void)d; // exact by linearity in the currents, independent of d
  const auto system = system_for(q);
  Matrix g(EitGeometry::kElectrodes, 9);
  for (Index k = 0; k < 9; ++k) {
    Vector pattern = Vector::Zero(10);
    pattern(k) = 1.0;
    pattern(9) = -1.0;
    g.col(k) = system->solve(pattern);
  }
  return g;
}

} // namespace pace::eit
