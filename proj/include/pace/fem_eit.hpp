#pragma once

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <mutex>

#include "pace/forward_model.hpp"

namespace pace::eit {

/// Two-ply rectangular specimen with surface electrodes. Electrode widths,
/// positions and the ply interface height are config defaults (equal-width
/// electrodes, equal gaps, interface at half height), not physical constants.
struct EitGeometry {
  double length = 20.0;
  double height = 2.0;
  double contact_impedance = 0.1;
  /// Principal conductivities of the orthotropic ply material.
  Eigen::Vector3d sigma_base{1e-2, 1e-3, 1e-3};
  /// z-coordinate of the interface between bottom ply B2 and top ply B1.
  double ply_interface = 1.0;
  Index nx = 50;
  Index nz = 6;
  /// 2 = 9-node biquadratic elements (default), 1 = bilinear fallback.
  int element_order = 2;

  static constexpr Index kElectrodes = 10; // 5 on top edge, 5 on bottom

  struct Electrode {
    double x0 = 0.0;
    double x1 = 0.0;
    bool top = false;
  };

  /// Electrodes 1..5 left-to-right on the top edge, 6..10 on the bottom;
  /// width = length / 10, equal gaps including both ends.
  std::vector<Electrode> electrodes() const;

  double electrode_width() const { return length / 10.0; }
  void validate() const;
};

/// Full rotated tensor R(eta)^T diag(sigma_base) R(eta); the rotation acts in
/// the x-z plane.
Eigen::Matrix3d rotated_conductivity(double eta, const Eigen::Vector3d& sigma_base);

/// (x, z) restriction of the rotated tensor; symmetric positive definite for
/// every eta as long as the base entries are positive.
Eigen::Matrix2d in_plane_conductivity(double eta, const Eigen::Vector3d& sigma_base);

/// Assembled and factorized complete-electrode-model system for one pair of
/// ply angles. Unknowns: nodal potentials, 10 electrode potentials, one
/// Lagrange multiplier enforcing sum(U) = 0.
class FemSystem {
public:
  FemSystem(const EitGeometry& geometry, double eta1, double eta2);

  /// Electrode potentials U (10) for prescribed electrode currents
  /// (sum must vanish to 1e-12).
  Vector solve(const Vector& currents) const;

  /// Nodal potential field followed by U and the multiplier.
  Vector solve_full(const Vector& currents) const;

  Index node_count() const { return n_nodes_; }
  Index dof_count() const { return n_dofs_; }
  /// Node coordinates, row i = (x, z) of node i.
  const Matrix& node_coordinates() const { return coords_; }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
  const EitGeometry& geometry() const { return geometry_; }

private:
  void assemble(double eta1, double eta2);

  EitGeometry geometry_;
  Index n_nodes_ = 0;
  Index n_dofs_ = 0;
  Matrix coords_;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

/// G such that h(q, d) = G d for the 9 free currents (I_10 = -sum d is
/// eliminated); also the exact design Jacobian. Built from 9 solves with the
/// basis patterns e_k - e_10.
Matrix current_to_voltage_map(const EitGeometry& geometry, double eta1, double eta2);

/// The EIT experiment as a ForwardModel: q = (eta1, eta2), y = U (10),
/// d = (I_1..I_9) in [-1,1]^9 with |sum d| <= 1. Assembly is cached for the
/// most recent q so repeated designs at one parameter sample reuse the
/// factorization.
class EitForwardModel final : public ForwardModel {
public:
  explicit EitForwardModel(EitGeometry geometry = {});

  Index param_dim() const override { return 2; }
  Index obs_dim() const override { return EitGeometry::kElectrodes; }
  Index design_dim() const override { return 9; }
  const DesignDomain& design_domain() const override { return domain_; }
  const EitGeometry& geometry() const { return geometry_; }

  /// Prior over the ply angles used throughout the experiments.
  static UniformBoxRv angle_prior();

protected:
  Vector evaluate_impl(const Vector& q, const Vector& d) const override;
  Matrix design_jacobian_impl(const Vector& q, const Vector& d) const override;

private:
  std::shared_ptr<const FemSystem> system_for(const Vector& q) const;

  EitGeometry geometry_;
  DesignDomain domain_;
  mutable std::mutex cache_mutex_;
  mutable Vector cached_q_;
  mutable std::shared_ptr<const FemSystem> cached_system_;
};

/// Expands the 9 free currents to the 10 electrode currents.
Vector expand_currents(const Vector& d);

} // namespace pace::eit
