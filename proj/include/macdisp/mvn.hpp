#pragma once

#include <Eigen/Dense>

#include "macdisp/errors.hpp"

namespace macdisp {

// Rank-revealing eigendecomposition of a 3x3 PSD covariance.  Eigenvalues
// below 1e-12 x the largest are truncated to zero; basis columns are ordered
// by descending eigenvalue with the first nonzero component positive.
struct GaussianSpec {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  int rank = 0;
  Eigen::Matrix<double, 3, Eigen::Dynamic> basis;         // 3 x rank, orthonormal
  Eigen::Matrix<double, 3, Eigen::Dynamic> support_sqrt;  // basis * diag(sqrt eig)
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();  // descending, truncated
};

GaussianSpec decompose(const Eigen::Matrix3d& cov);

// P[Z <= z componentwise], Z ~ N(0, cov).  Directions with zero variance are
// hard constraints (probability 0 or 1); the rest is integrated on the support.
double lower_orthant(const GaussianSpec& spec, const Eigen::Vector3d& z);

// Membership z in { z : P[Z <= z] >= 1 - eps }.
bool qinv_member(const GaussianSpec& spec, double eps, const Eigen::Vector3d& z);
bool qinv_member(const Eigen::Matrix3d& v, double eps, const Eigen::Vector3d& z);

}  // namespace macdisp
