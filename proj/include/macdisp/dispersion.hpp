#pragma once

#include <Eigen/Dense>

#include <vector>

#include "macdisp/model.hpp"

namespace macdisp {

// Ordered (r1, r2, r12).  Houses either mutual informations (r12 free) or a
// rate point (r12 = r1 + r2).
struct RateVector {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();

  double r1() const { return v[0]; }
  double r2() const { return v[1]; }
  double r12() const { return v[2]; }
  static RateVector rates(double r1, double r2) { return {{r1, r2, r1 + r2}}; }
};

enum class DispersionKind { cc, iid, cc_iid_1, cc_iid_2, joint, finite_n, sigma_n };

struct DispersionMatrix {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  DispersionKind kind = DispersionKind::cc;
};

// Exact covariance decomposition of one permutation-coupled block:
// cov = n_u * single_cov + (n_u^2 - n_u) * (m1 + m2 + m3 + m4).
struct BlockMoments {
  int u = 0;
  int n_u = 0;
  Eigen::Matrix3d single_cov, m1, m2, m3, m4, cov;
};

struct MomentReport {
  int n = 0;
  std::vector<BlockMoments> blocks;
  Eigen::Matrix3d exact_cov = Eigen::Matrix3d::Zero();

  DispersionMatrix sigma_n() const { return {exact_cov / n, DispersionKind::sigma_n}; }
};

RateVector mean_vector(const JointLaw& j, const InfoDensity& d);

DispersionMatrix cov_cc(const JointLaw& j, const InfoDensity& d);
DispersionMatrix cov_iid(const JointLaw& j, const InfoDensity& d);
DispersionMatrix cov_cc_iid(const JointLaw& j, const InfoDensity& d, int cc_user);
DispersionMatrix cov_joint(const JointLaw& j, const InfoDensity& d);

// Exact finite-n covariance of the summed density under constant-composition
// coupling; requires n*Q_U(u) and the per-block compositions to be integral.
MomentReport finite_n_cov(const JointLaw& j, const InfoDensity& d, int n);

// P[X'=x'|X=x] = (n q(x') - 1{x=x'}) / (n-1) for two positions of a uniformly
// permuted sequence of type q.
Eigen::MatrixXd pairwise_law(const Eigen::VectorXd& q, int n);

// Berry-Esseen third-moment sum with whitening by sigma^{-1/2}; the basis
// overload whitens on the given support subspace instead (for singular sigma).
double beta_n(const JointLaw& j, const InfoDensity& d, const DispersionMatrix& sigma_n);
double beta_n(const JointLaw& j, const InfoDensity& d, const Eigen::Matrix3d& sigma,
              const Eigen::Matrix<double, 3, Eigen::Dynamic>& support_basis);

double min_eigenvalue(const Eigen::Matrix3d& m);

}  // namespace macdisp
