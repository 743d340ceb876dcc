#pragma once

#include <Eigen/Dense>

#include <vector>

#include "macdisp/errors.hpp"

namespace macdisp {

// Conditional law W(y|x1,x2) as a dense row-stochastic table.
// Rows are (x1,x2) pairs in row-major order, columns are output symbols.
struct Channel {
  int nx1 = 0, nx2 = 0, ny = 0;
  Eigen::MatrixXd w;

  int pair_index(int x1, int x2) const { return x1 * nx2 + x2; }
  double operator()(int x1, int x2, int y) const { return w(pair_index(x1, x2), y); }
};

// Time-sharing weights plus per-u input distributions.  nu == 0 encodes the
// no-time-sharing case: q_u is empty and q1/q2 hold a single row of weight 1.
struct InputSpec {
  int nu = 0;
  Eigen::VectorXd q_u;
  Eigen::MatrixXd q1, q2;

  int u_count() const { return nu == 0 ? 1 : nu; }
  double u_prob(int u) const { return nu == 0 ? 1.0 : q_u(u); }
};

// Joint distribution over (u,x1,x2,y) with the output marginals cached.
// Immutable after construction; safe to share across threads.
struct JointLaw {
  Channel ch;
  InputSpec inp;
  Eigen::ArrayXd p;             // flat (u,x1,x2,y)
  Eigen::MatrixXd py_given_x2u; // row (u*nx2+x2)
  Eigen::MatrixXd py_given_x1u; // row (u*nx1+x1)
  Eigen::MatrixXd py_given_u;   // row u

  int index(int u, int x1, int x2, int y) const {
    return ((u * ch.nx1 + x1) * ch.nx2 + x2) * ch.ny + y;
  }
};

// (i1,i2,i12) log-ratio vector per (u,x1,x2,y); entries off the support of the
// joint law are flagged and hold 0.  zero_given_pair marks points where the
// channel itself assigns probability zero (the log-ratio is -inf there).
struct InfoDensity {
  std::vector<Eigen::Vector3d> v;
  std::vector<char> on_support;
  std::vector<char> zero_given_pair;
};

enum class CondTarget { user1, user2, both };

// Conditional means of the density vector given (u,x1), (u,x2), or (u,x1,x2).
// n1/n2 collapse to 1 for the coordinate not conditioned on.
struct CondMeanTable {
  CondTarget target;
  int u_count = 0, n1 = 1, n2 = 1;
  std::vector<Eigen::Vector3d> mean;
  std::vector<char> present;

  int index(int u, int x1, int x2) const {
    return (u * n1 + (n1 == 1 ? 0 : x1)) * n2 + (n2 == 1 ? 0 : x2);
  }
  const Eigen::Vector3d& at(int u, int x1, int x2) const { return mean[index(u, x1, x2)]; }
  bool present_at(int u, int x1, int x2) const { return present[index(u, x1, x2)] != 0; }
};

struct Composition {
  Eigen::VectorXi counts;
  int n() const { return counts.sum(); }
};

JointLaw joint_law(const Channel& ch, const InputSpec& inp);
InfoDensity info_density(const JointLaw& j);
CondMeanTable cond_mean_info(const JointLaw& j, const InfoDensity& d, CondTarget which);

// Closest composition to n*q in L-infinity: floor(n*q) plus the remainder
// distributed to the largest fractional parts, ties to the lowest symbol.
Composition nearest_type(const Eigen::VectorXd& q, int n);

}  // namespace macdisp
