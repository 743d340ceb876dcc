#include "macdisp/dispersion.hpp"

#include <cmath>

namespace macdisp {

namespace {

// Per-u conditional moments of the density vector and its conditional means.
struct BlockStats {
  double qu = 0.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();       // E[i|u]
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();        // Cov[i|u]
  Eigen::Matrix3d cov1 = Eigen::Matrix3d::Zero();       // Cov[i^(1)(u,X1)|u]
  Eigen::Matrix3d cov2 = Eigen::Matrix3d::Zero();       // Cov[i^(2)(u,X2)|u]
  Eigen::Matrix3d cov12 = Eigen::Matrix3d::Zero();      // Cov[i^(12)(u,X1,X2)|u]
};

std::vector<BlockStats> block_stats(const JointLaw& j, const InfoDensity& d) {
  const Channel& ch = j.ch;
  const int uc = j.inp.u_count();
  const CondMeanTable t1 = cond_mean_info(j, d, CondTarget::user1);
  const CondMeanTable t2 = cond_mean_info(j, d, CondTarget::user2);
  const CondMeanTable t12 = cond_mean_info(j, d, CondTarget::both);

  std::vector<BlockStats> out(uc);
  for (int u = 0; u < uc; ++u) {
    BlockStats& b = out[u];
    b.qu = j.inp.u_prob(u);
    if (b.qu <= 0.0) continue;
    Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
    for (int x1 = 0; x1 < ch.nx1; ++x1)
      for (int x2 = 0; x2 < ch.nx2; ++x2)
        for (int y = 0; y < ch.ny; ++y) {
          const int k = j.index(u, x1, x2, y);
          if (!d.on_support[k]) continue;
          const double w = j.p[k] / b.qu;
          b.mean += w * d.v[k];
          second += w * d.v[k] * d.v[k].transpose();
        }
    b.cov = second - b.mean * b.mean.transpose();

    auto accumulate = [&](const CondMeanTable& t, int a_count, int b_count,
                          auto prob, Eigen::Matrix3d& dst) {
      for (int a = 0; a < a_count; ++a)
        for (int c = 0; c < b_count; ++c) {
          const double w = prob(a, c);
          if (w <= 0.0) continue;
          const Eigen::Vector3d r = t.at(u, a, c) - b.mean;
          dst += w * r * r.transpose();
        }
    };
    accumulate(t1, ch.nx1, 1, [&](int a, int) { return j.inp.q1(u, a); }, b.cov1);
    accumulate(t2, 1, ch.nx2, [&](int, int c) { return j.inp.q2(u, c); }, b.cov2);
    accumulate(t12, ch.nx1, ch.nx2,
               [&](int a, int c) { return j.inp.q1(u, a) * j.inp.q2(u, c); }, b.cov12);
  }
  return out;
}

Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

RateVector mean_vector(const JointLaw& j, const InfoDensity& d) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < d.v.size(); ++k)
    if (d.on_support[k]) acc += j.p[static_cast<int>(k)] * d.v[k];
  return {acc};
}

DispersionMatrix cov_cc(const JointLaw& j, const InfoDensity& d) {
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  for (const BlockStats& b : block_stats(j, d)) v += b.qu * (b.cov - b.cov1 - b.cov2);
  return {symmetrize(v), DispersionKind::cc};
}

DispersionMatrix cov_iid(const JointLaw& j, const InfoDensity& d) {
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  for (const BlockStats& b : block_stats(j, d)) v += b.qu * b.cov;
  return {symmetrize(v), DispersionKind::iid};
}

DispersionMatrix cov_cc_iid(const JointLaw& j, const InfoDensity& d, int cc_user) {
  if (cc_user != 1 && cc_user != 2) throw ValidationError("cov_cc_iid: user must be 1 or 2");
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  for (const BlockStats& b : block_stats(j, d))
    v += b.qu * (b.cov - (cc_user == 1 ? b.cov1 : b.cov2));
  return {symmetrize(v), cc_user == 1 ? DispersionKind::cc_iid_1 : DispersionKind::cc_iid_2};
}

DispersionMatrix cov_joint(const JointLaw& j, const InfoDensity& d) {
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  for (const BlockStats& b : block_stats(j, d)) v += b.qu * (b.cov - b.cov12);
  return {symmetrize(v), DispersionKind::joint};
}

namespace {

int integral_count(double x, const char* what) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw ValidationError(std::string(what) +
                          ": composition is not integral; round the inputs with nearest_type");
  return static_cast<int>(r);
}

}  // namespace

MomentReport finite_n_cov(const JointLaw& j, const InfoDensity& d, int n) {
  if (n < 2) throw ValidationError("finite_n_cov: n must be >= 2");
  const std::vector<BlockStats> stats = block_stats(j, d);
  MomentReport rep;
  rep.n = n;
  for (int u = 0; u < static_cast<int>(stats.size()); ++u) {
    const BlockStats& b = stats[u];
    const int nu = integral_count(n * b.qu, "finite_n_cov: n*Q_U");
    if (nu == 0) continue;
    for (int x = 0; x < j.ch.nx1; ++x) integral_count(nu * j.inp.q1(u, x), "finite_n_cov: n_u*Q_1");
    for (int x = 0; x < j.ch.nx2; ++x) integral_count(nu * j.inp.q2(u, x), "finite_n_cov: n_u*Q_2");

    BlockMoments bm;
    bm.u = u;
    bm.n_u = nu;
    bm.single_cov = b.cov;
    bm.m1.setZero();
    bm.m2.setZero();
    bm.m3.setZero();
    bm.m4.setZero();
    if (nu >= 2) {
      const double s = static_cast<double>(nu) / ((nu - 1.0) * (nu - 1.0));
      bm.m2 = -s * b.cov2;
      bm.m3 = -s * b.cov1;
      bm.m4 = (1.0 / ((nu - 1.0) * (nu - 1.0))) * b.cov12;
    }
    bm.cov = nu * bm.single_cov +
             (static_cast<double>(nu) * nu - nu) * (bm.m1 + bm.m2 + bm.m3 + bm.m4);
    rep.exact_cov += bm.cov;
    rep.blocks.push_back(bm);
  }
  rep.exact_cov = symmetrize(rep.exact_cov);
  return rep;
}

Eigen::MatrixXd pairwise_law(const Eigen::VectorXd& q, int n) {
  if (n < 2) throw ValidationError("pairwise_law: n must be >= 2");
  const int k = static_cast<int>(q.size());
  for (int s = 0; s < k; ++s) integral_count(n * q[s], "pairwise_law: n*q");
  Eigen::MatrixXd law(k, k);
  for (int x = 0; x < k; ++x)
    for (int xp = 0; xp < k; ++xp)
      law(x, xp) = (n * q[xp] - (x == xp ? 1.0 : 0.0)) / (n - 1.0);
  return law;
}

double beta_n(const JointLaw& j, const InfoDensity& d, const Eigen::Matrix3d& sigma,
              const Eigen::Matrix<double, 3, Eigen::Dynamic>& support_basis) {
  const int r = static_cast<int>(support_basis.cols());
  if (r < 1) throw NumericalError("beta_n: empty support");
  const Eigen::MatrixXd proj = support_basis.transpose() * sigma * support_basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (proj + proj.transpose()));
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1e-300, es.eigenvalues().maxCoeff()))
    throw NumericalError("beta_n: covariance singular on the given support");
  const Eigen::MatrixXd whiten =
      es.operatorInverseSqrt() * support_basis.transpose();  // r x 3

  const Channel& ch = j.ch;
  const CondMeanTable t1 = cond_mean_info(j, d, CondTarget::user1);
  const CondMeanTable t2 = cond_mean_info(j, d, CondTarget::user2);
  const std::vector<BlockStats> stats = block_stats(j, d);

  double beta = 0.0;
  for (int u = 0; u < j.inp.u_count(); ++u) {
    const BlockStats& b = stats[u];
    if (b.qu <= 0.0) continue;
    for (int x1 = 0; x1 < ch.nx1; ++x1)
      for (int x2 = 0; x2 < ch.nx2; ++x2) {
        const double q12 = j.inp.q1(u, x1) * j.inp.q2(u, x2);
        if (q12 <= 0.0) continue;
        double inner = 0.0;
        for (int y = 0; y < ch.ny; ++y) {
          const int k = j.index(u, x1, x2, y);
          if (!d.on_support[k]) continue;
          const Eigen::Vector3d resid =
              d.v[k] - t1.at(u, x1, 0) - t2.at(u, 0, x2) + b.mean;
          const double norm = (whiten * resid).norm();
          inner += ch(x1, x2, y) * norm * norm * norm;
        }
        beta += b.qu * q12 * inner;
      }
  }
  return beta;
}

double beta_n(const JointLaw& j, const InfoDensity& d, const DispersionMatrix& sigma_n) {
  return beta_n(j, d, sigma_n.m, Eigen::Matrix3d::Identity());
}

double min_eigenvalue(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(symmetrize(m));
  return es.eigenvalues().minCoeff();
}

}  // namespace macdisp
