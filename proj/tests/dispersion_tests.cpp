#include <cmath>
#include <vector>

#include "doctest.h"
#include "macdisp/dispersion.hpp"
#include "macdisp/model.hpp"
#include "macdisp/montecarlo.hpp"
#include "macdisp/mvn.hpp"
#include "macdisp/region.hpp"
#include "support/testutil.hpp"

using namespace macdisp;
using testutil::random_channel;
using testutil::random_inputs;

namespace {

Channel ignore_inputs_channel(CounterRng& rng, int nx1, int nx2, int ny) {
  Channel ch = random_channel(rng, nx1, nx2, ny);
  for (int r = 1; r < nx1 * nx2; ++r) ch.w.row(r) = ch.w.row(0);
  return ch;
}

// E over u of the covariance of a conditional-mean table under the input law.
Eigen::Matrix3d avg_cond_cov(const JointLaw& j, const CondMeanTable& t) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (int u = 0; u < j.inp.u_count(); ++u) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
    for (int x1 = 0; x1 < (t.n1 == 1 ? 1 : j.ch.nx1); ++x1)
      for (int x2 = 0; x2 < (t.n2 == 1 ? 1 : j.ch.nx2); ++x2) {
        double w = 1.0;
        if (t.n1 != 1) w *= j.inp.q1(u, x1);
        if (t.n2 != 1) w *= j.inp.q2(u, x2);
        if (w <= 0.0 || !t.present_at(u, x1, x2)) continue;
        const Eigen::Vector3d& v = t.at(u, x1, x2);
        mean += w * v;
        second += w * (v * v.transpose());
      }
    out += j.inp.u_prob(u) * (second - mean * mean.transpose());
  }
  return out;
}

SimConfig config_from_counts(const Composition& u_comp, std::vector<Composition> c1,
                             std::vector<Composition> c2) {
  SimConfig cfg;
  cfg.n = c1[0].n();
  for (std::size_t b = 1; b < c1.size(); ++b) cfg.n += c1[b].n();
  cfg.trials = 1;
  cfg.u_comp = u_comp;
  cfg.comp1 = std::move(c1);
  cfg.comp2 = std::move(c2);
  return cfg;
}

Composition counts2(int a, int b) {
  Composition c;
  c.counts = Eigen::Vector2i(a, b);
  return c;
}

}  // namespace

TEST_SUITE("dispersion") {

TEST_CASE("mean vector vanishes for an input-independent channel") {
  CounterRng rng(101, 0);
  const Channel ch = ignore_inputs_channel(rng, 2, 2, 3);
  const JointLaw j = joint_law(ch, random_inputs(rng, 2, 2, 0));
  const RateVector i = mean_vector(j, info_density(j));
  CHECK(i.v.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("collision rates match the entropy oracle and frozen values") {
  const JointLaw j = joint_law(collision_channel(), collision_inputs(0.2, 0.2));
  const RateVector i = mean_vector(j, info_density(j));
  CHECK((i.v - testutil::entropy_mi(j)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(i.r1() - 0.8393669903436434) < 1e-12);
  CHECK(std::abs(i.r2() - 0.8393669903436434) < 1e-12);
  CHECK(std::abs(i.r12() - 1.6787339806872867) < 1e-12);
}

TEST_CASE("all dispersion matrices vanish for an input-independent channel") {
  CounterRng rng(102, 0);
  const Channel ch = ignore_inputs_channel(rng, 2, 3, 3);
  const JointLaw j = joint_law(ch, random_inputs(rng, 2, 3, 2));
  const InfoDensity d = info_density(j);
  CHECK(cov_cc(j, d).m.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(cov_iid(j, d).m.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(cov_cc_iid(j, d, 1).m.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(cov_cc_iid(j, d, 2).m.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(cov_joint(j, d).m.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("collision dispersion is rank one along (1,1,2)") {
  const JointLaw j = joint_law(collision_channel(), collision_inputs(0.2, 0.2));
  const DispersionMatrix v = cov_cc(j, info_density(j));

  const double a = 0.02767409360168837;
  Eigen::Vector3d dvec(1.0, 1.0, 2.0);
  CHECK((v.m - a * dvec * dvec.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  const GaussianSpec spec = decompose(v.m);
  REQUIRE(spec.rank == 1);
  CHECK(std::abs(std::abs(spec.basis.col(0).dot(dvec.normalized())) - 1.0) < 1e-12);

  const DispersionMatrix viid = cov_iid(j, info_density(j));
  for (int k = 0; k < 3; ++k) CHECK(v.m(k, k) < viid.m(k, k) - 1e-3);
  CHECK(std::abs(viid.m(0, 0) - 0.208033) < 2e-6);
  CHECK(std::abs(viid.m(2, 2) - 0.252795) < 2e-6);
}

TEST_CASE("constant-composition dispersion recomposes from conditional covariances") {
  for (std::uint64_t seed : {111, 112, 113}) {
    CounterRng rng(seed, 0);
    const Channel ch = random_channel(rng, 2, 2, 3);
    const JointLaw j = joint_law(ch, random_inputs(rng, 2, 2, seed == 113 ? 2 : 0));
    const InfoDensity d = info_density(j);

    const Eigen::Matrix3d recomposed =
        cov_joint(j, d).m + avg_cond_cov(j, cond_mean_info(j, d, CondTarget::both)) -
        avg_cond_cov(j, cond_mean_info(j, d, CondTarget::user1)) -
        avg_cond_cov(j, cond_mean_info(j, d, CondTarget::user2));
    CHECK((cov_cc(j, d).m - recomposed).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("total covariance of pair means splits into user-1 part plus remainder") {
  CounterRng rng(114, 0);
  const Channel ch = random_channel(rng, 3, 2, 4);
  const JointLaw j = joint_law(ch, random_inputs(rng, 3, 2, 2));
  const InfoDensity d = info_density(j);
  const CondMeanTable t12 = cond_mean_info(j, d, CondTarget::both);
  const CondMeanTable t1 = cond_mean_info(j, d, CondTarget::user1);

  for (int u = 0; u < 2; ++u) {
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    Eigen::Matrix3d pair_second = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d user1_second = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d inner = Eigen::Matrix3d::Zero();
    for (int x1 = 0; x1 < 3; ++x1) {
      Eigen::Vector3d row_mean = Eigen::Vector3d::Zero();
      Eigen::Matrix3d row_second = Eigen::Matrix3d::Zero();
      for (int x2 = 0; x2 < 2; ++x2) {
        const double w = j.inp.q2(u, x2);
        const Eigen::Vector3d& v = t12.at(u, x1, x2);
        row_mean += w * v;
        row_second += w * (v * v.transpose());
      }
      const double w1 = j.inp.q1(u, x1);
      m += w1 * row_mean;
      pair_second += w1 * row_second;
      user1_second += w1 * (t1.at(u, x1, 0) * t1.at(u, x1, 0).transpose());
      inner += w1 * (row_second - row_mean * row_mean.transpose());
      CHECK((row_mean - t1.at(u, x1, 0)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const Eigen::Matrix3d pair_cov = pair_second - m * m.transpose();
    const Eigen::Matrix3d user1_cov = user1_second - m * m.transpose();
    CHECK((pair_cov - (user1_cov + inner)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("the four dispersion matrices are ordered in the psd sense") {
  CounterRng rng(120, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx1 = 2 + static_cast<int>(rng.below(2));
    const int nx2 = 2 + static_cast<int>(rng.below(2));
    const int ny = 2 + static_cast<int>(rng.below(3));
    const int nu = trial % 3 == 0 ? 2 : 0;
    const Channel ch = random_channel(rng, nx1, nx2, ny);
    const JointLaw j = joint_law(ch, random_inputs(rng, nx1, nx2, nu));
    const InfoDensity d = info_density(j);

    const Eigen::Matrix3d v = cov_cc(j, d).m;
    const Eigen::Matrix3d viid = cov_iid(j, d).m;
    const Eigen::Matrix3d v1 = cov_cc_iid(j, d, 1).m;
    const Eigen::Matrix3d v2 = cov_cc_iid(j, d, 2).m;
    const Eigen::Matrix3d vj = cov_joint(j, d).m;
    CHECK(min_eigenvalue(viid - v1) >= -1e-9);
    CHECK(min_eigenvalue(viid - v2) >= -1e-9);
    CHECK(min_eigenvalue(v1 - v) >= -1e-9);
    CHECK(min_eigenvalue(v2 - v) >= -1e-9);
    CHECK(min_eigenvalue(v - vj) >= -1e-9);
  }
}

TEST_CASE("exact finite-length covariance matches exhaustive enumeration") {
  CounterRng rng(130, 0);

  SUBCASE("single block, length 2, binary alphabets") {
    const Channel ch = random_channel(rng, 2, 2, 2);
    const SimConfig cfg = config_from_counts({}, {counts2(1, 1)}, {counts2(1, 1)});
    const JointLaw j = realized_law(ch, cfg);
    const InfoDensity d = info_density(j);
    const auto brute = testutil::brute_force_moments(j, d, cfg);
    const MomentReport rep = finite_n_cov(j, d, 2);
    CHECK((rep.exact_cov - brute.cov).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((2.0 * mean_vector(j, d).v - brute.mean).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("single block, length 3, three outputs") {
    const Channel ch = random_channel(rng, 2, 2, 3);
    const SimConfig cfg = config_from_counts({}, {counts2(2, 1)}, {counts2(1, 2)});
    const JointLaw j = realized_law(ch, cfg);
    const InfoDensity d = info_density(j);
    const auto brute = testutil::brute_force_moments(j, d, cfg);
    const MomentReport rep = finite_n_cov(j, d, 3);
    CHECK((rep.exact_cov - brute.cov).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((3.0 * mean_vector(j, d).v - brute.mean).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("two time-sharing blocks with degenerate corners") {
    const Channel ch = random_channel(rng, 2, 2, 2);
    SimConfig cfg = config_from_counts(counts2(2, 2), {counts2(1, 1), counts2(2, 0)},
                                       {counts2(2, 0), counts2(1, 1)});
    const JointLaw j = realized_law(ch, cfg);
    const InfoDensity d = info_density(j);
    const auto brute = testutil::brute_force_moments(j, d, cfg);
    const MomentReport rep = finite_n_cov(j, d, 4);
    CHECK((rep.exact_cov - brute.cov).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("cross-term decomposition has the documented structure") {
  const JointLaw j = joint_law(collision_channel(), collision_inputs(0.2, 0.2));
  const InfoDensity d = info_density(j);
  const int n = 20;
  const MomentReport rep = finite_n_cov(j, d, n);
  REQUIRE(rep.blocks.size() == 1);
  const BlockMoments& b = rep.blocks[0];

  CHECK(b.m1.cwiseAbs().maxCoeff() < 1e-12);
  // m2 and m3 are negative scalings of covariances, so their top eigenvalue
  // cannot exceed round-off.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> e2(b.m2), e3(b.m3);
  CHECK(e2.eigenvalues().maxCoeff() <= 1e-12);
  CHECK(e3.eigenvalues().maxCoeff() <= 1e-12);

  const Eigen::Matrix3d recomposed =
      n * b.single_cov + (static_cast<double>(n) * n - n) * (b.m1 + b.m2 + b.m3 + b.m4);
  CHECK((recomposed - b.cov).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rep.exact_cov - b.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("finite-length covariance stays within a constant of its linear growth") {
  const JointLaw j = joint_law(collision_channel(), collision_inputs(0.2, 0.2));
  const InfoDensity d = info_density(j);
  const Eigen::Matrix3d v = cov_cc(j, d).m;
  std::vector<double> gap;
  for (int n : {10, 100, 1000})
    gap.push_back((finite_n_cov(j, d, n).exact_cov - n * v).cwiseAbs().maxCoeff());
  CHECK(gap[1] <= gap[0] * 1.001);
  CHECK(gap[2] <= gap[1] * 1.001);
  CHECK(gap[0] <= 1.2 * gap[2]);
}

TEST_CASE("scaled covariance approaches the dispersion at rate 1/n") {
  CounterRng rng(131, 0);
  const Channel ch = random_channel(rng, 2, 2, 3);
  InputSpec inp;
  inp.q1 = Eigen::MatrixXd::Constant(1, 2, 0.5);
  inp.q2 = Eigen::MatrixXd::Constant(1, 2, 0.5);
  const JointLaw j = joint_law(ch, inp);
  const InfoDensity d = info_density(j);
  const Eigen::Matrix3d v = cov_cc(j, d).m;

  std::vector<double> scaled;
  for (int n : {10, 100, 1000, 10000}) {
    const double gap = (finite_n_cov(j, d, n).sigma_n().m - v).cwiseAbs().maxCoeff();
    scaled.push_back(n * gap);
  }
  double lo = scaled[0], hi = scaled[0];
  for (double s : scaled) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  CHECK(hi / lo < 1.25);
}

TEST_CASE("non-integral compositions are rejected with rounding advice") {
  const JointLaw j = joint_law(collision_channel(), collision_inputs(0.2, 0.2));
  const InfoDensity d = info_density(j);
  CHECK_THROWS_WITH_AS(finite_n_cov(j, d, 7), doctest::Contains("nearest_type"),
                       ValidationError);
  CHECK_THROWS_AS(finite_n_cov(j, d, 1), ValidationError);
}

TEST_CASE("two-position law forces a swap for the half-half type of length two") {
  Eigen::VectorXd q(2);
  q << 0.5, 0.5;
  const Eigen::MatrixXd law = pairwise_law(q, 2);
  CHECK(law(0, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(law(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(law(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(law(1, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("two-position law rows are stochastic and need integral types") {
  Eigen::VectorXd q(3);
  q << 0.6, 0.2, 0.2;
  const Eigen::MatrixXd law = pairwise_law(q, 5);
  for (int r = 0; r < 3; ++r) CHECK(law.row(r).sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(law(0, 0) == doctest::Approx(0.5).epsilon(1e-14));   // (3-1)/4
  CHECK(law(1, 0) == doctest::Approx(0.75).epsilon(1e-14));  // 3/4

  CHECK_THROWS_AS(pairwise_law(q, 4), ValidationError);  // 4q is not integral
  CHECK_THROWS_AS(pairwise_law(q, 1), ValidationError);
}

TEST_CASE("third-moment sum rejects singular scaling and is otherwise stable") {
  CounterRng rng(141, 0);
  const Channel flat = ignore_inputs_channel(rng, 2, 2, 2);
  InputSpec inp;
  inp.q1 = Eigen::MatrixXd::Constant(1, 2, 0.5);
  inp.q2 = Eigen::MatrixXd::Constant(1, 2, 0.5);
  const JointLaw j0 = joint_law(flat, inp);
  const InfoDensity d0 = info_density(j0);
  CHECK_THROWS_AS(beta_n(j0, d0, finite_n_cov(j0, d0, 10).sigma_n()), NumericalError);

  const JointLaw j = joint_law(collision_channel(), collision_inputs(0.2, 0.2));
  const InfoDensity d = info_density(j);
  const Eigen::Matrix3d v = cov_cc(j, d).m;
  const auto basis = decompose(v).basis;

  const double limit = beta_n(j, d, v, basis);
  CHECK(limit > 0.0);
  std::vector<double> values;
  for (int n : {50, 100, 500, 5000}) {
    const double b = beta_n(j, d, finite_n_cov(j, d, n).sigma_n().m, basis);
    values.push_back(b);
    if (n >= 100) {
      CHECK(b >= 0.9 * limit);
      CHECK(b <= 1.1 * limit);
    }
  }
  double lo = values[0], hi = values[0];
  for (double b : values) {
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  CHECK(hi / lo < 1.05);
}

}  // TEST_SUITE
