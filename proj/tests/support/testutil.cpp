#include "support/testutil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace testutil {

using namespace macdisp;

namespace {

Eigen::VectorXd random_simplex_row(CounterRng& rng, int k) {
  Eigen::VectorXd row(k);
  for (int i = 0; i < k; ++i) row[i] = -std::log(1.0 - rng.next_unit());
  return row / row.sum();
}

}  // namespace

Channel random_channel(CounterRng& rng, int nx1, int nx2, int ny) {
  Channel ch;
  ch.nx1 = nx1;
  ch.nx2 = nx2;
  ch.ny = ny;
  ch.w.resize(nx1 * nx2, ny);
  for (int r = 0; r < nx1 * nx2; ++r) ch.w.row(r) = random_simplex_row(rng, ny);
  return ch;
}

InputSpec random_inputs(CounterRng& rng, int nx1, int nx2, int nu) {
  InputSpec inp;
  inp.nu = nu;
  const int rows = nu == 0 ? 1 : nu;
  if (nu > 0) inp.q_u = random_simplex_row(rng, nu);
  inp.q1.resize(rows, nx1);
  inp.q2.resize(rows, nx2);
  for (int u = 0; u < rows; ++u) {
    inp.q1.row(u) = random_simplex_row(rng, nx1);
    inp.q2.row(u) = random_simplex_row(rng, nx2);
  }
  return inp;
}

Composition random_composition(CounterRng& rng, int symbols, int n) {
  Composition comp;
  comp.counts = Eigen::VectorXi::Zero(symbols);
  for (int i = 0; i < n; ++i) comp.counts[static_cast<int>(rng.below(symbols))] += 1;
  return comp;
}

Eigen::Vector3d entropy_mi(const JointLaw& j) {
  const Channel& ch = j.ch;

  // H(Y | conditioning) as -sum p(u,x1,x2,y) log p(y | conditioning).
  double h_given_all = 0.0, h_given_x2u = 0.0, h_given_x1u = 0.0, h_given_u = 0.0;
  for (int u = 0; u < j.inp.u_count(); ++u)
    for (int x1 = 0; x1 < ch.nx1; ++x1)
      for (int x2 = 0; x2 < ch.nx2; ++x2)
        for (int y = 0; y < ch.ny; ++y) {
          const double p = j.p[j.index(u, x1, x2, y)];
          if (p <= 0.0) continue;
          h_given_all -= p * std::log(ch(x1, x2, y));
          h_given_x2u -= p * std::log(j.py_given_x2u(u * ch.nx2 + x2, y));
          h_given_x1u -= p * std::log(j.py_given_x1u(u * ch.nx1 + x1, y));
          h_given_u -= p * std::log(j.py_given_u(u, y));
        }
  return {h_given_x2u - h_given_all, h_given_x1u - h_given_all, h_given_u - h_given_all};
}

namespace {

std::vector<int> sorted_expansion(const Composition& comp) {
  std::vector<int> seq;
  for (int s = 0; s < comp.counts.size(); ++s)
    for (int c = 0; c < comp.counts[s]; ++c) seq.push_back(s);
  return seq;
}

std::vector<std::vector<int>> all_arrangements(const Composition& comp) {
  std::vector<int> seq = sorted_expansion(comp);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(seq);
  } while (std::next_permutation(seq.begin(), seq.end()));
  return out;
}

// Accumulates sum-vector moments over all output sequences of one codeword pair.
void enumerate_outputs(const JointLaw& j, const InfoDensity& d, int u,
                       const std::vector<int>& s1, const std::vector<int>& s2, int pos,
                       double prob, const Eigen::Vector3d& sum, double pair_weight,
                       double& tot, Eigen::Vector3d& m, Eigen::Matrix3d& s2nd) {
  const int n = static_cast<int>(s1.size());
  if (pos == n) {
    const double w = pair_weight * prob;
    tot += w;
    m += w * sum;
    s2nd += w * (sum * sum.transpose());
    return;
  }
  for (int y = 0; y < j.ch.ny; ++y) {
    const double pw = j.ch(s1[pos], s2[pos], y);
    if (pw <= 0.0) continue;
    enumerate_outputs(j, d, u, s1, s2, pos + 1, prob * pw,
                      sum + d.v[j.index(u, s1[pos], s2[pos], y)], pair_weight, tot, m, s2nd);
  }
}

}  // namespace

BruteMoments brute_force_moments(const JointLaw& j, const InfoDensity& d, const SimConfig& cfg) {
  BruteMoments out;
  const int blocks = static_cast<int>(cfg.comp1.size());
  for (int u = 0; u < blocks; ++u) {
    if (cfg.comp1[u].n() == 0) continue;
    const auto arr1 = all_arrangements(cfg.comp1[u]);
    const auto arr2 = all_arrangements(cfg.comp2[u]);
    const double pair_weight = 1.0 / (static_cast<double>(arr1.size()) * arr2.size());

    double tot = 0.0;
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    Eigen::Matrix3d s2nd = Eigen::Matrix3d::Zero();
    for (const auto& s1 : arr1)
      for (const auto& s2 : arr2)
        enumerate_outputs(j, d, u, s1, s2, 0, 1.0, Eigen::Vector3d::Zero(), pair_weight, tot, m,
                          s2nd);
    m /= tot;
    s2nd /= tot;
    out.mean += m;
    out.cov += s2nd - m * m.transpose();  // blocks are independent
  }
  return out;
}

double chi2_quantile_999(int df) {
  switch (df) {
    case 1: return 10.827566;
    case 2: return 13.815511;
    case 3: return 16.266236;
    case 5: return 20.515006;
    case 9: return 27.877165;
    case 11: return 31.264134;
    case 14: return 36.123274;
    case 19: return 43.820196;
    case 29: return 58.301173;
    case 59: return 98.324234;
    case 89: return 135.977567;
    case 119: return 172.417682;
    default: throw std::out_of_range("chi2_quantile_999: df not in the frozen table");
  }
}

double normal_moment(int k) {
  if (k % 2 == 1) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j >= 2; j -= 2) m *= j;
  return m;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

double mc_orthant(const Eigen::Matrix<double, 3, Eigen::Dynamic>& support_sqrt,
                  const Eigen::Vector3d& z, std::uint64_t samples, std::uint64_t seed) {
  const int r = static_cast<int>(support_sqrt.cols());
  if (r == 0) return z.minCoeff() >= 0.0 ? 1.0 : 0.0;

  CounterRng rng(seed, 0x6f7263686172746cull);
  double spare = 0.0;
  bool has_spare = false;
  auto normal = [&]() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const auto pr = rng.next_normal_pair();
    spare = pr.second;
    has_spare = true;
    return pr.first;
  };

  Eigen::VectorXd g(r);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < samples; ++t) {
    for (int i = 0; i < r; ++i) g[i] = normal();
    const Eigen::Vector3d x = support_sqrt * g;
    if (x[0] <= z[0] && x[1] <= z[1] && x[2] <= z[2]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

std::string temp_dir() {
  char buf[] = "/tmp/macdisp_test_XXXXXX";
  if (mkdtemp(buf) == nullptr) throw std::runtime_error("mkdtemp failed");
  return buf;
}

}  // namespace testutil
