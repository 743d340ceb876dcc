#include "macdisp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "macdisp/errors.hpp"
#include "macdisp/mvn.hpp"
#include "macdisp/quadrature.hpp"

namespace macdisp {

namespace {

constexpr std::uint64_t kBlockTrials = 4096;

// Positions grouped by u value, sorted base arrangement per user per block.
struct Layout {
  int n = 0;
  std::vector<int> offset, len;               // per u block
  std::vector<int> base1, base2;              // concatenated sorted blocks
};

std::vector<int> sorted_arrangement(const Composition& comp) {
  std::vector<int> seq;
  seq.reserve(comp.n());
  for (int a = 0; a < comp.counts.size(); ++a)
    seq.insert(seq.end(), comp.counts[a], a);
  return seq;
}

void validate_config(const Channel& ch, const InputSpec& inp, const SimConfig& cfg) {
  if (cfg.n < 1) throw ValidationError("simulate: n must be >= 1");
  if (cfg.trials < 1) throw ValidationError("simulate: trials must be >= 1");
  if (cfg.workers < 1) throw ValidationError("simulate: workers must be >= 1");
  const int blocks = cfg.u_comp.counts.size() == 0 ? 1 : int(cfg.u_comp.counts.size());
  if (inp.u_count() != blocks)
    throw ValidationError("simulate: u composition does not match the input spec");
  if (cfg.u_comp.counts.size() > 0 && cfg.u_comp.n() != cfg.n)
    throw ValidationError("simulate: u composition does not sum to n");
  if (int(cfg.comp1.size()) != blocks || int(cfg.comp2.size()) != blocks)
    throw ValidationError("simulate: one composition per user per u block required");
  for (int u = 0; u < blocks; ++u) {
    const int n_u = cfg.u_comp.counts.size() == 0 ? cfg.n : cfg.u_comp.counts[u];
    if (cfg.comp1[u].counts.size() != ch.nx1 || cfg.comp2[u].counts.size() != ch.nx2)
      throw ValidationError("simulate: composition alphabet mismatch");
    if ((cfg.comp1[u].counts.array() < 0).any() || (cfg.comp2[u].counts.array() < 0).any())
      throw ValidationError("simulate: negative composition count");
    if (cfg.comp1[u].n() != n_u || cfg.comp2[u].n() != n_u)
      throw ValidationError("simulate: composition does not sum to its block length");
  }
}

Layout make_layout(const SimConfig& cfg) {
  Layout lay;
  lay.n = cfg.n;
  const int blocks = int(cfg.comp1.size());
  int at = 0;
  for (int u = 0; u < blocks; ++u) {
    const int n_u = cfg.u_comp.counts.size() == 0 ? cfg.n : cfg.u_comp.counts[u];
    lay.offset.push_back(at);
    lay.len.push_back(n_u);
    const auto b1 = sorted_arrangement(cfg.comp1[u]);
    const auto b2 = sorted_arrangement(cfg.comp2[u]);
    lay.base1.insert(lay.base1.end(), b1.begin(), b1.end());
    lay.base2.insert(lay.base2.end(), b2.begin(), b2.end());
    at += n_u;
  }
  return lay;
}

void shuffle_span(std::vector<int>& v, int first, int len, CounterRng& rng) {
  for (int i = len - 1; i >= 1; --i) {
    const int k = int(rng.below(std::uint64_t(i) + 1));
    std::swap(v[first + i], v[first + k]);
  }
}

int draw_symbol(const Eigen::MatrixXd& rows, int row, int ny, CounterRng& rng) {
  const double r = rng.next_unit();
  double acc = 0.0;
  int last = 0;
  for (int y = 0; y < ny; ++y) {
    const double w = rows(row, y);
    if (w > 0.0) last = y;
    acc += w;
    if (r < acc) return y;
  }
  return last;
}

struct Scratch {
  std::vector<int> x1, x2, xb1, xb2, y;
};

// One channel use of the whole block structure: permuted codewords + output.
// Consumption order per trial is fixed: user-1 shuffles, user-2 shuffles,
// then one uniform per position for the output.
void draw_trial(const Channel& ch, const Layout& lay, CounterRng& rng, Scratch& s) {
  s.x1 = lay.base1;
  s.x2 = lay.base2;
  for (std::size_t u = 0; u < lay.offset.size(); ++u)
    shuffle_span(s.x1, lay.offset[u], lay.len[u], rng);
  for (std::size_t u = 0; u < lay.offset.size(); ++u)
    shuffle_span(s.x2, lay.offset[u], lay.len[u], rng);
  s.y.resize(lay.n);
  for (std::size_t u = 0; u < lay.offset.size(); ++u)
    for (int i = lay.offset[u]; i < lay.offset[u] + lay.len[u]; ++i)
      s.y[i] = draw_symbol(ch.w, ch.pair_index(s.x1[i], s.x2[i]), ch.ny, rng);
}

Eigen::Vector3d density_sum(const JointLaw& law, const InfoDensity& dens,
                            const Layout& lay, const Scratch& s) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (std::size_t u = 0; u < lay.offset.size(); ++u)
    for (int i = lay.offset[u]; i < lay.offset[u] + lay.len[u]; ++i)
      acc += dens.v[law.index(int(u), s.x1[i], s.x2[i], s.y[i])];
  return acc;
}

// Component `comp` of the density summed against possibly resampled codewords;
// -inf as soon as the scored pair cannot produce the observed output.
double scored_sum(const JointLaw& law, const InfoDensity& dens, const Layout& lay,
                  const std::vector<int>& x1, const std::vector<int>& x2,
                  const std::vector<int>& y, int comp) {
  double acc = 0.0;
  for (std::size_t u = 0; u < lay.offset.size(); ++u)
    for (int i = lay.offset[u]; i < lay.offset[u] + lay.len[u]; ++i) {
      const int idx = law.index(int(u), x1[i], x2[i], y[i]);
      if (dens.zero_given_pair[idx]) return -std::numeric_limits<double>::infinity();
      acc += dens.v[idx][comp];
    }
  return acc;
}

// Runs fn(block_index, first_trial, past_trial, scratch) over trial blocks.
// Partial results must be written into per-block slots so the final merge is
// sequential in block order and independent of scheduling.
template <class Fn>
void run_blocks(std::uint64_t trials, int workers, Fn&& fn) {
  const std::uint64_t nblocks = (trials + kBlockTrials - 1) / kBlockTrials;
  std::atomic<std::uint64_t> next{0};
  auto work = [&]() {
    Scratch scratch;
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      const std::uint64_t t0 = b * kBlockTrials;
      fn(b, t0, std::min(trials, t0 + kBlockTrials), scratch);
    }
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

std::uint64_t block_count(std::uint64_t trials) {
  return (trials + kBlockTrials - 1) / kBlockTrials;
}

}  // namespace

SimConfig make_sim_config(const JointLaw& j, int n, std::uint64_t trials,
                          std::uint64_t seed, int workers) {
  if (n < 1) throw ValidationError("make_sim_config: n must be >= 1");
  SimConfig cfg;
  cfg.n = n;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.workers = workers;
  Eigen::VectorXi ulen;
  if (j.inp.nu == 0) {
    cfg.u_comp.counts.resize(0);
    ulen = Eigen::VectorXi::Constant(1, n);
  } else {
    cfg.u_comp = nearest_type(j.inp.q_u, n);
    ulen = cfg.u_comp.counts;
  }
  for (int u = 0; u < j.inp.u_count(); ++u) {
    cfg.comp1.push_back(nearest_type(j.inp.q1.row(u), ulen[u]));
    cfg.comp2.push_back(nearest_type(j.inp.q2.row(u), ulen[u]));
  }
  validate_config(j.ch, j.inp, cfg);
  return cfg;
}

JointLaw realized_law(const Channel& ch, const SimConfig& cfg) {
  InputSpec inp;
  const int blocks = int(cfg.comp1.size());
  inp.nu = cfg.u_comp.counts.size() == 0 ? 0 : blocks;
  if (inp.nu > 0)
    inp.q_u = cfg.u_comp.counts.cast<double>() / double(cfg.n);
  inp.q1.resize(blocks, ch.nx1);
  inp.q2.resize(blocks, ch.nx2);
  for (int u = 0; u < blocks; ++u) {
    const int n_u = inp.nu == 0 ? cfg.n : cfg.u_comp.counts[u];
    if (n_u > 0) {
      inp.q1.row(u) = cfg.comp1[u].counts.cast<double>().transpose() / double(n_u);
      inp.q2.row(u) = cfg.comp2[u].counts.cast<double>().transpose() / double(n_u);
    } else {
      // weight-zero block; any valid row keeps the InputSpec well formed
      inp.q1.row(u).setConstant(1.0 / ch.nx1);
      inp.q2.row(u).setConstant(1.0 / ch.nx2);
    }
  }
  return joint_law(ch, inp);
}

std::vector<int> sample_type_class(const Composition& comp, CounterRng& rng) {
  if (comp.counts.size() == 0 || (comp.counts.array() < 0).any())
    throw ValidationError("sample_type_class: invalid composition");
  std::vector<int> seq = sorted_arrangement(comp);
  shuffle_span(seq, 0, int(seq.size()), rng);
  return seq;
}

MomentEstimate empirical_in_moments(const Channel& ch, const InputSpec& inp,
                                    const SimConfig& cfg) {
  validate_config(ch, inp, cfg);
  const JointLaw law = realized_law(ch, cfg);
  const InfoDensity dens = info_density(law);
  const Layout lay = make_layout(cfg);
  const Eigen::Vector3d shift = cfg.n * mean_vector(law, dens).v;

  struct Part {
    Eigen::Vector3d s1 = Eigen::Vector3d::Zero();
    Eigen::Matrix3d s2 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d s4 = Eigen::Matrix3d::Zero();
  };
  std::vector<Part> parts(block_count(cfg.trials));
  run_blocks(cfg.trials, cfg.workers,
             [&](std::uint64_t b, std::uint64_t t0, std::uint64_t t1, Scratch& s) {
               Part p;
               for (std::uint64_t t = t0; t < t1; ++t) {
                 CounterRng rng(cfg.seed, t);
                 draw_trial(ch, lay, rng, s);
                 const Eigen::Vector3d d = density_sum(law, dens, lay, s) - shift;
                 const Eigen::Matrix3d o = d * d.transpose();
                 p.s1 += d;
                 p.s2 += o;
                 p.s4 += o.cwiseProduct(o);
               }
               parts[b] = p;
             });

  Part tot;
  for (const Part& p : parts) {
    tot.s1 += p.s1;
    tot.s2 += p.s2;
    tot.s4 += p.s4;
  }
  const double T = double(cfg.trials);
  MomentEstimate est;
  est.trials = cfg.trials;
  est.mean = shift + tot.s1 / T;
  est.cov = (tot.s2 - tot.s1 * tot.s1.transpose() / T) / std::max(1.0, T - 1.0);
  const Eigen::Matrix3d second = tot.s2 / T;
  est.cov_std_error =
      ((tot.s4 / T - second.cwiseProduct(second)).cwiseMax(0.0) / T).cwiseSqrt();
  est.mean_std_error = (est.cov.diagonal().cwiseMax(0.0) / T).cwiseSqrt();
  return est;
}

TailEstimate excess_prob(const Channel& ch, const InputSpec& inp,
                         const SimConfig& cfg, int which, double gamma) {
  if (which != 1 && which != 2 && which != 12)
    throw ValidationError("excess_prob: component must be 1, 2, or 12");
  validate_config(ch, inp, cfg);
  const JointLaw law = realized_law(ch, cfg);
  const InfoDensity dens = info_density(law);
  const Layout lay = make_layout(cfg);
  const bool bar1 = which != 2;
  const bool bar2 = which != 1;
  const int comp = which == 1 ? 0 : which == 2 ? 1 : 2;

  std::vector<std::uint64_t> hits(block_count(cfg.trials), 0);
  run_blocks(cfg.trials, cfg.workers,
             [&](std::uint64_t b, std::uint64_t t0, std::uint64_t t1, Scratch& s) {
               std::uint64_t h = 0;
               for (std::uint64_t t = t0; t < t1; ++t) {
                 CounterRng rng(cfg.seed, t);
                 draw_trial(ch, lay, rng, s);
                 if (bar1) {
                   s.xb1 = lay.base1;
                   for (std::size_t u = 0; u < lay.offset.size(); ++u)
                     shuffle_span(s.xb1, lay.offset[u], lay.len[u], rng);
                 }
                 if (bar2) {
                   s.xb2 = lay.base2;
                   for (std::size_t u = 0; u < lay.offset.size(); ++u)
                     shuffle_span(s.xb2, lay.offset[u], lay.len[u], rng);
                 }
                 const double score = scored_sum(law, dens, lay, bar1 ? s.xb1 : s.x1,
                                                 bar2 ? s.xb2 : s.x2, s.y, comp);
                 if (score > gamma) ++h;
               }
               hits[b] = h;
             });

  std::uint64_t total = 0;
  for (std::uint64_t h : hits) total += h;
  TailEstimate est;
  est.trials = cfg.trials;
  est.estimate = double(total) / double(cfg.trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / double(cfg.trials));
  return est;
}

PeBound pe_upper_bound(const Channel& ch, const InputSpec& inp,
                       const SimConfig& cfg, double r1, double r2) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0))
    throw ValidationError("pe_upper_bound: rates must be nonnegative");
  validate_config(ch, inp, cfg);
  const JointLaw law = realized_law(ch, cfg);
  const InfoDensity dens = info_density(law);
  const Layout lay = make_layout(cfg);

  PeBound out;
  out.poly_degree = ch.nx1 + ch.nx2 - 2;
  const double n = double(cfg.n);
  const double slack = (out.poly_degree + 0.5) * std::log(n);
  out.gamma << cfg.n * r1 + slack, cfg.n * r2 + slack, cfg.n * (r1 + r2) + slack;
  // each M_v e^{-gamma_v} collapses to n^{-(d+1/2)} by construction
  out.penalty = 3.0 * std::pow(n + 1.0, out.poly_degree) *
                std::pow(n, -(out.poly_degree + 0.5));

  std::vector<std::uint64_t> hits(block_count(cfg.trials), 0);
  run_blocks(cfg.trials, cfg.workers,
             [&](std::uint64_t b, std::uint64_t t0, std::uint64_t t1, Scratch& s) {
               std::uint64_t h = 0;
               for (std::uint64_t t = t0; t < t1; ++t) {
                 CounterRng rng(cfg.seed, t);
                 draw_trial(ch, lay, rng, s);
                 const Eigen::Vector3d v = density_sum(law, dens, lay, s);
                 if (v[0] > out.gamma[0] && v[1] > out.gamma[1] && v[2] > out.gamma[2]) ++h;
               }
               hits[b] = h;
             });
  std::uint64_t total = 0;
  for (std::uint64_t h : hits) total += h;
  out.joint_success.trials = cfg.trials;
  out.joint_success.estimate = double(total) / double(cfg.trials);
  out.joint_success.std_error = std::sqrt(
      out.joint_success.estimate * (1.0 - out.joint_success.estimate) / double(cfg.trials));
  out.bound = std::clamp(1.0 - out.joint_success.estimate + out.penalty, 0.0, 1.0);

  const MomentReport rep = finite_n_cov(law, dens, cfg.n);
  const Eigen::Vector3d w = (out.gamma - cfg.n * mean_vector(law, dens).v) / std::sqrt(n);
  out.gaussian_success = lower_orthant(decompose(rep.sigma_n().m), -w);
  return out;
}

double clt_distance(const Channel& ch, const InputSpec& inp, const SimConfig& cfg) {
  validate_config(ch, inp, cfg);
  const JointLaw law = realized_law(ch, cfg);
  const InfoDensity dens = info_density(law);
  const GaussianSpec spec = decompose(finite_n_cov(law, dens, cfg.n).sigma_n().m);
  return clt_distance(ch, inp, cfg, spec.basis);
}

double clt_distance(const Channel& ch, const InputSpec& inp, const SimConfig& cfg,
                    const Eigen::Matrix<double, 3, Eigen::Dynamic>& basis) {
  validate_config(ch, inp, cfg);
  const int r = int(basis.cols());
  if (r == 0) return 0.0;
  if (r > 3 || basis.rows() != 3)
    throw ValidationError("clt_distance: basis must be 3 x r with r <= 3");
  const JointLaw law = realized_law(ch, cfg);
  const InfoDensity dens = info_density(law);
  const Layout lay = make_layout(cfg);
  const Eigen::Vector3d shift = cfg.n * mean_vector(law, dens).v;
  const Eigen::Matrix3d sigma = finite_n_cov(law, dens, cfg.n).sigma_n().m;

  const Eigen::MatrixXd proj = basis.transpose() * sigma * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1e-300, es.eigenvalues().maxCoeff()))
    throw NumericalError("clt_distance: covariance is singular on the requested support");
  const Eigen::MatrixXd whiten =
      es.operatorInverseSqrt() * basis.transpose() / std::sqrt(double(cfg.n));

  constexpr int kGrid = 11;
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(kGrid, -2.5, 2.5);
  // Lattice-valued sums can land exactly on a corner up to roundoff, and the
  // CDF at a corner includes that atom; without a tolerance the atom's mass
  // splits between adjacent cells on rounding noise.
  constexpr double kCornerTie = 1e-9;
  const int bins = kGrid + 1;
  int cells = 1;
  for (int j = 0; j < r; ++j) cells *= bins;

  std::vector<std::vector<std::uint32_t>> hists(block_count(cfg.trials));
  run_blocks(cfg.trials, cfg.workers,
             [&](std::uint64_t b, std::uint64_t t0, std::uint64_t t1, Scratch& s) {
               std::vector<std::uint32_t> h(cells, 0);
               for (std::uint64_t t = t0; t < t1; ++t) {
                 CounterRng rng(cfg.seed, t);
                 draw_trial(ch, lay, rng, s);
                 const Eigen::VectorXd z =
                     whiten * (density_sum(law, dens, lay, s) - shift);
                 int flat = 0, stride = 1;
                 for (int j = 0; j < r; ++j) {
                   const int c = int(std::lower_bound(grid.data(), grid.data() + kGrid,
                                                      z[j] - kCornerTie) -
                                     grid.data());
                   flat += c * stride;
                   stride *= bins;
                 }
                 ++h[flat];
               }
               hists[b] = std::move(h);
             });

  std::vector<std::uint64_t> hist(cells, 0);
  for (const auto& h : hists)
    for (int c = 0; c < cells; ++c) hist[c] += h[c];
  // prefix sums -> counts of trials with cell index <= a on every axis
  int stride = 1;
  for (int j = 0; j < r; ++j) {
    for (int c = 0; c < cells; ++c)
      if ((c / stride) % bins > 0) hist[c] += hist[c - stride];
    stride *= bins;
  }

  Eigen::VectorXd phi(kGrid);
  for (int a = 0; a < kGrid; ++a) phi[a] = normal_cdf(grid[a]);
  double worst = 0.0;
  std::vector<int> a(r, 0);
  for (;;) {
    int flat = 0, st = 1;
    double target = 1.0;
    for (int j = 0; j < r; ++j) {
      flat += a[j] * st;
      st *= bins;
      target *= phi[a[j]];
    }
    worst = std::max(worst,
                     std::abs(double(hist[flat]) / double(cfg.trials) - target));
    int j = 0;
    while (j < r && ++a[j] == kGrid) a[j++] = 0;
    if (j == r) break;
  }
  return worst;
}

}  // namespace macdisp
