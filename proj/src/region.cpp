#include "macdisp/region.hpp"

#include <algorithm>
#include <cmath>

namespace macdisp {

namespace {

// Rays ordered so that emitted points run left-to-right (r1 up, r2 down).
std::vector<std::pair<double, double>> ray_directions(int resolution) {
  std::vector<std::pair<double, double>> dirs(resolution);
  const double half_pi = 1.5707963267948966192;
  for (int k = 0; k < resolution; ++k) {
    const double theta = half_pi * (1.0 - static_cast<double>(k) / (resolution - 1));
    dirs[k] = {std::cos(theta), std::sin(theta)};
  }
  dirs.front().first = 0.0;  // exact axes at the endpoints
  dirs.back().second = 0.0;
  return dirs;
}

void dedupe(std::vector<Eigen::Vector2d>& pts) {
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return (a - b).cwiseAbs().maxCoeff() < 1e-15;
                        }),
            pts.end());
}

}  // namespace

RegionBoundary first_order_region(const RateVector& i, int resolution) {
  if (resolution < 16) throw ValidationError("first_order_region: resolution must be >= 16");
  if ((i.v.array() < 0).any()) throw ValidationError("first_order_region: negative rate");
  RegionBoundary b;
  b.kind = RegionKind::first_order;
  b.prov.i = i;
  for (const auto& [c, s] : ray_directions(resolution)) {
    double t = std::numeric_limits<double>::infinity();
    if (c > 0.0) t = std::min(t, i.r1() / c);
    if (s > 0.0) t = std::min(t, i.r2() / s);
    if (c + s > 0.0) t = std::min(t, i.r12() / (c + s));
    if (!std::isfinite(t)) t = 0.0;
    b.points.emplace_back(t * c, t * s);
  }
  dedupe(b.points);
  return b;
}

bool second_order_member(const RateVector& i, const GaussianSpec& spec,
                         const RegionConfig& cfg, double r1, double r2) {
  if (cfg.n < 1 || !(cfg.eps > 0.0 && cfg.eps < 1.0))
    throw ValidationError("second_order_member: bad config");
  const double sqn = std::sqrt(static_cast<double>(cfg.n));
  const Eigen::Vector3d z = sqn * (i.v - RateVector::rates(r1, r2).v);
  return qinv_member(spec, cfg.eps, z);
}

bool second_order_member(const RateVector& i, const DispersionMatrix& v,
                         const RegionConfig& cfg, double r1, double r2) {
  return second_order_member(i, decompose(v.m), cfg, r1, r2);
}

RegionBoundary trace_boundary(const RateVector& i, const DispersionMatrix& v,
                              const RegionConfig& cfg) {
  if (cfg.resolution < 16) throw ValidationError("trace_boundary: resolution must be >= 16");
  const GaussianSpec spec = decompose(v.m);
  RegionBoundary b;
  b.kind = RegionKind::second_order;
  b.prov.i = i;
  b.prov.v = spec.cov;
  b.prov.has_v = true;
  b.prov.n = cfg.n;
  b.prov.eps = cfg.eps;
  b.prov.rank = spec.rank;
  b.prov.quad_tol = 1e-7;

  auto member = [&](double r1, double r2) {
    return second_order_member(i, spec, cfg, r1, r2);
  };
  if (!member(0.0, 0.0)) {
    b.empty_region = true;
    return b;
  }

  const double start = std::max(i.v.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(double(cfg.n)));
  for (const auto& [c, s] : ray_directions(cfg.resolution)) {
    double t_in = 0.0, t_out = start;
    int guard = 0;
    while (member(t_out * c, t_out * s)) {
      t_in = t_out;
      t_out *= 2.0;
      if (++guard > 200) throw NumericalError("trace_boundary: unbounded region");
    }
    // gap well under 1e-6 relative so the emitted point scaled by 1+1e-6
    // lands at or beyond the known-outside radius
    while (t_out - t_in > 2e-7 * std::max(t_in, 1e-12)) {
      const double mid = 0.5 * (t_in + t_out);
      (member(mid * c, mid * s) ? t_in : t_out) = mid;
    }
    b.points.emplace_back(t_in * c, t_in * s);
  }
  dedupe(b.points);
  return b;
}

Channel collision_channel() {
  Channel ch;
  ch.nx1 = ch.nx2 = 3;
  ch.ny = 6;
  ch.w = Eigen::MatrixXd::Zero(9, 6);
  auto out = [](int x1, int x2) {
    if (x1 != 0 && x2 != 0) return 5;            // collision symbol
    if (x1 == 0) return x2;                      // (0,0),(0,1),(0,2)
    return 2 + x1;                               // (1,0),(2,0)
  };
  for (int x1 = 0; x1 < 3; ++x1)
    for (int x2 = 0; x2 < 3; ++x2) ch.w(ch.pair_index(x1, x2), out(x1, x2)) = 1.0;
  return ch;
}

InputSpec collision_inputs(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 < 0.5) || !(p2 >= 0.0 && p2 < 0.5))
    throw ValidationError("collision_inputs: p must lie in [0, 1/2)");
  InputSpec inp;
  inp.nu = 0;
  inp.q1.resize(1, 3);
  inp.q2.resize(1, 3);
  inp.q1 << 1.0 - 2.0 * p1, p1, p1;
  inp.q2 << 1.0 - 2.0 * p2, p2, p2;
  return inp;
}

std::pair<double, double> optimality_roots() {
  // First root: with symmetric inputs the closed-form criterion reduces to
  // Var[log 1/Q1(X1)] = 0, i.e. uniform Q1, i.e. p = 1/3.
  const double analytic = 1.0 / 3.0;

  // Second root: sign change of i1^(1)(x1=0) - i1^(1)(x1=1) at p1 = p2 = p.
  const Channel ch = collision_channel();
  auto gap = [&](double p) {
    const JointLaw j = joint_law(ch, collision_inputs(p, p));
    const InfoDensity d = info_density(j);
    const CondMeanTable t1 = cond_mean_info(j, d, CondTarget::user1);
    return t1.at(0, 0, 0)[0] - t1.at(0, 1, 0)[0];
  };
  double lo = 1e-4, hi = analytic - 1e-9;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return {analytic, 0.5 * (lo + hi)};
}

RegionBoundary collision_capacity_union(int grid) {
  if (grid < 2) throw ValidationError("collision_capacity_union: grid must be >= 2");
  const Channel ch = collision_channel();
  std::vector<Eigen::Vector2d> corners;
  corners.reserve(grid * grid);
  for (int a = 0; a < grid; ++a)
    for (int c = 0; c < grid; ++c) {
      const double p1 = 0.5 * a / grid, p2 = 0.5 * c / grid;
      const JointLaw j = joint_law(ch, collision_inputs(p1, p2));
      const RateVector i = mean_vector(j, info_density(j));
      corners.emplace_back(i.r1(), i.r2());
    }

  // Pareto frontier of the rectangle corners, r1 ascending / r2 descending.
  std::sort(corners.begin(), corners.end(), [](const auto& a, const auto& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] > b[1];
  });
  std::vector<Eigen::Vector2d> pareto;
  for (auto it = corners.rbegin(); it != corners.rend(); ++it)
    if (pareto.empty() || (*it)[1] > pareto.back()[1] + 1e-15) pareto.push_back(*it);
  std::reverse(pareto.begin(), pareto.end());

  RegionBoundary b;
  b.kind = RegionKind::capacity_union;
  b.prov.family = "collision inputs (1-2p,p,p) x (1-2q,q,q) on a " + std::to_string(grid) +
                  "x" + std::to_string(grid) + " grid over [0,1/2)^2";
  b.points.emplace_back(0.0, pareto.front()[1]);
  for (std::size_t k = 0; k < pareto.size(); ++k) {
    b.points.push_back(pareto[k]);
    const double next_r2 = (k + 1 < pareto.size()) ? pareto[k + 1][1] : 0.0;
    b.points.emplace_back(pareto[k][0], next_r2);
  }
  dedupe(b.points);
  return b;
}

}  // namespace macdisp
