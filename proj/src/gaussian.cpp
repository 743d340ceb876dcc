#include "macdisp/gaussian.hpp"

#include <cmath>

#include "macdisp/errors.hpp"
#include "macdisp/quadrature.hpp"

namespace macdisp {

namespace {

void validate(const GaussianMac& mac) {
  if (!(mac.p1 >= 0.0) || !(mac.p2 >= 0.0))
    throw ValidationError("gaussian: powers must be nonnegative");
}

struct Snapshot {
  RateVector i;
  DispersionMatrix v;
  Eigen::Vector3d third_abs;
};

// Discretizes the channel onto an output quadrature grid and reuses the
// discrete-alphabet moment machinery.  Output weights enter every conditional
// law with the same factor, so the log-ratios equal their continuous-output
// values at the grid points and expectations become quadrature sums.
Snapshot evaluate_on_grid(const GaussianMac& mac, const QuadratureRule& r1,
                          const QuadratureRule& r2, double a, double b, int panels) {
  const Rule1d grid = composite_legendre_grid(a, b, panels);
  const int k = int(grid.nodes.size());
  const double s1 = std::sqrt(mac.p1), s2 = std::sqrt(mac.p2);

  Channel ch;
  ch.nx1 = r1.m;
  ch.nx2 = r2.m;
  ch.ny = k;
  ch.w.resize(r1.m * r2.m, k);
  for (int x1 = 0; x1 < r1.m; ++x1)
    for (int x2 = 0; x2 < r2.m; ++x2) {
      const double s = s1 * r1.nodes[x1] + s2 * r2.nodes[x2];
      for (int y = 0; y < k; ++y)
        ch.w(ch.pair_index(x1, x2), y) = normal_pdf(grid.nodes[y] - s) * grid.weights[y];
    }

  InputSpec inp;
  inp.nu = 0;
  inp.q1 = r1.weights.transpose();
  inp.q2 = r2.weights.transpose();

  const JointLaw j = joint_law(ch, inp);
  const InfoDensity d = info_density(j);
  Snapshot snap;
  snap.i = mean_vector(j, d);
  snap.v = cov_cc(j, d);
  snap.third_abs.setZero();
  for (int x1 = 0; x1 < ch.nx1; ++x1)
    for (int x2 = 0; x2 < ch.nx2; ++x2)
      for (int y = 0; y < ch.ny; ++y) {
        const int idx = j.index(0, x1, x2, y);
        if (!d.on_support[idx]) continue;
        snap.third_abs += j.p[idx] * (d.v[idx] - snap.i.v).array().abs().pow(3).matrix();
      }
  return snap;
}

}  // namespace

std::pair<RateVector, DispersionMatrix> closed_form_iv(const GaussianMac& mac) {
  validate(mac);
  const double p1 = mac.p1, p2 = mac.p2, ps = p1 + p2;
  RateVector i;
  i.v << 0.5 * std::log1p(p1), 0.5 * std::log1p(p2), 0.5 * std::log1p(ps);
  DispersionMatrix v;
  v.kind = DispersionKind::cc;
  Eigen::Matrix3d& m = v.m;
  m(0, 0) = p1 * (2.0 + p1) / (2.0 * (1.0 + p1) * (1.0 + p1));
  m(1, 1) = p2 * (2.0 + p2) / (2.0 * (1.0 + p2) * (1.0 + p2));
  m(0, 1) = m(1, 0) = p1 * p2 / (2.0 * (1.0 + p1) * (1.0 + p2));
  m(0, 2) = m(2, 0) = p1 * (2.0 + ps) / (2.0 * (1.0 + p1) * (1.0 + ps));
  m(1, 2) = m(2, 1) = p2 * (2.0 + ps) / (2.0 * (1.0 + p2) * (1.0 + ps));
  m(2, 2) = (ps * (2.0 + ps) + 2.0 * p1 * p2) / (2.0 * (1.0 + ps) * (1.0 + ps));
  return {i, v};
}

QuadratureRule gauss_rule(int m) {
  if (m < 1) throw ValidationError("gauss_rule: point count must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd off(m > 1 ? m - 1 : 0);
  for (int j = 1; j < m; ++j) off[j - 1] = std::sqrt(double(j));
  Rule1d raw = golub_welsch(diag, off, 1.0);

  QuadratureRule rule;
  rule.m = m;
  rule.nodes = raw.nodes;
  rule.weights = raw.weights;
  // enforce the exact symmetry the eigensolver only approximates
  for (int j = 0; j < m / 2; ++j) {
    const int k = m - 1 - j;
    const double a = 0.5 * (rule.nodes[k] - rule.nodes[j]);
    rule.nodes[j] = -a;
    rule.nodes[k] = a;
    const double w = 0.5 * (rule.weights[j] + rule.weights[k]);
    rule.weights[j] = rule.weights[k] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

QuantizedMoments quantized_iv(const GaussianMac& mac, int m) {
  validate(mac);
  const QuadratureRule r1 = gauss_rule(m), r2 = gauss_rule(m);
  const double s1 = std::sqrt(mac.p1), s2 = std::sqrt(mac.p2);
  const double smin = s1 * r1.nodes.minCoeff() + s2 * r2.nodes.minCoeff();
  const double smax = s1 * r1.nodes.maxCoeff() + s2 * r2.nodes.maxCoeff();
  const double a = smin - 10.0, b = smax + 10.0;

  int panels = std::max(4, int(std::ceil(b - a)));  // start near unit width
  Snapshot prev = evaluate_on_grid(mac, r1, r2, a, b, panels);
  for (int round = 0; round < 8; ++round) {
    panels *= 2;
    const Snapshot cur = evaluate_on_grid(mac, r1, r2, a, b, panels);
    const double gap = std::max((cur.i.v - prev.i.v).cwiseAbs().maxCoeff(),
                                (cur.v.m - prev.v.m).cwiseAbs().maxCoeff());
    if (gap < 1e-9) {
      QuantizedMoments out;
      out.m = m;
      out.i = cur.i;
      out.v = cur.v;
      out.third_abs = cur.third_abs;
      out.panels = panels;
      return out;
    }
    prev = cur;
  }
  throw NumericalError("quantized_iv: output quadrature did not converge");
}

double rule_moment(const QuadratureRule& rule, int k) {
  if (k < 0) throw ValidationError("rule_moment: order must be >= 0");
  const int m = rule.m;
  double acc = 0.0;
  for (int j = 0; j < m / 2; ++j) {
    const double a = rule.nodes[m - 1 - j];
    const double pair = k % 2 == 1 ? 0.0 : 2.0 * std::pow(a, k);
    acc += rule.weights[j] * pair;
  }
  if (m % 2 == 1 && k == 0) acc += rule.weights[m / 2];
  return acc;
}

double hermite_expectation(const GaussianMac& mac, int m, int k) {
  validate(mac);
  if (k < 0) throw ValidationError("hermite_expectation: degree must be >= 0");
  const QuadratureRule r1 = gauss_rule(m), r2 = gauss_rule(m);
  const double ps = mac.p1 + mac.p2;
  const double s1 = std::sqrt(mac.p1), s2 = std::sqrt(mac.p2);
  const double scale = ps > 0.0 ? 1.0 / std::sqrt(ps) : 0.0;
  auto he = [k](double x) {
    double h0 = 1.0, h1 = x;
    if (k == 0) return 1.0;
    for (int j = 1; j < k; ++j) {
      const double h2 = x * h1 - j * h0;
      h0 = h1;
      h1 = h2;
    }
    return h1;
  };
  // The reflection (a,b) -> (m-1-a, m-1-b) carries the same weight and negates
  // the argument, so each pair sums to 0 (odd k) or twice one term (even k);
  // combining pairs first keeps the odd-degree cancellation exact, as in
  // rule_moment.
  double acc = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const int ar = m - 1 - a, br = m - 1 - b;
      if (a > ar || (a == ar && b > br)) continue;
      const double x = scale * (s1 * r1.nodes[a] + s2 * r2.nodes[b]);
      const double w = r1.weights[a] * r2.weights[b];
      if (a == ar && b == br) acc += w * he(x);  // self-paired center, x == 0
      else if (k % 2 == 0) acc += 2.0 * w * he(x);
    }
  return acc;
}

double relative_entropy_gap(const GaussianMac& mac, int m) {
  validate(mac);
  const QuadratureRule r1 = gauss_rule(m), r2 = gauss_rule(m);
  const double s1 = std::sqrt(mac.p1), s2 = std::sqrt(mac.p2);
  const double sd = std::sqrt(1.0 + mac.p1 + mac.p2);
  const double smin = s1 * r1.nodes.minCoeff() + s2 * r2.nodes.minCoeff();
  const double smax = s1 * r1.nodes.maxCoeff() + s2 * r2.nodes.maxCoeff();
  const double lo = std::min(-10.0 * sd, smin - 10.0);
  const double hi = std::max(10.0 * sd, smax + 10.0);

  auto integrand = [&](double y) {
    const double p = normal_pdf(y / sd) / sd;
    double q = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        q += r1.weights[a] * r2.weights[b] *
             normal_pdf(y - s1 * r1.nodes[a] - s2 * r2.nodes[b]);
    return p > 0.0 ? p * (std::log(p) - std::log(q)) : 0.0;
  };
  const double d = integrate_panels(integrand, lo, hi, 1e-12,
                                    std::max(8, int(std::ceil(hi - lo))));
  return std::max(0.0, d);
}

int rule_size_for_blocklength(int n) {
  if (n < 1) throw ValidationError("rule_size_for_blocklength: n must be >= 1");
  return std::max(1, int(std::llround(std::pow(double(n), 0.25))));
}

}  // namespace macdisp
