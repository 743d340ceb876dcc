#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "macdisp/errors.hpp"

namespace macdisp {

inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double log_normal_pdf(double x) {
  static const double log_sqrt_2pi = 0.9189385332046727418;
  return -0.5 * x * x - log_sqrt_2pi;
}

// erfc keeps full relative accuracy in the lower tail.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

struct Rule1d {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Nodes and weights of a Gaussian rule from the symmetric tridiagonal (Jacobi)
// matrix of a three-term recurrence; `mu0` is the total mass of the weight.
Rule1d golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0);

// k-point Gauss-Legendre rule on [-1,1], total mass 2.
Rule1d gauss_legendre(int k);

// Composite 16-point Gauss-Legendre grid over [a,b] with `panels` equal panels.
Rule1d composite_legendre_grid(double a, double b, int panels);

// Integrates f over [a,b] with composite Gauss-Legendre panels, doubling the
// panel count until two successive estimates differ by less than tol.
template <class F>
double integrate_panels(F&& f, double a, double b, double tol,
                        int init_panels = 4, int max_doublings = 14) {
  if (!(b > a)) return 0.0;
  const Rule1d base = gauss_legendre(16);
  auto eval = [&](int panels) {
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h;
      double acc = 0.0;
      for (int q = 0; q < base.nodes.size(); ++q)
        acc += base.weights[q] * f(mid + 0.5 * h * base.nodes[q]);
      total += 0.5 * h * acc;
    }
    return total;
  };
  int panels = init_panels;
  double prev = eval(panels);
  for (int d = 0; d < max_doublings; ++d) {
    panels *= 2;
    const double cur = eval(panels);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  throw NumericalError("panel quadrature did not converge");
}

}  // namespace macdisp
