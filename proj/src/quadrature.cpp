#include "macdisp/quadrature.hpp"

#include <map>
#include <mutex>

namespace macdisp {

Rule1d golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  const int m = static_cast<int>(diag.size());
  if (m < 1) throw ValidationError("golub_welsch: empty recurrence");
  if (offdiag.size() != m - 1) throw ValidationError("golub_welsch: offdiag size mismatch");
  Rule1d r;
  if (m == 1) {
    r.nodes = Eigen::VectorXd::Constant(1, diag[0]);
    r.weights = Eigen::VectorXd::Constant(1, mu0);
    return r;
  }
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  jac.diagonal() = diag;
  jac.diagonal(1) = offdiag;
  jac.diagonal(-1) = offdiag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  r.nodes = es.eigenvalues();
  r.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
  return r;
}

Rule1d gauss_legendre(int k) {
  if (k < 1) throw ValidationError("gauss_legendre: k must be positive");
  static std::mutex mu;
  static std::map<int, Rule1d> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
  }
  Eigen::VectorXd off(k > 1 ? k - 1 : 0);
  for (int j = 1; j < k; ++j) off[j - 1] = j / std::sqrt(4.0 * j * j - 1.0);
  Rule1d r = golub_welsch(Eigen::VectorXd::Zero(k), off, 2.0);
  std::lock_guard<std::mutex> lock(mu);
  cache[k] = r;
  return r;
}

Rule1d composite_legendre_grid(double a, double b, int panels) {
  if (!(b > a) || panels < 1) throw ValidationError("composite_legendre_grid: bad interval");
  const Rule1d base = gauss_legendre(16);
  const int k = static_cast<int>(base.nodes.size());
  Rule1d grid;
  grid.nodes.resize(panels * k);
  grid.weights.resize(panels * k);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int q = 0; q < k; ++q) {
      grid.nodes[p * k + q] = mid + 0.5 * h * base.nodes[q];
      grid.weights[p * k + q] = 0.5 * h * base.weights[q];
    }
  }
  return grid;
}

}  // namespace macdisp
