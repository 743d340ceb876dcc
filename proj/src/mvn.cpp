#include "macdisp/mvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "macdisp/quadrature.hpp"

namespace macdisp {

namespace {

constexpr double kTrunc = 8.5;        // integration cutoff in standard deviations
constexpr double kRelTruncate = 1e-12;

double phi_interval(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::max(0.0, normal_cdf(hi) - normal_cdf(lo));
}

}  // namespace

GaussianSpec decompose(const Eigen::Matrix3d& cov) {
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw ValidationError("decompose: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (cov + cov.transpose()));
  Eigen::Vector3d lam = es.eigenvalues();   // ascending
  const double lam_abs_max = lam.cwiseAbs().maxCoeff();
  if (lam[0] < -1e-8 * std::max(lam_abs_max, 1e-300))
    throw NumericalError("decompose: matrix is not PSD");
  const double lam_max = std::max(lam[2], 0.0);

  GaussianSpec spec;
  spec.cov = 0.5 * (cov + cov.transpose());
  std::vector<int> keep;
  for (int k = 2; k >= 0; --k)  // descending
    if (lam[k] > kRelTruncate * lam_max && lam[k] > 0.0) keep.push_back(k);
  spec.rank = static_cast<int>(keep.size());
  spec.basis.resize(3, spec.rank);
  spec.support_sqrt.resize(3, spec.rank);
  for (int c = 0; c < spec.rank; ++c) {
    Eigen::Vector3d v = es.eigenvectors().col(keep[c]);
    for (int i = 0; i < 3; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    spec.basis.col(c) = v;
    spec.support_sqrt.col(c) = v * std::sqrt(lam[keep[c]]);
    spec.eigenvalues[c] = lam[keep[c]];
  }
  return spec;
}

namespace {

// Probability of the intersection of half-planes {a_j t + c_j s <= z_j} under
// independent standard normals (t,s), with t limited to pure-t constraints.
double bivariate_halfplanes(const std::vector<Eigen::Vector3d>& rows) {
  double t_lo = -kTrunc, t_hi = kTrunc;
  struct Line {
    double z, a, c;  // s <= (z - a t)/c  or  >= for c < 0
  };
  std::vector<Line> uppers, lowers;
  for (const auto& r : rows) {
    const double a = r[0], c = r[1], z = r[2];
    const double norm = std::hypot(a, c);
    if (std::abs(c) <= 1e-13 * norm) {
      if (a > 0.0)
        t_hi = std::min(t_hi, z / a);
      else
        t_lo = std::max(t_lo, z / a);
    } else if (c > 0.0) {
      uppers.push_back({z, a, c});
    } else {
      lowers.push_back({z, a, c});
    }
  }
  if (!(t_hi > t_lo)) return 0.0;

  // Pieces between line crossings keep the integrand analytic.
  std::vector<Line> all = uppers;
  all.insert(all.end(), lowers.begin(), lowers.end());
  std::vector<double> cuts{t_lo, t_hi};
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double den = all[i].c * all[j].a - all[j].c * all[i].a;
      if (std::abs(den) < 1e-300) continue;
      const double t = (all[i].c * all[j].z - all[j].c * all[i].z) / den;
      if (t > t_lo && t < t_hi) cuts.push_back(t);
    }
  std::sort(cuts.begin(), cuts.end());

  auto integrand = [&](double t) {
    double hi = std::numeric_limits<double>::infinity();
    double lo = -std::numeric_limits<double>::infinity();
    for (const Line& l : uppers) hi = std::min(hi, (l.z - l.a * t) / l.c);
    for (const Line& l : lowers) lo = std::max(lo, (l.z - l.a * t) / l.c);
    return normal_pdf(t) * phi_interval(lo, hi);
  };
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    if (cuts[p + 1] - cuts[p] < 1e-14) continue;
    total += integrate_panels(integrand, cuts[p], cuts[p + 1], 5e-9);
  }
  return total;
}

// Full-rank case: L is 3x3 lower triangular with positive diagonal.
double trivariate_triangular(const Eigen::Matrix3d& L, const Eigen::Vector3d& z) {
  const double h1 = std::min(z[0] / L(0, 0), kTrunc);
  if (h1 <= -kTrunc) return 0.0;
  auto outer = [&](double t) {
    const double h2 = std::min((z[1] - L(1, 0) * t) / L(1, 1), kTrunc);
    if (h2 <= -kTrunc) return 0.0;
    auto inner = [&](double s) {
      return normal_pdf(s) * normal_cdf((z[2] - L(2, 0) * t - L(2, 1) * s) / L(2, 2));
    };
    return normal_pdf(t) * integrate_panels(inner, -kTrunc, h2, 1e-9);
  };
  return integrate_panels(outer, -kTrunc, h1, 2e-8);
}

}  // namespace

double lower_orthant(const GaussianSpec& spec, const Eigen::Vector3d& z) {
  const double sd_scale = spec.rank > 0 ? std::sqrt(spec.eigenvalues[0]) : 0.0;
  const double det_tol = 1e-9 * std::max(sd_scale, 1e-300);

  std::vector<int> active;
  for (int j = 0; j < 3; ++j) {
    const double sd = spec.rank > 0 ? spec.support_sqrt.row(j).norm() : 0.0;
    if (sd > det_tol) {
      active.push_back(j);
    } else if (z[j] < 0.0) {
      return 0.0;  // the coordinate is deterministically 0
    }
  }
  if (active.empty()) return 1.0;

  const int k = static_cast<int>(active.size());
  const int r = spec.rank;
  Eigen::MatrixXd a(k, r);
  Eigen::VectorXd zs(k);
  for (int j = 0; j < k; ++j) {
    a.row(j) = spec.support_sqrt.row(active[j]);
    zs[j] = z[active[j]];
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  Eigen::MatrixXd L =
      qr.matrixQR().topRows(std::min(r, k)).triangularView<Eigen::Upper>().transpose();
  // L is k x r lower-trapezoidal; flipping a column re-signs one latent variable.
  for (int c = 0; c < std::min(r, k); ++c)
    if (L(c, c) < 0.0) L.col(c) = -L.col(c);

  if (r == 1) {
    double hi = std::numeric_limits<double>::infinity();
    double lo = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      if (L(j, 0) > 0.0)
        hi = std::min(hi, zs[j] / L(j, 0));
      else if (L(j, 0) < 0.0)
        lo = std::max(lo, zs[j] / L(j, 0));
      else if (zs[j] < 0.0)
        return 0.0;
    }
    return phi_interval(lo, hi);
  }
  if (r == 2) {
    std::vector<Eigen::Vector3d> rows(k);
    for (int j = 0; j < k; ++j) rows[j] = Eigen::Vector3d(L(j, 0), L(j, 1), zs[j]);
    return bivariate_halfplanes(rows);
  }
  Eigen::Matrix3d L3 = L;
  return trivariate_triangular(L3, zs);
}

bool qinv_member(const GaussianSpec& spec, double eps, const Eigen::Vector3d& z) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("qinv_member: eps must be in (0,1)");
  return lower_orthant(spec, z) >= 1.0 - eps;
}

bool qinv_member(const Eigen::Matrix3d& v, double eps, const Eigen::Vector3d& z) {
  return qinv_member(decompose(v), eps, z);
}

}  // namespace macdisp
