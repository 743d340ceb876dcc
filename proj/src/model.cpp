#include "macdisp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace macdisp {

namespace {

void check_distribution_row(const Eigen::VectorXd& row, const char* what) {
  if ((row.array() < -1e-12).any())
    throw ValidationError(std::string(what) + ": negative probability");
  if (std::abs(row.sum() - 1.0) > 1e-6)
    throw ValidationError(std::string(what) + ": row does not sum to 1");
}

}  // namespace

JointLaw joint_law(const Channel& ch, const InputSpec& inp) {
  if (ch.nx1 < 1 || ch.nx2 < 1 || ch.ny < 1) throw ValidationError("joint_law: empty channel");
  if (ch.w.rows() != ch.nx1 * ch.nx2 || ch.w.cols() != ch.ny)
    throw ValidationError("joint_law: channel table shape mismatch");
  const int uc = inp.u_count();
  if (inp.nu < 0) throw ValidationError("joint_law: negative u alphabet");
  if (inp.nu == 0 && inp.q_u.size() != 0)
    throw ValidationError("joint_law: q_u must be empty when u_size = 0");
  if (inp.nu > 0 && inp.q_u.size() != inp.nu)
    throw ValidationError("joint_law: q_u size mismatch");
  if (inp.q1.rows() != uc || inp.q2.rows() != uc)
    throw ValidationError("joint_law: q1/q2 row count != u count");
  if (inp.q1.cols() != ch.nx1 || inp.q2.cols() != ch.nx2)
    throw ValidationError("joint_law: input distribution size != alphabet size");

  if (inp.nu > 0) check_distribution_row(inp.q_u, "q_u");
  for (int u = 0; u < uc; ++u) {
    check_distribution_row(inp.q1.row(u), "q1");
    check_distribution_row(inp.q2.row(u), "q2");
  }
  for (int r = 0; r < ch.w.rows(); ++r) check_distribution_row(ch.w.row(r), "channel row");

  JointLaw j;
  j.ch = ch;
  j.inp = inp;
  j.p.setZero(uc * ch.nx1 * ch.nx2 * ch.ny);
  j.py_given_x2u.setZero(uc * ch.nx2, ch.ny);
  j.py_given_x1u.setZero(uc * ch.nx1, ch.ny);
  j.py_given_u.setZero(uc, ch.ny);

  for (int u = 0; u < uc; ++u) {
    for (int x1 = 0; x1 < ch.nx1; ++x1)
      for (int x2 = 0; x2 < ch.nx2; ++x2) {
        const double q12 = inp.q1(u, x1) * inp.q2(u, x2);
        for (int y = 0; y < ch.ny; ++y) {
          const double wy = ch(x1, x2, y);
          j.p[j.index(u, x1, x2, y)] = inp.u_prob(u) * q12 * wy;
          j.py_given_x2u(u * ch.nx2 + x2, y) += inp.q1(u, x1) * wy;
          j.py_given_x1u(u * ch.nx1 + x1, y) += inp.q2(u, x2) * wy;
          j.py_given_u(u, y) += q12 * wy;
        }
      }
  }
  return j;
}

InfoDensity info_density(const JointLaw& j) {
  const Channel& ch = j.ch;
  const int uc = j.inp.u_count();
  InfoDensity d;
  const int total = uc * ch.nx1 * ch.nx2 * ch.ny;
  d.v.assign(total, Eigen::Vector3d::Zero());
  d.on_support.assign(total, 0);
  d.zero_given_pair.assign(total, 0);
  for (int u = 0; u < uc; ++u)
    for (int x1 = 0; x1 < ch.nx1; ++x1)
      for (int x2 = 0; x2 < ch.nx2; ++x2)
        for (int y = 0; y < ch.ny; ++y) {
          const int k = j.index(u, x1, x2, y);
          const double wy = ch(x1, x2, y);
          if (wy <= 0.0) {
            d.zero_given_pair[k] = 1;
            continue;
          }
          if (j.p[k] <= 0.0) continue;
          const double logw = std::log(wy);
          d.v[k][0] = logw - std::log(j.py_given_x2u(u * ch.nx2 + x2, y));
          d.v[k][1] = logw - std::log(j.py_given_x1u(u * ch.nx1 + x1, y));
          d.v[k][2] = logw - std::log(j.py_given_u(u, y));
          d.on_support[k] = 1;
        }
  return d;
}

CondMeanTable cond_mean_info(const JointLaw& j, const InfoDensity& d, CondTarget which) {
  const Channel& ch = j.ch;
  const int uc = j.inp.u_count();
  CondMeanTable t;
  t.target = which;
  t.u_count = uc;
  t.n1 = (which == CondTarget::user2) ? 1 : ch.nx1;
  t.n2 = (which == CondTarget::user1) ? 1 : ch.nx2;
  t.mean.assign(uc * t.n1 * t.n2, Eigen::Vector3d::Zero());
  t.present.assign(t.mean.size(), 0);

  std::vector<double> mass(t.mean.size(), 0.0);
  for (int u = 0; u < uc; ++u)
    for (int x1 = 0; x1 < ch.nx1; ++x1)
      for (int x2 = 0; x2 < ch.nx2; ++x2) {
        const int cell = t.index(u, x1, x2);
        for (int y = 0; y < ch.ny; ++y) {
          const int k = j.index(u, x1, x2, y);
          if (!d.on_support[k]) continue;
          t.mean[cell] += j.p[k] * d.v[k];
          mass[cell] += j.p[k];
        }
      }
  for (std::size_t c = 0; c < t.mean.size(); ++c) {
    if (mass[c] > 0.0) {
      t.mean[c] /= mass[c];
      t.present[c] = 1;
    } else {
      t.mean[c].setZero();
    }
  }
  return t;
}

Composition nearest_type(const Eigen::VectorXd& q, int n) {
  if (n < 1) throw ValidationError("nearest_type: n must be >= 1");
  check_distribution_row(q, "nearest_type input");
  const int k = static_cast<int>(q.size());
  Composition c;
  c.counts.setZero(k);
  Eigen::VectorXd frac(k);
  int assigned = 0;
  for (int s = 0; s < k; ++s) {
    const double scaled = n * q[s];
    c.counts[s] = static_cast<int>(std::floor(scaled + 1e-12));
    frac[s] = scaled - c.counts[s];
    assigned += c.counts[s];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frac[a] > frac[b]; });
  for (int r = 0; r < n - assigned; ++r) c.counts[order[r]] += 1;
  return c;
}

}  // namespace macdisp
