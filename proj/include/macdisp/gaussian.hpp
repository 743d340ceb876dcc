#pragma once

#include <Eigen/Dense>

#include "macdisp/dispersion.hpp"

namespace macdisp {

// Power-constrained two-user Gaussian channel Y = sqrt(P1) X1 + sqrt(P2) X2 + Z
// with unit-variance inputs and noise.
struct GaussianMac {
  double p1 = 0.0, p2 = 0.0;
};

// Discrete distribution matching standard-normal moments through order 2m-1.
struct QuadratureRule {
  int m = 0;
  Eigen::VectorXd nodes;    // strictly increasing, symmetric about 0
  Eigen::VectorXd weights;  // positive, sum 1
};

struct QuantizedMoments {
  int m = 0;
  RateVector i;
  DispersionMatrix v;
  Eigen::Vector3d third_abs = Eigen::Vector3d::Zero();  // central, per component
  int panels = 0;  // output-integration panels at convergence
};

// Mutual-information vector and dispersion matrix of the Gaussian pair in
// closed form.
std::pair<RateVector, DispersionMatrix> closed_form_iv(const GaussianMac& mac);

// m-point rule for the unit normal weight from the symmetric tridiagonal
// recurrence, postprocessed to exact +/- node symmetry.
QuadratureRule gauss_rule(int m);

// (I_m, V_m) for inputs quantized to the m-point rule, continuous output
// integrated on a composite panel grid refined until successive estimates
// agree to 1e-9.
QuantizedMoments quantized_iv(const GaussianMac& mac, int m);

// Sum w_a x_a^k with the +/- node pairs combined first, so the odd-moment
// cancellation is exact instead of drowning in partial-sum rounding.
double rule_moment(const QuadratureRule& rule, int k);

// E[He_k((sqrt(P1) X1 + sqrt(P2) X2) / sqrt(P1+P2))] with X1, X2 drawn from
// the product of m-point rules; He_k is the probabilists' Hermite polynomial.
double hermite_expectation(const GaussianMac& mac, int m, int k);

// Divergence of the true output law from the quantized-input output law.
double relative_entropy_gap(const GaussianMac& mac, int m);

// Rule size coupled to blocklength as m ~ n^{1/4} (not enforced elsewhere).
int rule_size_for_blocklength(int n);

}  // namespace macdisp
