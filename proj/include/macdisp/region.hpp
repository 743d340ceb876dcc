#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "macdisp/dispersion.hpp"
#include "macdisp/mvn.hpp"

namespace macdisp {

enum class RegionKind { first_order, second_order, capacity_union };

struct RegionConfig {
  int n = 1;
  double eps = 1e-2;
  int resolution = 128;
  bool ignore_third_order = true;  // always true; recorded for provenance
};

struct RegionProvenance {
  RateVector i;
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  bool has_v = false;
  int n = 0;
  double eps = 0.0;
  int rank = 0;
  double quad_tol = 0.0;
  std::string family;
};

// Boundary as an ordered staircase: r2 nonincreasing as r1 increases.
struct RegionBoundary {
  RegionKind kind = RegionKind::first_order;
  std::vector<Eigen::Vector2d> points;
  bool empty_region = false;
  RegionProvenance prov;
};

RegionBoundary first_order_region(const RateVector& i, int resolution = 128);

bool second_order_member(const RateVector& i, const GaussianSpec& spec,
                         const RegionConfig& cfg, double r1, double r2);
bool second_order_member(const RateVector& i, const DispersionMatrix& v,
                         const RegionConfig& cfg, double r1, double r2);

// Radial bisection from the origin along `resolution` rays spanning the first
// quadrant; membership is monotone along every such ray.
RegionBoundary trace_boundary(const RateVector& i, const DispersionMatrix& v,
                              const RegionConfig& cfg);

// 3x3x6 deterministic multiple-access channel: the pair is received noiselessly
// when either user sends 0, otherwise only a collision symbol is seen.
Channel collision_channel();
InputSpec collision_inputs(double p1, double p2);

// Input parameters at which the constant-composition gain over i.i.d. coding
// degenerates: 1/3 (uniform inputs, closed-form criterion) and the numeric root
// of Var[i1^(1)] = 0 near 0.2867.
std::pair<double, double> optimality_roots();

// Union of the first-order rectangles over a uniform (p1,p2) grid on [0,1/2)^2.
RegionBoundary collision_capacity_union(int grid = 200);

}  // namespace macdisp
