#pragma once

#include <array>

#include "robagg/model.hpp"

namespace robagg {

// A signal with posterior s mapped to (s, psi(s), s psi(s)); the report
// structure of any signal structure is the mass-weighted sum of its points.
struct CurvePoint {
  double s = 0.0;
  std::array<double, 3> coordinates{};
};

CurvePoint curve_point(double lambda, double s);

// (mu, Pr[X = 1], Pr[X = 1, state 1]) of a structure under psi_lambda.
std::array<double, 3> encode(const GeneralSignalStructure& s, double lambda);

// Determinant of the 4x4 matrix with rows [1, s, psi(s), s psi(s)] for
// s = a, b, c, d in that order. LU with partial pivoting on an equivalent, well-scaled matrix.
double det_m(double lambda, double a, double b, double c, double d);

// Atoms whose posteriors lie within tol of each other are merged: masses add,
// posterior becomes the mass-weighted mean. Output is sorted by posterior.
GeneralSignalStructure merge_equal_posteriors(const GeneralSignalStructure& s, double tol);

// q v(p1) + (1 - q) v(p2) = x v(p) + y v(0) + z v(1) with p in [p1, p2].
struct Decomposition {
  double p = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double residual = 0.0;  // max-norm reconstruction error
};

Decomposition two_to_three(double lambda, double p1, double p2, double q);

struct Canonicalization {
  ThreeSignalStructure structure;
  double encoding_residual = 0.0;  // max-norm change of encode()
  double report_residual = 0.0;    // max-norm change of (mu, q0, q1)
  int steps = 0;
};

// Reduces any finite structure to posteriors {0, p, 1} with the same report
// structure. Needs finite lambda > 0: at lambda = 0 the curve is planar and
// at the infinite level it is a step.
Canonicalization canonicalize(const GeneralSignalStructure& s, double lambda);

}  // namespace robagg
