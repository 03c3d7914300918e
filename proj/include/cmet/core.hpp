#pragma once

#include "cmet/types.hpp"

namespace cmet {

// Test/demo curve generators (uniform parameter grid, d = 2).
Curve make_circle(int N, double radius = 1.0, double cx = 0.0, double cy = 0.0);
Curve make_ellipse(int N, double ax, double ay);

// Total polygonal length (sum of chord lengths).
double chord_length(const Curve& c);

// Discrete speed |c'(theta_i)| from central differences on the 2*pi/N grid.
// Throws ImmersionError when any entry vanishes.
VectorXd arc_element(const Curve& c);

// Length in the ds measure: sum_i |c'_i| * (2*pi/N).
double curve_length(const Curve& c);

// Resample to N_new points uniformly spaced in arc length, periodic linear
// interpolation, starting phase anchored at sample 0.
Curve resample(const Curve& c, int N_new);

// D_s u = u' / |c'| with central differences.
TangentField arclength_derivative(const Curve& c, const TangentField& u);

// Flat Sobolev norm of a field on the parameter circle:
//     ( sum_coords 2*pi*sum_m (1+m^2)^order |u_hat(m)|^2 )^(1/2).
double sobolev_norm_circle(const TangentField& u, double order);

}  // namespace cmet
