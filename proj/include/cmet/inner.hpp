#pragma once

#include "cmet/report.hpp"
#include "cmet/types.hpp"

namespace cmet {

// Sobolev metric with constant coefficients on immersed curves,
//     G_c(u, v) = int a_0 <u,v> + a_1 <D_s u, D_s v> + ... + a_n <D_s^n u, D_s^n v> ds.
struct InnerMetric {
    MetricConfig config;

    explicit InnerMetric(MetricConfig cfg);
};

double inner_eval(const InnerMetric& m, const Curve& c, const TangentField& u, const TangentField& v);

// Scalar N x N assembly M with sum_coords u_a^T M v_a = inner_eval(c, u, v);
// the full N*d x N*d Gram is M kron I_d.
MatrixXd inner_gram_scalar(const InnerMetric& m, const Curve& c);
MatrixXd inner_gram(const InnerMetric& m, const Curve& c);

struct PathEnergy {
    double energy = 0.0;
    double length = 0.0;
};

// Discrete Riemannian path energy sum_t G_{mid}(dc/dt, dc/dt) * dt with the
// metric evaluated at segment-midpoint curves; length alongside.
PathEnergy inner_path_energy(const InnerMetric& m, const CurvePath& path);

// Geodesic-distance upper bound by path-energy minimization over interior
// curves (endpoints fixed, linear-interpolation start).
DistanceReport inner_distance(const InnerMetric& m, const Curve& c1, const Curve& c2,
                              const PathOptOptions& opts);

// Extremal generalized eigenvalues of the inner Gram against the flat
// H^n(dtheta) Gram, restricted to the resolved Fourier band |m| <= N/4:
// empirical version of the norm-equivalence constants. (At the Nyquist mode
// the central-difference D_s degenerates, which is a stencil artifact, not a
// property of the metric.)
std::pair<double, double> norm_equivalence_probe(const InnerMetric& m, const Curve& c);

}  // namespace cmet
