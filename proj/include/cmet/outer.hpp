#pragma once

#include "cmet/kernel.hpp"
#include "cmet/report.hpp"
#include "cmet/types.hpp"

namespace cmet {

// Ambient vector field spanned by kernel translates,
//     X(x) = sum_i k(|x - c_i|) w_i,
// the representable class in which every horizontal lift lives. Its squared
// A-norm is w^T G w with G the Gram of the centers.
struct AmbientField {
    MatrixXd centers;   // P x d
    MatrixXd weights;   // P x d
    SobolevKernel kernel;

    AmbientField(MatrixXd c, MatrixXd w, SobolevKernel k);

    // field values at query points, parallel over rows / serial reference
    MatrixXd eval_at(const MatrixXd& pts) const;
    MatrixXd eval_at_serial(const MatrixXd& pts) const;
    double norm_a_squared() const;
};

// G^O_q(u, v) = u^T B_q^{-1} v on sampled fields.
double outer_eval(const CometricGram& B, const TangentField& u, const TangentField& v);
double outer_eval(const SobolevKernel& k, const Curve& q, const TangentField& u, const TangentField& v);

// Horizontal lift: the minimal-A-norm ambient field with trace u along q;
// centers are the curve samples and weights solve B_q w = u.
AmbientField lift_field(const SobolevKernel& k, const Curve& q, const TangentField& u);

// Defects of the projection identities, all relative.
struct ProjectionReport {
    double idempotence = 0.0;     // ||P(PX) - PX||_A / ||PX||_A
    double trace = 0.0;           // ||Tr(PX) - Tr X|| / ||Tr X||
    double orthogonality = 0.0;   // |<A PX, X - PX>| / ||X||_A^2
};

ProjectionReport projection_identities_check(const SobolevKernel& k, const Curve& q, const AmbientField& X);

struct OuterPathEval {
    double energy = 0.0;
    double length = 0.0;
    std::vector<Curve> trajectory;  // T+1 curves
};

// Energy of a momentum path under the explicit-midpoint stepper for
// qdot = B_q p: per step the half state h = q + (dt/2) B(q) p sets both the
// step q_next = q + dt B(h) p and the quadrature term dt p^T B(h) p, keeping
// the discrete energy consistent with the realized trajectory. Fills
// mp.induced. Throws SpdError with the step index if points collapse.
OuterPathEval outer_path_energy(const SobolevKernel& k, MomentumPath& mp);

// Adjoint gradient of J(p) = outer_path_energy(p) + <endpoint_cotangent, q_T>
// with respect to the momenta (one N x d block per step).
std::vector<MatrixXd> outer_path_gradient(const SobolevKernel& k, const MomentumPath& mp,
                                          const MatrixXd& endpoint_cotangent);

// Distance over the diffeomorphism orbit: minimize path energy plus an
// endpoint penalty with multiplicative continuation; value is path length
// plus a first-order bound on the residual endpoint mismatch.
DistanceReport outer_distance(const SobolevKernel& k, const Curve& q1, const Curve& q2,
                              const PathOptOptions& opts);

// Generalized-eigenvalue bounds of A_q = B_q^{-1} against the flat
// H^{s_prime}(S^1) Gram; returns (lower, upper) with the topology-equivalence
// constant C = max(upper, 1/lower).
std::pair<double, double> hsprime_equivalence_probe(const SobolevKernel& k, const Curve& q, double s_prime);

// 1D counterexample: minimum of int X^2 dy + int_I (X')^2 dy over grid
// functions with X(x) = 1, I = [-1, 1]. The minimum is the induced metric
// G^O_x(1,1) of an ambient product that is L^2 outside I and H^1 inside.
struct Demo1DConfig {
    double half_width = 3.0;  // grid on [-L, L], L >= 3
    double h = 1e-3;          // spacing, <= 1e-2
    double x = 0.0;           // constraint location
};

struct Demo1DResult {
    double x_requested = 0.0;
    double x_snapped = 0.0;   // nearest grid node actually constrained
    double value = 0.0;
};

Demo1DResult demo_discontinuity_1d(const Demo1DConfig& cfg);

}  // namespace cmet
