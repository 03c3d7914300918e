#pragma once

#include <Eigen/Cholesky>
#include <cstdint>

#include "cmet/types.hpp"

namespace cmet {

// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
double bessel_k(double nu, double x);

// Reproducing kernel of A = (1 - Laplace)^s on R^d: the radial profile whose
// d-dimensional Fourier transform is (1 + |xi|^2)^{-s},
//
//     k(r) = c_{s,d} (r/scale)^nu K_nu(r/scale),   nu = s - d/2,
//     c_{s,d} = 2^{1-nu} / ((4 pi)^{d/2} Gamma(s)),
//
// so that k(0) = Gamma(nu) / ((4 pi)^{d/2} Gamma(s)), which equals the
// defining integral (2 pi)^{-d} int (1+|xi|^2)^{-s} d xi. The removable
// singularity at r = 0 is handled by the closed-form limit.
struct SobolevKernel {
    double s;
    int d;
    double scale;
    double nu;        // s - d/2, must be > 0
    double norm_c;    // c_{s,d}

    SobolevKernel(double s_, int d_, double scale_ = 1.0);

    double k0() const;               // k(0)
    double eval(double r) const;     // k(r), r >= 0
    // k'(r)/r, finite at r = 0; needs nu > 1 (true whenever s > d/2 + 1)
    double deriv_over_r(double r) const;
    // both values in one call (shared Bessel work on the fast paths)
    void eval_pair(double r, double& k, double& g) const;
};

// Scalar N x N kernel matrices for a point set: K(i,j) = k(|x_i - x_j|) and
// optionally G(i,j) = k'(|x_i - x_j|)/|x_i - x_j|. Parallel over rows; each
// entry is computed independently, so results are identical for any thread
// count. The _serial variants are the reference implementations.
void kernel_matrices(const SobolevKernel& k, const MatrixXd& pts, MatrixXd& K, MatrixXd* G = nullptr);
void kernel_matrices_serial(const SobolevKernel& k, const MatrixXd& pts, MatrixXd& K, MatrixXd* G = nullptr);
MatrixXd cross_kernel_matrix(const SobolevKernel& k, const MatrixXd& a, const MatrixXd& b);

struct SolveDiag {
    double residual = 0.0;            // relative residual of the last solve
    bool conditioning_warning = false;
};

// Discrete cometric B_q = Tr_q A^{-1} Tr_q^*: kernel Gram of the curve
// samples. Block structure k(|q_i - q_j|) * I_d is stored as the scalar
// N x N factor; matrix() materializes the full N*d x N*d form. Immutable
// after construction; the SPD factorization is built eagerly (one jitter
// retry of 1e-12 * k(0) on the diagonal when near-coincident samples make
// the factorization fail).
class CometricGram {
  public:
    CometricGram(const SobolevKernel& kern, const Curve& curve);
    // landmark mode: any finite set of pairwise-distinct points (the
    // single-point demo lives outside the Curve invariant)
    CometricGram(const SobolevKernel& kern, const MatrixXd& points);

    int samples() const { return static_cast<int>(scalar_.rows()); }
    int dim() const { return d_; }
    int size() const { return samples() * d_; }
    std::uint64_t curve_hash() const { return hash_; }
    double jitter() const { return jitter_; }
    const SobolevKernel& kernel() const { return kernel_; }

    const MatrixXd& scalar_matrix() const { return scalar_; }
    MatrixXd matrix() const;  // N*d x N*d block expansion

    // B p; columns of the N x d layout solve independently
    MatrixXd apply(const MatrixXd& p) const;
    // long-double accumulation, for identity verification at 1e-10 scales
    MatrixXd apply_precise(const MatrixXd& p) const;

    // B^{-1} u via Cholesky plus mixed-precision iterative refinement
    // (residuals accumulated in long double). Throws SpdError if the
    // relative residual stays above 1e-6; flags a warning above 1e-10.
    MatrixXd solve(const MatrixXd& u, SolveDiag* diag = nullptr) const;
    // plain Cholesky solve without refinement or residual checks, for
    // preconditioning
    MatrixXd solve_basic(const MatrixXd& u) const;

  private:
    SobolevKernel kernel_;
    MatrixXd scalar_;
    Eigen::LLT<MatrixXd> llt_;
    int d_;
    double jitter_ = 0.0;
    std::uint64_t hash_ = 0;
};

// Flat-vector entry points matching the N*d layout of flatten().
CometricGram gram(const SobolevKernel& k, const Curve& curve);
VectorXd cometric_apply(const CometricGram& B, const VectorXd& p);
VectorXd metric_solve(const CometricGram& B, const VectorXd& u, SolveDiag* diag = nullptr);

}  // namespace cmet
