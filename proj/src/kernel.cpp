#include "cmet/kernel.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <string>

namespace cmet {

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k requires x > 0");
    if (nu < 0.0) throw DomainError("bessel_k requires nu >= 0");
    if (x > 705.0) return 0.0;  // below double underflow of e^{-x}
    return boost::math::cyl_bessel_k(nu, x);
}

namespace {

constexpr double kTinyR = 1e-12;

bool near_integer(double x, long& n) {
    n = std::lround(x);
    return std::abs(x - n) < 1e-12;
}

bool near_half_integer(double x, long& n) {
    // x = n + 1/2
    n = std::lround(x - 0.5);
    return std::abs(x - 0.5 - n) < 1e-12;
}

// K_0 .. K_maxorder by upward recurrence K_{j+1} = K_{j-1} + (2j/z) K_j
void bessel_k_int_ladder(int maxorder, double z, double* out) {
    out[0] = boost::math::cyl_bessel_k(0, z);
    if (maxorder >= 1) out[1] = boost::math::cyl_bessel_k(1, z);
    for (int j = 1; j < maxorder; j++) out[j + 1] = out[j - 1] + (2.0 * j / z) * out[j];
}

// K_{1/2} .. K_{maxorder+1/2}; K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}
void bessel_k_half_ladder(int maxorder, double z, double* out) {
    const double base = std::sqrt(M_PI / (2.0 * z)) * std::exp(-z);
    out[0] = base;                                   // K_{1/2}
    if (maxorder >= 1) out[1] = base * (1.0 + 1.0 / z);  // K_{3/2}
    for (int j = 1; j < maxorder; j++)
        out[j + 1] = out[j - 1] + (2.0 * (j + 0.5) / z) * out[j];
}

}  // namespace

SobolevKernel::SobolevKernel(double s_, int d_, double scale_) : s(s_), d(d_), scale(scale_) {
    if (d < 1) throw ConfigError("kernel dimension must be positive");
    if (!(scale > 0.0)) throw ConfigError("kernel scale must be positive");
    nu = s - d / 2.0;
    if (!(nu > 0.0)) throw ConfigError("kernel requires s > d/2");
    norm_c = std::pow(2.0, 1.0 - nu) / (std::pow(4.0 * M_PI, d / 2.0) * std::tgamma(s));
}

double SobolevKernel::k0() const { return std::tgamma(nu) / (std::pow(4.0 * M_PI, d / 2.0) * std::tgamma(s)); }

double SobolevKernel::eval(double r) const {
    if (r < 0.0) throw DomainError("kernel radius must be nonnegative");
    const double z = r / scale;
    if (z < kTinyR) return k0();
    if (z > 705.0) return 0.0;
    return norm_c * std::pow(z, nu) * boost::math::cyl_bessel_k(nu, z);
}

double SobolevKernel::deriv_over_r(double r) const {
    double k, g;
    eval_pair(r, k, g);
    return g;
}

// k(r) = c z^nu K_nu(z), z = r/scale; d/dz [z^nu K_nu(z)] = -z^nu K_{nu-1}(z),
// hence k'(r)/r = -(c/scale^2) z^{nu-2} * (z K_{nu-1}(z)). Finite at r = 0
// when nu > 1: the limit is -(c/scale^2) 2^{nu-2} Gamma(nu-1).
void SobolevKernel::eval_pair(double r, double& k, double& g) const {
    if (r < 0.0) throw DomainError("kernel radius must be nonnegative");
    if (!(nu > 1.0)) throw DomainError("kernel derivative requires s > d/2 + 1");
    const double z = r / scale;
    const double c2 = norm_c / (scale * scale);
    if (z < kTinyR) {
        k = k0();
        g = -c2 * std::pow(2.0, nu - 2.0) * std::tgamma(nu - 1.0);
        return;
    }
    if (z > 705.0) {
        k = 0.0;
        g = 0.0;
        return;
    }
    double knu, knum1;
    long m;
    if (near_integer(nu, m) && m >= 1 && m <= 12) {
        double ladder[13];
        bessel_k_int_ladder(static_cast<int>(m), z, ladder);
        knu = ladder[m];
        knum1 = ladder[m - 1];
    } else if (near_half_integer(nu, m) && m >= 1 && m <= 12) {
        double ladder[13];
        bessel_k_half_ladder(static_cast<int>(m), z, ladder);
        knu = ladder[m];      // K_{m + 1/2}
        knum1 = ladder[m - 1];
    } else {
        knu = boost::math::cyl_bessel_k(nu, z);
        knum1 = boost::math::cyl_bessel_k(nu - 1.0, z);
    }
    const double zp = std::pow(z, nu);
    k = norm_c * zp * knu;
    g = -c2 * (zp / z) * knum1;
}

void kernel_matrices_serial(const SobolevKernel& kern, const MatrixXd& pts, MatrixXd& K, MatrixXd* G) {
    const int N = static_cast<int>(pts.rows());
    K.resize(N, N);
    if (G) G->resize(N, N);
    for (int i = 0; i < N; i++) {
        for (int j = i; j < N; j++) {
            const double r = (pts.row(i) - pts.row(j)).norm();
            double kv, gv;
            if (G) {
                kern.eval_pair(r, kv, gv);
                (*G)(i, j) = gv;
                (*G)(j, i) = gv;
            } else {
                kv = kern.eval(r);
            }
            K(i, j) = kv;
            K(j, i) = kv;
        }
    }
}

void kernel_matrices(const SobolevKernel& kern, const MatrixXd& pts, MatrixXd& K, MatrixXd* G) {
    const int N = static_cast<int>(pts.rows());
    K.resize(N, N);
    if (G) G->resize(N, N);
    // round-robin rows: the triangular inner loop makes contiguous chunks lopsided
#pragma omp parallel for schedule(static, 1)
    for (int i = 0; i < N; i++) {
        for (int j = i; j < N; j++) {
            const double r = (pts.row(i) - pts.row(j)).norm();
            double kv, gv;
            if (G) {
                kern.eval_pair(r, kv, gv);
                (*G)(i, j) = gv;
                (*G)(j, i) = gv;
            } else {
                kv = kern.eval(r);
            }
            K(i, j) = kv;
            K(j, i) = kv;
        }
    }
}

MatrixXd cross_kernel_matrix(const SobolevKernel& kern, const MatrixXd& a, const MatrixXd& b) {
    MatrixXd M(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows(); i++)
        for (int j = 0; j < b.rows(); j++) M(i, j) = kern.eval((a.row(i) - b.row(j)).norm());
    return M;
}

CometricGram::CometricGram(const SobolevKernel& kern, const Curve& curve)
    : CometricGram(kern, (curve.validate(), curve.points)) {}

CometricGram::CometricGram(const SobolevKernel& kern, const MatrixXd& points)
    : kernel_(kern), d_(static_cast<int>(points.cols())) {
    if (kern.d != d_) throw ConfigError("kernel dimension does not match point dimension");
    if (!points.allFinite()) throw ConfigError("gram points contain non-finite coordinates");
    hash_ = hash_points(points);
    // reject coincident samples with the offending pair
    const int N = static_cast<int>(points.rows());
    for (int i = 0; i < N; i++)
        for (int j = i + 1; j < N; j++)
            if ((points.row(i) - points.row(j)).norm() < 1e-14 * kern.scale)
                throw SpdError("coincident samples " + std::to_string(i) + " and " + std::to_string(j));
    kernel_matrices(kern, points, scalar_, nullptr);
    llt_.compute(scalar_);
    if (llt_.info() != Eigen::Success) {
        jitter_ = 1e-12 * kern.k0();
        MatrixXd jittered = scalar_;
        jittered.diagonal().array() += jitter_;
        llt_.compute(jittered);
        if (llt_.info() != Eigen::Success)
            throw SpdError("gram factorization failed even with diagonal jitter");
    }
}

MatrixXd CometricGram::matrix() const {
    const int N = samples();
    MatrixXd full = MatrixXd::Zero(N * d_, N * d_);
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++)
            for (int a = 0; a < d_; a++) full(i * d_ + a, j * d_ + a) = scalar_(i, j);
    return full;
}

MatrixXd CometricGram::apply(const MatrixXd& p) const {
    if (p.rows() != samples() || p.cols() != d_) throw ConfigError("momentum shape mismatch");
    return scalar_ * p;
}

MatrixXd CometricGram::apply_precise(const MatrixXd& p) const {
    if (p.rows() != samples() || p.cols() != d_) throw ConfigError("momentum shape mismatch");
    const int N = samples();
    MatrixXd out(N, d_);
    for (int c = 0; c < d_; c++)
        for (int i = 0; i < N; i++) {
            long double acc = 0.0L;
            for (int j = 0; j < N; j++)
                acc += static_cast<long double>(scalar_(i, j)) * static_cast<long double>(p(j, c));
            out(i, c) = static_cast<double>(acc);
        }
    return out;
}

MatrixXd CometricGram::solve(const MatrixXd& u, SolveDiag* diag) const {
    if (u.rows() != samples() || u.cols() != d_) throw ConfigError("velocity shape mismatch");
    const int N = samples();
    const double unorm = u.norm();
    auto residual = [&](const MatrixXd& p) {
        MatrixXd r(N, d_);
        for (int c = 0; c < d_; c++)
            for (int i = 0; i < N; i++) {
                long double acc = static_cast<long double>(u(i, c));
                for (int j = 0; j < N; j++)
                    acc -= static_cast<long double>(scalar_(i, j)) * static_cast<long double>(p(j, c));
                r(i, c) = static_cast<double>(acc);
            }
        return r;
    };
    // Mixed-precision iterative refinement with long-double residuals. The
    // corrections always run: after the first solve the residual can already
    // sit at rounding level while the forward error is still kappa * eps in
    // the small-eigenvalue directions, so a residual test alone would stop
    // too early.
    MatrixXd p = llt_.solve(u);
    for (int pass = 0; pass < 2; pass++) p += llt_.solve(residual(p));
    MatrixXd r = residual(p);
    double res = (unorm > 0.0) ? r.norm() / unorm : r.norm();
    if (res > 1e-12) {
        p += llt_.solve(r);
        r = residual(p);
        res = (unorm > 0.0) ? r.norm() / unorm : r.norm();
    }
    if (diag) {
        diag->residual = res;
        diag->conditioning_warning = res > 1e-10;
    }
    if (res > 1e-6) throw SpdError("metric solve residual " + std::to_string(res) + " exceeds 1e-6");
    return p;
}

MatrixXd CometricGram::solve_basic(const MatrixXd& u) const {
    if (u.rows() != samples() || u.cols() != d_) throw ConfigError("velocity shape mismatch");
    return llt_.solve(u);
}

CometricGram gram(const SobolevKernel& k, const Curve& curve) { return CometricGram(k, curve); }

VectorXd cometric_apply(const CometricGram& B, const VectorXd& p) {
    return flatten(B.apply(unflatten(p, B.dim())));
}

VectorXd metric_solve(const CometricGram& B, const VectorXd& u, SolveDiag* diag) {
    return flatten(B.solve(unflatten(u, B.dim()), diag));
}

}  // namespace cmet
