#include "cmet/outer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "cmet/core.hpp"
#include "cmet/fourier.hpp"
#include "cmet/optim.hpp"

namespace cmet {

AmbientField::AmbientField(MatrixXd c, MatrixXd w, SobolevKernel k)
    : centers(std::move(c)), weights(std::move(w)), kernel(std::move(k)) {
    if (centers.rows() != weights.rows() || centers.cols() != weights.cols())
        throw ConfigError("ambient field centers/weights shape mismatch");
}

MatrixXd AmbientField::eval_at_serial(const MatrixXd& pts) const {
    MatrixXd out = MatrixXd::Zero(pts.rows(), pts.cols());
    for (int i = 0; i < pts.rows(); i++)
        for (int j = 0; j < centers.rows(); j++)
            out.row(i) += kernel.eval((pts.row(i) - centers.row(j)).norm()) * weights.row(j);
    return out;
}

MatrixXd AmbientField::eval_at(const MatrixXd& pts) const {
    MatrixXd out = MatrixXd::Zero(pts.rows(), pts.cols());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < pts.rows(); i++)
        for (int j = 0; j < centers.rows(); j++)
            out.row(i) += kernel.eval((pts.row(i) - centers.row(j)).norm()) * weights.row(j);
    return out;
}

double AmbientField::norm_a_squared() const {
    MatrixXd gram;
    kernel_matrices(kernel, centers, gram, nullptr);
    double total = 0.0;
    for (int c = 0; c < weights.cols(); c++) total += weights.col(c).dot(gram * weights.col(c));
    return total;
}

double outer_eval(const CometricGram& B, const TangentField& u, const TangentField& v) {
    const MatrixXd p = B.solve(v.vectors);
    return (u.vectors.array() * p.array()).sum();
}

double outer_eval(const SobolevKernel& k, const Curve& q, const TangentField& u, const TangentField& v) {
    u.validate_against(q);
    v.validate_against(q);
    return outer_eval(CometricGram(k, q), u, v);
}

AmbientField lift_field(const SobolevKernel& k, const Curve& q, const TangentField& u) {
    u.validate_against(q);
    CometricGram B(k, q);
    return AmbientField(q.points, B.solve(u.vectors), k);
}

ProjectionReport projection_identities_check(const SobolevKernel& k, const Curve& q, const AmbientField& X) {
    CometricGram B(k, q);
    const MatrixXd traced = X.eval_at(q.points);           // Tr X
    const MatrixXd v = B.solve(traced);                    // weights of PX
    const MatrixXd traced_px = B.apply_precise(v);         // Tr PX
    const MatrixXd v2 = B.solve(traced_px);                // weights of P(PX)

    ProjectionReport rep;
    double num = 0.0, den = 0.0;
    for (int c = 0; c < v.cols(); c++) {
        const VectorXd dv = (v2 - v).col(c);
        num += dv.dot(B.scalar_matrix() * dv);
        den += v.col(c).dot(B.scalar_matrix() * v.col(c));
    }
    rep.idempotence = std::sqrt(std::max(num, 0.0)) / std::sqrt(std::max(den, 1e-300));
    rep.trace = (traced_px - traced).norm() / std::max(traced.norm(), 1e-300);

    // <A PX, X> via the cross Gram between curve samples and field centers
    const MatrixXd cross = cross_kernel_matrix(k, q.points, X.centers);
    double apx_x = 0.0, apx_px = 0.0;
    for (int c = 0; c < v.cols(); c++) {
        apx_x += v.col(c).dot(cross * X.weights.col(c));
        apx_px += v.col(c).dot(B.scalar_matrix() * v.col(c));
    }
    rep.orthogonality = std::abs(apx_x - apx_px) / std::max(X.norm_a_squared(), 1e-300);
    return rep;
}

namespace {

double min_pairwise_distance(const MatrixXd& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < pts.rows(); i++)
        for (int j = i + 1; j < pts.rows(); j++)
            best = std::min(best, (pts.row(i) - pts.row(j)).norm());
    return best;
}

// per-step record of the forward pass
struct StepWork {
    MatrixXd q, h, a, b;
    MatrixXd kq, gq, kh, gh;  // scalar kernel value / derivative-over-r matrices
};

// d/dx of sum_{j,l} k(|x_j - x_l|) <Lam_j, P_l>, contracted form: row i is
// sum_l G_il (x_i - x_l) (<Lam_i, P_l> + <Lam_l, P_i>)
MatrixXd grad_through_gram(const MatrixXd& x, const MatrixXd& g, const MatrixXd& p, const MatrixXd& lam) {
    const int N = static_cast<int>(x.rows());
    MatrixXd out = MatrixXd::Zero(N, x.cols());
    for (int i = 0; i < N; i++) {
        for (int l = 0; l < N; l++) {
            if (l == i) continue;
            const double pair = lam.row(i).dot(p.row(l)) + lam.row(l).dot(p.row(i));
            out.row(i) += g(i, l) * pair * (x.row(i) - x.row(l));
        }
    }
    return out;
}

// explicit-midpoint forward pass; fills work, returns energy
double outer_forward(const SobolevKernel& kern, const MatrixXd& q0,
                     const std::vector<MatrixXd>& momenta, std::vector<StepWork>& work,
                     MatrixXd& q_final, bool with_derivs) {
    const int T = static_cast<int>(momenta.size());
    const double dt = 1.0 / T;
    const double collapse = 1e-8 * kern.scale;
    work.resize(T);
    MatrixXd q = q0;
    double energy = 0.0;
    for (int t = 0; t < T; t++) {
        StepWork& wk = work[t];
        wk.q = q;
        kernel_matrices(kern, q, wk.kq, with_derivs ? &wk.gq : nullptr);
        wk.a = wk.kq * momenta[t];
        wk.h = q + 0.5 * dt * wk.a;
        if (min_pairwise_distance(wk.h) < collapse)
            throw ImmersionError("trajectory blow-up at step " + std::to_string(t) +
                                 ": points collapsed below 1e-8 * scale");
        kernel_matrices(kern, wk.h, wk.kh, with_derivs ? &wk.gh : nullptr);
        wk.b = wk.kh * momenta[t];
        energy += dt * (momenta[t].array() * wk.b.array()).sum();
        q = q + dt * wk.b;
        if (!q.allFinite() || min_pairwise_distance(q) < collapse)
            throw ImmersionError("trajectory blow-up at step " + std::to_string(t) +
                                 ": points collapsed below 1e-8 * scale");
    }
    q_final = q;
    return energy;
}

// gradient of [energy + phi(q_T)] given lambda_T = dphi/dq_T
void outer_adjoint(const std::vector<StepWork>& work, const std::vector<MatrixXd>& momenta,
                   const MatrixXd& lambda_final, std::vector<MatrixXd>& grad) {
    const int T = static_cast<int>(momenta.size());
    const double dt = 1.0 / T;
    grad.resize(T);
    MatrixXd lambda = lambda_final;
    for (int t = T - 1; t >= 0; t--) {
        const StepWork& wk = work[t];
        const MatrixXd bbar = dt * (lambda + momenta[t]);
        grad[t] = dt * wk.b + wk.kh * bbar;
        const MatrixXd hbar = grad_through_gram(wk.h, wk.gh, momenta[t], bbar);
        const MatrixXd abar = 0.5 * dt * hbar;
        grad[t] += wk.kq * abar;
        lambda = lambda + hbar + grad_through_gram(wk.q, wk.gq, momenta[t], abar);
    }
}

}  // namespace

OuterPathEval outer_path_energy(const SobolevKernel& k, MomentumPath& mp) {
    // landmark configurations are allowed here; only finiteness and
    // distinctness matter for the point dynamics
    if (!mp.base.points.allFinite()) throw ConfigError("base points contain non-finite coordinates");
    const int T = mp.steps();
    if (T < 1) throw ConfigError("momentum path needs at least one step");
    const double dt = 1.0 / T;
    for (const auto& p : mp.momenta)
        if (p.rows() != mp.base.samples() || p.cols() != mp.base.dim())
            throw ConfigError("momentum shape does not match base curve");

    std::vector<StepWork> work;
    MatrixXd q_final;
    OuterPathEval out;
    out.energy = outer_forward(k, mp.base.points, mp.momenta, work, q_final, false);
    out.trajectory.clear();
    out.trajectory.reserve(T + 1);
    out.trajectory.push_back(mp.base);
    for (int t = 0; t < T; t++) {
        const double step_sq = (mp.momenta[t].array() * work[t].b.array()).sum();
        out.length += std::sqrt(std::max(step_sq, 0.0)) * dt;
        out.trajectory.emplace_back(Curve(work[t].q + dt * work[t].b));
    }
    mp.induced = out.trajectory;
    return out;
}

std::vector<MatrixXd> outer_path_gradient(const SobolevKernel& k, const MomentumPath& mp,
                                          const MatrixXd& endpoint_cotangent) {
    std::vector<StepWork> work;
    MatrixXd q_final;
    outer_forward(k, mp.base.points, mp.momenta, work, q_final, true);
    std::vector<MatrixXd> grad;
    outer_adjoint(work, mp.momenta, endpoint_cotangent, grad);
    return grad;
}

DistanceReport outer_distance(const SobolevKernel& k, const Curve& q1, const Curve& q2,
                              const PathOptOptions& opts) {
    q1.validate();
    q2.validate();
    if (q1.samples() != q2.samples())
        throw ConfigError("curve sample count mismatch: " + std::to_string(q1.samples()) + " vs " +
                          std::to_string(q2.samples()));
    if (q1.dim() != q2.dim()) throw ConfigError("curve dimension mismatch");
    if (opts.T < 1) throw ConfigError("path step count T must be positive");

    DistanceReport rep;
    rep.options = opts;
    rep.metric.d = k.d;
    rep.metric.s = k.s;
    rep.metric.kernel_scale = k.scale;

    const int T = opts.T;
    const int N = q1.samples(), d = q1.dim();

    MomentumPath mp;
    mp.base = q1;
    mp.momenta.assign(T, MatrixXd::Zero(N, d));

    if ((q1.points - q2.points).norm() == 0.0) {
        rep.converged = true;
        outer_path_energy(k, mp);
        rep.momentum_path = std::move(mp);
        return rep;
    }

    // initialize momenta from the straight-line path: p_t = B(c_t)^{-1} v_t.
    // The same factorizations double as the L-BFGS preconditioner: the
    // energy Hessian in momentum space is 2 dt B(q_t) to leading order, so
    // H_0 = B^{-1}/(2 dt) removes the Gram conditioning from the search.
    std::vector<CometricGram> precond;
    precond.reserve(T);
    try {
        for (int t = 0; t < T; t++) {
            const double alpha = static_cast<double>(t) / T;
            Curve ct(((1.0 - alpha) * q1.points + alpha * q2.points).eval());
            precond.emplace_back(k, ct.points);
            const MatrixXd v = (q2.points - q1.points);  // constant dc/dt
            mp.momenta[t] = precond.back().solve(v);
        }
    } catch (const std::exception&) {
        // straight-line path degenerates; start from rest and precondition
        // with the base-curve Gram
        precond.clear();
        for (int t = 0; t < T; t++) precond.emplace_back(k, q1.points);
        for (auto& p : mp.momenta) p.setZero();
        rep.warnings.push_back("linear momentum initialization failed; starting from zero");
    }

    auto pack = [&](const std::vector<MatrixXd>& ps) {
        VectorXd x(T * N * d);
        for (int t = 0; t < T; t++) x.segment(t * N * d, N * d) = flatten(ps[t]);
        return x;
    };
    auto unpack = [&](const VectorXd& x, std::vector<MatrixXd>& ps) {
        for (int t = 0; t < T; t++) ps[t] = unflatten(x.segment(t * N * d, N * d), d);
    };

    double penalty = opts.penalty0;
    VectorXd x = pack(mp.momenta);
    bool conv = false;
    for (int stage = 0; stage < opts.penalty_stages; stage++) {
        std::vector<MatrixXd> momenta(T);
        ObjectiveFn fg = [&](const VectorXd& xv, VectorXd& grad) -> double {
            unpack(xv, momenta);
            std::vector<StepWork> work;
            MatrixXd q_final;
            double energy;
            try {
                energy = outer_forward(k, q1.points, momenta, work, q_final, true);
            } catch (const ImmersionError&) {
                return std::numeric_limits<double>::infinity();
            }
            const MatrixXd gap = q_final - q2.points;
            const double obj = energy + penalty * gap.squaredNorm();
            std::vector<MatrixXd> gs;
            outer_adjoint(work, momenta, (2.0 * penalty * gap).eval(), gs);
            for (int t = 0; t < T; t++) grad.segment(t * N * d, N * d) = flatten(gs[t]);
            return obj;
        };
        LbfgsOptions lo;
        lo.grad_tol = opts.tol;
        lo.max_iters = opts.max_iters;
        const double dt = 1.0 / T;
        // Exact inverse of the frozen quadratic model
        //   H = 2 dt diag(B_t) + 2 mu (dt B)(dt B)^T   (Woodbury):
        //   H^{-1} g_t = B_t^{-1} g_t / (2 dt) - w / 2,
        //   w = (I/(2 mu) + B_bar/2)^{-1} (sum_t g_t) / 2,
        // which removes both the Gram stiffness and the penalty curvature
        // from the L-BFGS search.
        MatrixXd woodbury = 0.5 * precond[0].scalar_matrix();
        for (int t = 1; t < T; t++) woodbury += 0.5 * precond[t].scalar_matrix();
        woodbury /= T;  // average Gram; B_bar/2
        woodbury.diagonal().array() += 1.0 / (2.0 * penalty);
        Eigen::LLT<MatrixXd> woodbury_llt(woodbury);
        lo.apply_h0 = [&](const VectorXd& g) {
            MatrixXd gsum = MatrixXd::Zero(N, d);
            for (int t = 0; t < T; t++) gsum += unflatten(g.segment(t * N * d, N * d), d);
            const MatrixXd w = woodbury_llt.solve(0.5 * gsum);
            VectorXd out(g.size());
            for (int t = 0; t < T; t++) {
                const MatrixXd gt = unflatten(g.segment(t * N * d, N * d), d);
                out.segment(t * N * d, N * d) =
                    flatten((precond[t].solve_basic(gt) / (2.0 * dt) - 0.5 * w).eval());
            }
            return out;
        };
        auto res = lbfgs_minimize(fg, x, lo);
        x = res.x;
        conv = res.converged;
        rep.energy_trace = std::move(res.trace);
        rep.grad_norm = res.grad_norm;
        if (res.line_search_failed && stage + 1 == opts.penalty_stages)
            rep.warnings.push_back("line search failed; best momenta retained");
        penalty *= opts.penalty_growth;
    }

    unpack(x, mp.momenta);
    const OuterPathEval pe = outer_path_energy(k, mp);
    const Curve& q_end = pe.trajectory.back();
    const MatrixXd gap = q2.points - q_end.points;
    rep.endpoint_mismatch = gap.norm();
    // first-order bound on the residual endpoint separation, in the metric at q_end
    double corr_sq = 0.0;
    if (rep.endpoint_mismatch > 0.0) {
        corr_sq = outer_eval(CometricGram(k, q_end), TangentField(gap), TangentField(gap));
    }
    rep.mismatch_correction = std::sqrt(std::max(corr_sq, 0.0));
    rep.path_length = pe.length;
    rep.value = pe.length + rep.mismatch_correction;
    rep.converged = conv && rep.endpoint_mismatch < opts.match_tol;
    rep.iterations = static_cast<int>(rep.energy_trace.size()) - 1;
    rep.momentum_path = std::move(mp);
    return rep;
}

std::pair<double, double> hsprime_equivalence_probe(const SobolevKernel& k, const Curve& q, double s_prime) {
    CometricGram B(k, q);
    const MatrixXd half = circle_sobolev_gram_sqrt(q.samples(), s_prime);
    // eigenvalues mu of H^{1/2} B H^{1/2} are reciprocals of the generalized
    // eigenvalues of (A_q, H); avoids inverting the Gram
    const MatrixXd s = half * B.scalar_matrix() * half;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success) throw SpdError("equivalence probe eigensolve failed");
    const double mu_min = es.eigenvalues().minCoeff();
    const double mu_max = es.eigenvalues().maxCoeff();
    if (!(mu_min > 0.0)) throw SpdError("equivalence probe: Gram not positive definite");
    return {1.0 / mu_max, 1.0 / mu_min};
}

Demo1DResult demo_discontinuity_1d(const Demo1DConfig& cfg) {
    if (cfg.half_width < 3.0) throw ConfigError("demo grid half-width must be at least 3");
    if (!(cfg.h > 0.0) || cfg.h > 1e-2) throw ConfigError("demo grid spacing must be in (0, 1e-2]");
    const int n = static_cast<int>(std::lround(2.0 * cfg.half_width / cfg.h)) + 1;
    auto node = [&](int i) { return -cfg.half_width + i * cfg.h; };

    int j = static_cast<int>(std::lround((cfg.x + cfg.half_width) / cfg.h));
    j = std::max(0, std::min(n - 1, j));

    // tridiagonal energy matrix: L^2 mass (trapezoid) plus H^1 coupling on
    // edges whose midpoint lies in I = [-1, 1]
    std::vector<double> diag(n, 0.0), off(n - 1, 0.0);
    for (int i = 0; i < n; i++) diag[i] = (i == 0 || i == n - 1) ? 0.5 * cfg.h : cfg.h;
    for (int i = 0; i + 1 < n; i++) {
        const double mid = node(i) + 0.5 * cfg.h;
        if (std::abs(mid) <= 1.0) {
            const double wq = 1.0 / cfg.h;
            diag[i] += wq;
            diag[i + 1] += wq;
            off[i] -= wq;
        }
    }

    // Thomas solve of K z = e_j; the constrained minimum is 1 / z_j
    std::vector<double> c_prime(n - 1, 0.0), d_prime(n, 0.0), rhs(n, 0.0);
    rhs[j] = 1.0;
    c_prime[0] = off[0] / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for (int i = 1; i < n; i++) {
        const double denom = diag[i] - off[i - 1] * c_prime[i - 1];
        if (i < n - 1) c_prime[i] = off[i] / denom;
        d_prime[i] = (rhs[i] - off[i - 1] * d_prime[i - 1]) / denom;
    }
    std::vector<double> z(n, 0.0);
    z[n - 1] = d_prime[n - 1];
    for (int i = n - 2; i >= 0; i--) z[i] = d_prime[i] - c_prime[i] * z[i + 1];

    Demo1DResult out;
    out.x_requested = cfg.x;
    out.x_snapped = node(j);
    out.value = 1.0 / z[j];
    return out;
}

}  // namespace cmet
