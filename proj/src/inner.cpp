#include "cmet/inner.hpp"

#include <cmath>
#include <limits>

#include "cmet/core.hpp"
#include "cmet/fourier.hpp"
#include "cmet/optim.hpp"

#include <Eigen/Eigenvalues>

namespace cmet {

void CurvePath::validate() const {
    if (curves.size() < 2) throw ConfigError("curve path needs at least two curves");
    const int N = curves.front().samples(), d = curves.front().dim();
    for (const auto& c : curves) {
        if (c.samples() != N || c.dim() != d) throw ConfigError("curve path has inconsistent shapes");
        c.validate();
    }
}

InnerMetric::InnerMetric(MetricConfig cfg) : config(std::move(cfg)) { config.validate(); }

namespace {

// apply D_s = diag(1/w) D_theta with central differences
MatrixXd apply_ds(const MatrixXd& r, const VectorXd& w, double dtheta) {
    const int N = static_cast<int>(r.rows());
    MatrixXd out(N, r.cols());
    for (int i = 0; i < N; i++) {
        const int ip = (i + 1) % N, im = (i - 1 + N) % N;
        out.row(i) = (r.row(ip) - r.row(im)) / (2.0 * dtheta * w(i));
    }
    return out;
}

// transpose of the plain central difference D_theta
MatrixXd apply_dtheta_t(const MatrixXd& y, double dtheta) {
    const int N = static_cast<int>(y.rows());
    MatrixXd out(N, y.cols());
    for (int i = 0; i < N; i++) {
        const int ip = (i + 1) % N, im = (i - 1 + N) % N;
        out.row(i) = (y.row(im) - y.row(ip)) / (2.0 * dtheta);
    }
    return out;
}

// Q = G_mid(v, v) with dQ/dv and dQ/d(midpoint curve). The coefficients of
// the metric see the curve only through the speeds w, so the point gradient
// chains through w_i = |m_{i+1} - m_{i-1}| / (2 dtheta).
double quadratic_with_grads(const InnerMetric& met, const Curve& mid, const MatrixXd& v,
                            MatrixXd& grad_v, MatrixXd& grad_m) {
    const int N = mid.samples();
    const int n = met.config.n;
    const auto& a = met.config.a;
    const double dtheta = 2.0 * M_PI / N;
    const VectorXd w = arc_element(mid);

    // forward ladder r_j = D_s^j v
    std::vector<MatrixXd> r(n + 1);
    r[0] = v;
    for (int j = 1; j <= n; j++) r[j] = apply_ds(r[j - 1], w, dtheta);

    double q = 0.0;
    VectorXd wbar = VectorXd::Zero(N);
    for (int j = 0; j <= n; j++) {
        if (a[j] == 0.0 && j != 0 && j != n) continue;
        const VectorXd sq = r[j].rowwise().squaredNorm();
        q += a[j] * dtheta * w.dot(sq);
        wbar += a[j] * dtheta * sq;
    }

    // reverse sweep through the ladder
    MatrixXd rbar = 2.0 * a[n] * dtheta * (r[n].array().colwise() * w.array()).matrix();
    for (int j = n; j >= 1; j--) {
        // r_j = diag(1/w) D_theta r_{j-1}
        wbar -= (r[j].array() * rbar.array()).rowwise().sum().matrix().cwiseQuotient(w);
        MatrixXd scaled = rbar.array().colwise() / w.array();
        rbar = apply_dtheta_t(scaled, dtheta);
        rbar += 2.0 * a[j - 1] * dtheta * (r[j - 1].array().colwise() * w.array()).matrix();
    }
    grad_v = rbar;

    grad_m = MatrixXd::Zero(N, mid.dim());
    for (int i = 0; i < N; i++) {
        const int ip = (i + 1) % N, im = (i - 1 + N) % N;
        const Eigen::RowVectorXd diff = mid.points.row(ip) - mid.points.row(im);
        const Eigen::RowVectorXd unit = diff / diff.norm();
        grad_m.row(ip) += wbar(i) * unit / (2.0 * dtheta);
        grad_m.row(im) -= wbar(i) * unit / (2.0 * dtheta);
    }
    return q;
}

Curve midpoint_curve(const Curve& a, const Curve& b) { return Curve(0.5 * (a.points + b.points)); }

}  // namespace

double inner_eval(const InnerMetric& m, const Curve& c, const TangentField& u, const TangentField& v) {
    u.validate_against(c);
    v.validate_against(c);
    const int N = c.samples();
    const double dtheta = 2.0 * M_PI / N;
    const VectorXd w = arc_element(c);
    const auto& a = m.config.a;

    MatrixXd ru = u.vectors, rv = v.vectors;
    double total = a[0] * dtheta * ((ru.array() * rv.array()).rowwise().sum() * w.array()).sum();
    for (int j = 1; j <= m.config.n; j++) {
        ru = apply_ds(ru, w, dtheta);
        rv = apply_ds(rv, w, dtheta);
        if (a[j] == 0.0) continue;
        total += a[j] * dtheta * ((ru.array() * rv.array()).rowwise().sum() * w.array()).sum();
    }
    return total;
}

MatrixXd inner_gram_scalar(const InnerMetric& m, const Curve& c) {
    const int N = c.samples();
    const double dtheta = 2.0 * M_PI / N;
    const VectorXd w = arc_element(c);

    MatrixXd dth = MatrixXd::Zero(N, N);
    for (int i = 0; i < N; i++) {
        dth(i, (i + 1) % N) = 1.0 / (2.0 * dtheta);
        dth(i, (i - 1 + N) % N) = -1.0 / (2.0 * dtheta);
    }
    MatrixXd ds = w.cwiseInverse().asDiagonal() * dth;

    MatrixXd gram = MatrixXd::Zero(N, N);
    MatrixXd power = MatrixXd::Identity(N, N);
    const VectorXd wq = w * dtheta;
    for (int j = 0; j <= m.config.n; j++) {
        if (m.config.a[j] != 0.0) gram += m.config.a[j] * power.transpose() * wq.asDiagonal() * power;
        if (j < m.config.n) power = (ds * power).eval();
    }
    return 0.5 * (gram + gram.transpose());
}

MatrixXd inner_gram(const InnerMetric& m, const Curve& c) {
    const MatrixXd scalar = inner_gram_scalar(m, c);
    const int N = c.samples(), d = c.dim();
    MatrixXd full = MatrixXd::Zero(N * d, N * d);
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++)
            for (int a = 0; a < d; a++) full(i * d + a, j * d + a) = scalar(i, j);
    return full;
}

PathEnergy inner_path_energy(const InnerMetric& m, const CurvePath& path) {
    path.validate();
    const int T = path.steps();
    const double dt = 1.0 / T;
    PathEnergy out;
    for (int t = 0; t < T; t++) {
        const Curve mid = midpoint_curve(path.curves[t], path.curves[t + 1]);
        MatrixXd v = (path.curves[t + 1].points - path.curves[t].points) * T;
        const double q = inner_eval(m, mid, TangentField(v), TangentField(v));
        out.energy += q * dt;
        out.length += std::sqrt(std::max(q, 0.0)) * dt;
    }
    return out;
}

namespace {

// stack/unstack interior curves of a path
VectorXd pack_interior(const std::vector<Curve>& curves) {
    const int T = static_cast<int>(curves.size()) - 1;
    const int N = curves[0].samples(), d = curves[0].dim();
    VectorXd x((T - 1) * N * d);
    for (int t = 1; t < T; t++) x.segment((t - 1) * N * d, N * d) = flatten(curves[t].points);
    return x;
}

void unpack_interior(const VectorXd& x, std::vector<Curve>& curves) {
    const int T = static_cast<int>(curves.size()) - 1;
    const int N = curves[0].samples(), d = curves[0].dim();
    for (int t = 1; t < T; t++)
        curves[t].points = unflatten(x.segment((t - 1) * N * d, N * d), d);
}

std::vector<Curve> linear_path(const Curve& c1, const Curve& c2, int T) {
    std::vector<Curve> curves(T + 1);
    for (int t = 0; t <= T; t++) {
        const double alpha = static_cast<double>(t) / T;
        curves[t] = Curve((1.0 - alpha) * c1.points + alpha * c2.points);
    }
    return curves;
}

bool path_immersed(const std::vector<Curve>& curves) {
    try {
        for (const auto& c : curves) c.validate();
        for (std::size_t t = 0; t + 1 < curves.size(); t++)
            midpoint_curve(curves[t], curves[t + 1]).validate();
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

// feasible start when the straight-line path degenerates: route through a
// circle waypoint of matching size
std::vector<Curve> waypoint_path(const Curve& c1, const Curve& c2, int T) {
    const int N = c1.samples();
    const Eigen::RowVectorXd mean = 0.5 * (c1.points.colwise().mean() + c2.points.colwise().mean());
    const double radius = 0.5 * (chord_length(c1) + chord_length(c2)) / (2.0 * M_PI);
    Curve wp = make_circle(N, radius, mean(0), c1.dim() > 1 ? mean(1) : 0.0);
    std::vector<Curve> curves(T + 1);
    const int half = T / 2;
    for (int t = 0; t <= T; t++) {
        if (t <= half) {
            const double alpha = static_cast<double>(t) / half;
            curves[t] = Curve((1.0 - alpha) * c1.points + alpha * wp.points);
        } else {
            const double alpha = static_cast<double>(t - half) / (T - half);
            curves[t] = Curve((1.0 - alpha) * wp.points + alpha * c2.points);
        }
    }
    return curves;
}

}  // namespace

DistanceReport inner_distance(const InnerMetric& m, const Curve& c1, const Curve& c2,
                              const PathOptOptions& opts) {
    c1.validate();
    c2.validate();
    if (c1.samples() != c2.samples())
        throw ConfigError("curve sample count mismatch: " + std::to_string(c1.samples()) + " vs " +
                          std::to_string(c2.samples()));
    if (c1.dim() != c2.dim()) throw ConfigError("curve dimension mismatch");
    if (opts.T < 1) throw ConfigError("path step count T must be positive");

    DistanceReport rep;
    rep.metric = m.config;
    rep.options = opts;

    if ((c1.points - c2.points).norm() == 0.0) {
        rep.converged = true;
        rep.curve_path = CurvePath{{c1, c2}};
        return rep;
    }

    const int N = c1.samples(), d = c1.dim();
    // The energy Hessian in the interior-curve variables is dominated by
    // (2/dt) M(c) blocks; preconditioning with M^{-1} at the start curve
    // leaves only the mild time-coupling for L-BFGS to learn.
    Eigen::LLT<MatrixXd> gram_llt(inner_gram_scalar(m, c1));
    auto run_T = [&](int T, std::vector<Curve> curves, std::vector<double>& trace, bool& ls_failed,
                     double& gnorm, bool& conv) {
        const double dt = 1.0 / T;
        ObjectiveFn fg = [&](const VectorXd& x, VectorXd& grad) -> double {
            unpack_interior(x, curves);
            grad.setZero();
            double energy = 0.0;
            try {
                for (int t = 0; t < T; t++) {
                    const Curve mid = midpoint_curve(curves[t], curves[t + 1]);
                    MatrixXd v = (curves[t + 1].points - curves[t].points) * T;
                    MatrixXd gv, gm;
                    const double q = quadratic_with_grads(m, mid, v, gv, gm);
                    energy += q * dt;
                    // d(energy)/dc_t = dt*(gm/2) - gv ; d/dc_{t+1} = dt*(gm/2) + gv
                    if (t >= 1)
                        grad.segment((t - 1) * N * d, N * d) += flatten((0.5 * dt * gm - gv).eval());
                    if (t + 1 <= T - 1)
                        grad.segment(t * N * d, N * d) += flatten((0.5 * dt * gm + gv).eval());
                }
            } catch (const ImmersionError&) {
                return std::numeric_limits<double>::infinity();
            }
            return energy;
        };
        LbfgsOptions lo;
        lo.grad_tol = opts.tol;
        lo.max_iters = opts.max_iters;
        lo.apply_h0 = [&](const VectorXd& g) {
            VectorXd out(g.size());
            for (int t = 0; t < T - 1; t++) {
                const MatrixXd block = unflatten(g.segment(t * N * d, N * d), d);
                out.segment(t * N * d, N * d) = flatten((0.25 * dt * gram_llt.solve(block)).eval());
            }
            return out;
        };
        auto res = lbfgs_minimize(fg, pack_interior(curves), lo);
        unpack_interior(res.x, curves);
        trace = std::move(res.trace);
        ls_failed = res.line_search_failed;
        gnorm = res.grad_norm;
        conv = res.converged;
        return curves;
    };

    std::vector<Curve> curves = linear_path(c1, c2, opts.T);
    if (!path_immersed(curves)) {
        curves = waypoint_path(c1, c2, opts.T);
        rep.warnings.push_back("linear initialization degenerate; routed through circle waypoint");
        if (!path_immersed(curves)) throw ImmersionError("no immersed initialization path found");
    }

    bool ls_failed = false, conv = false;
    curves = run_T(opts.T, std::move(curves), rep.energy_trace, ls_failed, rep.grad_norm, conv);

    if (opts.continuation && conv) {
        // refine T -> 2T by midpoint insertion and polish
        std::vector<Curve> fine;
        fine.reserve(2 * curves.size() - 1);
        for (std::size_t t = 0; t + 1 < curves.size(); t++) {
            fine.push_back(curves[t]);
            fine.push_back(midpoint_curve(curves[t], curves[t + 1]));
        }
        fine.push_back(curves.back());
        if (path_immersed(fine)) {
            curves = run_T(2 * opts.T, std::move(fine), rep.energy_trace, ls_failed, rep.grad_norm, conv);
        }
    }

    if (ls_failed) rep.warnings.push_back("line search failed; best path retained");

    CurvePath path{std::move(curves)};
    const PathEnergy pe = inner_path_energy(m, path);
    rep.value = pe.length;
    rep.path_length = pe.length;
    rep.converged = conv;
    rep.iterations = static_cast<int>(rep.energy_trace.size()) - 1;
    rep.curve_path = std::move(path);
    return rep;
}

std::pair<double, double> norm_equivalence_probe(const InnerMetric& m, const Curve& c) {
    const int N = c.samples();
    const MatrixXd gram = inner_gram_scalar(m, c);
    const MatrixXd flat = circle_sobolev_gram(N, m.config.n);

    // orthonormal real Fourier basis of the band |m| <= N/4
    const int band = N / 4;
    MatrixXd q(N, 2 * band + 1);
    q.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(N)));
    for (int mm = 1; mm <= band; mm++)
        for (int i = 0; i < N; i++) {
            const double t = 2.0 * M_PI * i * mm / N;
            q(i, 2 * mm - 1) = std::sqrt(2.0 / N) * std::cos(t);
            q(i, 2 * mm) = std::sqrt(2.0 / N) * std::sin(t);
        }

    const MatrixXd mg = q.transpose() * gram * q;
    const MatrixXd hg = q.transpose() * flat * q;
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(0.5 * (mg + mg.transpose()),
                                                          0.5 * (hg + hg.transpose()));
    if (es.info() != Eigen::Success) throw SpdError("generalized eigensolve failed");
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace cmet
