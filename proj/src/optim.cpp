#include "cmet/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace cmet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Limited-memory BFGS with Armijo backtracking. Objectives may return +inf
// (infeasible point); the line search treats that as a rejection.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, Eigen::VectorXd x0, const LbfgsOptions& opts) {
    LbfgsResult res;
    const int n = static_cast<int>(x0.size());
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd g(n), g_new(n);
    double f = fg(x, g);
    res.trace.push_back(f);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    int it = 0;
    for (; it < opts.max_iters; it++) {
        if (g.norm() < opts.grad_tol * (1.0 + std::abs(f))) {
            res.converged = true;
            break;
        }
        // two-loop recursion
        Eigen::VectorXd q = g;
        const int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; i--) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (opts.apply_h0) {
            q = opts.apply_h0(q);
        } else if (m > 0) {
            const double gamma = s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
            q *= gamma;
        }
        for (int i = 0; i < m; i++) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {  // bad curvature: fall back to steepest descent
            dir = -g;
            slope = -g.squaredNorm();
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = kInf;
        for (int ls = 0; ls < opts.max_line_search; ls++) {
            x_new = x + step * dir;
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + opts.armijo_c * step * slope) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) {
            res.line_search_failed = true;
            break;
        }

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = std::move(x_new);
        g = g_new;
        f = f_new;
        res.trace.push_back(f);
    }

    res.x = std::move(x);
    res.f = f;
    res.grad_norm = g.norm();
    res.iterations = it;
    if (!res.converged) res.converged = g.norm() < opts.grad_tol * (1.0 + std::abs(f));
    return res;
}

}  // namespace cmet
