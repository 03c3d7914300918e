#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace cmet {

// Objective callback: fill grad (same size as x), return f(x). May return
// +inf to reject a point (line search backs off).
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
    double grad_tol = 1e-5;     // converged when ||grad||_2 < grad_tol
    int max_iters = 500;
    int memory = 20;
    int max_line_search = 50;   // backtracking steps before giving up
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    // optional fixed initial inverse-Hessian approximation H_0 (must be SPD);
    // replaces the usual gamma scaling in the two-loop recursion
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_h0;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<double> trace;  // accepted objective values, nonincreasing
};

LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, Eigen::VectorXd x0, const LbfgsOptions& opts);

}  // namespace cmet
