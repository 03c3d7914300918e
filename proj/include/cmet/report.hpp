#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmet/types.hpp"

namespace cmet {

// Time-discrete path of curves on the uniform grid t_k = k/T.
struct CurvePath {
    std::vector<Curve> curves;  // T+1 entries, shared N and d

    int steps() const { return static_cast<int>(curves.size()) - 1; }
    void validate() const;
};

// Momenta p_0..p_{T-1} on curve samples driving an orbit path; the induced
// curve trajectory is cached after a forward pass.
struct MomentumPath {
    std::vector<MatrixXd> momenta;  // T entries, each N x d
    Curve base;
    std::vector<Curve> induced;     // T+1 entries once integrated

    int steps() const { return static_cast<int>(momenta.size()); }
};

// Options for the path-energy minimizers. T and the tolerances come from the
// CLI config; penalty fields drive the outer endpoint-matching continuation.
struct PathOptOptions {
    double tol = 1e-5;        // gradient-norm convergence threshold
    int max_iters = 400;
    int T = 16;
    bool continuation = false;  // inner: refine T -> 2T after convergence
    double match_tol = 1e-4;    // outer: endpoint mismatch for convergence
    double penalty0 = 10.0;     // outer: initial endpoint penalty
    double penalty_growth = 10.0;
    int penalty_stages = 4;
};

// Result of a geodesic-distance estimate. value is a certified upper bound:
// the length of the stored path, plus (outer only) a first-order bound on
// the remaining endpoint mismatch.
struct DistanceReport {
    double value = 0.0;
    double path_length = 0.0;
    double mismatch_correction = 0.0;  // 0 for inner reports
    double endpoint_mismatch = 0.0;    // ||q(1) - q2||_F, outer only
    double grad_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> energy_trace;  // accepted objectives (final stage)
    std::optional<CurvePath> curve_path;
    std::optional<MomentumPath> momentum_path;
    std::vector<std::string> warnings;
    MetricConfig metric;
    PathOptOptions options;
};

}  // namespace cmet
