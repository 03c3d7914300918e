#pragma once

#include "cmet/outer.hpp"
#include "cmet/types.hpp"

namespace cmet {

// Trajectories of tracked points under a time-dependent ambient field.
struct FlowResult {
    std::vector<MatrixXd> frames;  // steps+1 entries, each P x d
    int steps = 0;

    const MatrixXd& initial() const { return frames.front(); }
    const MatrixXd& final() const { return frames.back(); }
};

// RK4 integration of xdot = X(t, x) over [0, 1] with piecewise-linear
// interpolation in time of the field sequence (fields.size() >= 1; a single
// field means autonomous). Points integrate independently: parallel over
// points, with a serial reference kept for testing. steps >= 8.
FlowResult integrate_flow(const std::vector<AmbientField>& fields, const MatrixXd& points, int steps);
FlowResult integrate_flow_serial(const std::vector<AmbientField>& fields, const MatrixXd& points, int steps);

// Forward flow followed by the flow of v(t) = -u(1-t); returns the maximum
// point displacement from the start, O(steps^-4) for smooth fields.
double inverse_flow_check(const std::vector<AmbientField>& fields, const MatrixXd& points, int steps);

// Final positions as a curve; re-validates the immersion invariant (a
// discrete violation signals step-size trouble, since diffeomorphisms
// preserve embeddedness).
Curve act_on_curve(const FlowResult& fr, const Curve& q);

// Scalar field sampled on a uniform periodic grid over [-L, L)^dim,
// resolution points per axis (power of two >= 64), row-major storage.
struct PeriodicGridField {
    int dim = 1;
    double half_width = 8.0;
    int resolution = 64;
    std::vector<double> values;

    PeriodicGridField() = default;
    PeriodicGridField(int dim_, double half_width_, int resolution_);

    std::size_t size() const { return values.size(); }
    double spacing() const { return 2.0 * half_width / resolution; }
    // coordinate of grid index along one axis
    double coord(int i) const { return -half_width + i * spacing(); }
    void validate() const;
};

// Smoothing operator S_k f = eta_k . chi_k(D) f: sharp Fourier cutoff to
// modes |xi| <= k followed by multiplication with the dilated bump
// eta_k(x) = eta(x/k), where eta == 1 on |x| < 1 and is supported in |x| < 2
// (profile exp(1 - 1/(1 - t^2)) on the transition shell). Throws DomainError
// when k exceeds the grid Nyquist frequency.
PeriodicGridField smooth_sk(const PeriodicGridField& f, int k);

// Grid H^s norm with the discrete multiplier (1 + |xi|^2)^{s/2} under the
// same transform convention as the circle norms (forward 1/N, volume-weighted
// Parseval).
double grid_sobolev_norm(const PeriodicGridField& f, double s);

}  // namespace cmet
