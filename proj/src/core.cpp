#include "cmet/core.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "cmet/fourier.hpp"

namespace cmet {

void Curve::validate() const {
    const int N = samples();
    if (N < 8) throw ConfigError("curve sample count must be at least 8, got " + std::to_string(N));
    if (dim() < 1) throw ConfigError("curve ambient dimension must be positive");
    if (!points.allFinite()) throw ConfigError("curve contains non-finite coordinates");
    for (int i = 0; i < N; i++) {
        const int j = (i + 1) % N;
        if ((points.row(j) - points.row(i)).norm() <= 0.0)
            throw ImmersionError("zero-length edge between samples " + std::to_string(i) + " and " +
                                 std::to_string(j));
    }
}

void TangentField::validate() const {
    if (!vectors.allFinite()) throw ConfigError("tangent field contains non-finite entries");
}

void TangentField::validate_against(const Curve& c) const {
    validate();
    if (samples() != c.samples() || dim() != c.dim())
        throw ConfigError("tangent field shape " + std::to_string(samples()) + "x" + std::to_string(dim()) +
                          " does not match curve " + std::to_string(c.samples()) + "x" + std::to_string(c.dim()));
}

void MetricConfig::validate(bool for_comparison) const {
    if (d < 1) throw ConfigError("ambient dimension d must be positive");
    if (n < 2) throw ConfigError("inner metric order n must be at least 2");
    if (static_cast<int>(a.size()) != n + 1)
        throw ConfigError("coefficient list a must have n+1 entries");
    if (!(a.front() > 0.0)) throw ConfigError("coefficient a_0 must be positive");
    if (!(a.back() > 0.0)) throw ConfigError("coefficient a_n must be positive");
    for (double aj : a)
        if (aj < 0.0) throw ConfigError("coefficients a_j must be nonnegative");
    if (!(s > d / 2.0 + 1.0))
        throw ConfigError("outer order s must exceed d/2 + 1");
    if (!(kernel_scale > 0.0)) throw ConfigError("kernel scale must be positive");
    if (for_comparison && !(s >= n + (d - 1) / 2.0))
        throw ConfigError("comparison requires s >= n + (d-1)/2");
}

VectorXd flatten(const MatrixXd& m) {
    VectorXd v(m.rows() * m.cols());
    for (int i = 0; i < m.rows(); i++)
        for (int j = 0; j < m.cols(); j++) v(i * m.cols() + j) = m(i, j);
    return v;
}

MatrixXd unflatten(const VectorXd& v, int d) {
    if (v.size() % d != 0) throw ConfigError("flat vector length not divisible by dimension");
    MatrixXd m(v.size() / d, d);
    for (int i = 0; i < m.rows(); i++)
        for (int j = 0; j < d; j++) m(i, j) = v(i * d + j);
    return m;
}

std::uint64_t hash_points(const MatrixXd& pts) {
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < pts.rows(); i++)
        for (int j = 0; j < pts.cols(); j++) {
            double x = pts(i, j);
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &x, sizeof(double));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 1099511628211ull;
            }
        }
    return h;
}

Curve make_circle(int N, double radius, double cx, double cy) {
    MatrixXd pts(N, 2);
    for (int i = 0; i < N; i++) {
        const double t = 2.0 * M_PI * i / N;
        pts(i, 0) = cx + radius * std::cos(t);
        pts(i, 1) = cy + radius * std::sin(t);
    }
    return Curve(std::move(pts));
}

Curve make_ellipse(int N, double ax, double ay) {
    MatrixXd pts(N, 2);
    for (int i = 0; i < N; i++) {
        const double t = 2.0 * M_PI * i / N;
        pts(i, 0) = ax * std::cos(t);
        pts(i, 1) = ay * std::sin(t);
    }
    return Curve(std::move(pts));
}

double chord_length(const Curve& c) {
    double total = 0.0;
    const int N = c.samples();
    for (int i = 0; i < N; i++) total += (c.points.row((i + 1) % N) - c.points.row(i)).norm();
    return total;
}

VectorXd arc_element(const Curve& c) {
    c.validate();
    const int N = c.samples();
    const double dtheta = 2.0 * M_PI / N;
    VectorXd w(N);
    for (int i = 0; i < N; i++) {
        const int ip = (i + 1) % N, im = (i - 1 + N) % N;
        w(i) = (c.points.row(ip) - c.points.row(im)).norm() / (2.0 * dtheta);
        if (!(w(i) > 0.0))
            throw ImmersionError("vanishing discrete speed at sample " + std::to_string(i));
    }
    return w;
}

double curve_length(const Curve& c) {
    return arc_element(c).sum() * (2.0 * M_PI / c.samples());
}

Curve resample(const Curve& c, int N_new) {
    c.validate();
    if (N_new < 8) throw ConfigError("resample target must be at least 8 samples");
    const int N = c.samples();
    std::vector<double> cum(N + 1, 0.0);
    for (int i = 0; i < N; i++)
        cum[i + 1] = cum[i] + (c.points.row((i + 1) % N) - c.points.row(i)).norm();
    const double total = cum[N];
    if (!(total > 0.0)) throw ImmersionError("degenerate curve: zero total length");

    MatrixXd out(N_new, c.dim());
    int seg = 0;
    for (int k = 0; k < N_new; k++) {
        const double s = total * k / N_new;
        while (seg + 1 < N && cum[seg + 1] <= s) seg++;
        const double len = cum[seg + 1] - cum[seg];
        const double alpha = (s - cum[seg]) / len;
        out.row(k) = (1.0 - alpha) * c.points.row(seg) + alpha * c.points.row((seg + 1) % N);
    }
    Curve r(std::move(out));
    r.validate();
    return r;
}

TangentField arclength_derivative(const Curve& c, const TangentField& u) {
    u.validate_against(c);
    const VectorXd w = arc_element(c);
    const int N = c.samples();
    const double dtheta = 2.0 * M_PI / N;
    MatrixXd out(N, c.dim());
    for (int i = 0; i < N; i++) {
        const int ip = (i + 1) % N, im = (i - 1 + N) % N;
        out.row(i) = (u.vectors.row(ip) - u.vectors.row(im)) / (2.0 * dtheta * w(i));
    }
    return TangentField(std::move(out));
}

double sobolev_norm_circle(const TangentField& u, double order) {
    if (order < 0.0) throw ConfigError("sobolev order must be nonnegative");
    u.validate();
    const int N = u.samples();
    double total = 0.0;
    for (int col = 0; col < u.dim(); col++) {
        const auto coeffs = dft_forward(u.vectors.col(col));
        for (int j = 0; j < N; j++) {
            const double m = signed_mode(j, N);
            total += 2.0 * M_PI * std::pow(1.0 + m * m, order) * std::norm(coeffs[j]);
        }
    }
    return std::sqrt(total);
}

}  // namespace cmet
