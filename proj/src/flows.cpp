#include "cmet/flows.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "cmet/fourier.hpp"

namespace cmet {

namespace {

// field value at time t in [0,1]: piecewise-linear interpolation of the
// sequence values, evaluated on the full point block
MatrixXd field_at(const std::vector<AmbientField>& fields, double t, const MatrixXd& pts, bool serial) {
    const int F = static_cast<int>(fields.size());
    auto eval = [&](const AmbientField& f) { return serial ? f.eval_at_serial(pts) : f.eval_at(pts); };
    if (F == 1) return eval(fields[0]);
    const double pos = t * (F - 1);
    int idx = static_cast<int>(std::floor(pos));
    idx = std::max(0, std::min(F - 2, idx));
    const double alpha = pos - idx;
    if (alpha == 0.0) return eval(fields[idx]);
    return (1.0 - alpha) * eval(fields[idx]) + alpha * eval(fields[idx + 1]);
}

FlowResult integrate_impl(const std::vector<AmbientField>& fields, const MatrixXd& points, int steps,
                          bool serial) {
    if (fields.empty()) throw ConfigError("flow needs at least one field");
    if (steps < 8) throw ConfigError("flow integration needs at least 8 steps");
    const double dt = 1.0 / steps;
    FlowResult fr;
    fr.steps = steps;
    fr.frames.reserve(steps + 1);
    fr.frames.push_back(points);
    MatrixXd x = points;
    for (int s = 0; s < steps; s++) {
        const double t = s * dt;
        const MatrixXd k1 = field_at(fields, t, x, serial);
        const MatrixXd k2 = field_at(fields, t + 0.5 * dt, x + 0.5 * dt * k1, serial);
        const MatrixXd k3 = field_at(fields, t + 0.5 * dt, x + 0.5 * dt * k2, serial);
        const MatrixXd k4 = field_at(fields, t + dt, x + dt * k3, serial);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite())
            throw ImmersionError("flow produced non-finite values at step " + std::to_string(s));
        fr.frames.push_back(x);
    }
    return fr;
}

}  // namespace

FlowResult integrate_flow(const std::vector<AmbientField>& fields, const MatrixXd& points, int steps) {
    return integrate_impl(fields, points, steps, false);
}

FlowResult integrate_flow_serial(const std::vector<AmbientField>& fields, const MatrixXd& points,
                                 int steps) {
    return integrate_impl(fields, points, steps, true);
}

double inverse_flow_check(const std::vector<AmbientField>& fields, const MatrixXd& points, int steps) {
    const FlowResult forward = integrate_flow(fields, points, steps);
    // v(t) = -u(1 - t): reverse the sequence and negate the weights
    std::vector<AmbientField> reversed;
    reversed.reserve(fields.size());
    for (auto it = fields.rbegin(); it != fields.rend(); ++it)
        reversed.emplace_back(it->centers, (-it->weights).eval(), it->kernel);
    const FlowResult back = integrate_flow(reversed, forward.final(), steps);
    return (back.final() - points).rowwise().norm().maxCoeff();
}

Curve act_on_curve(const FlowResult& fr, const Curve& q) {
    q.validate();
    if (fr.frames.empty()) throw ConfigError("empty flow result");
    if (fr.initial().rows() != q.samples() || fr.initial().cols() != q.dim() ||
        (fr.initial() - q.points).norm() != 0.0)
        throw ConfigError("curve samples were not the tracked points of this flow");
    Curve out(fr.final());
    out.validate();  // transport must preserve the discrete immersion
    return out;
}

PeriodicGridField::PeriodicGridField(int dim_, double half_width_, int resolution_)
    : dim(dim_), half_width(half_width_), resolution(resolution_) {
    std::size_t total = 1;
    for (int a = 0; a < dim; a++) total *= resolution;
    values.assign(total, 0.0);
    validate();
}

void PeriodicGridField::validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2 or 3");
    if (!(half_width > 0.0)) throw ConfigError("grid half-width must be positive");
    if (resolution < 64 || (resolution & (resolution - 1)) != 0)
        throw ConfigError("grid resolution must be a power of two >= 64");
    std::size_t total = 1;
    for (int a = 0; a < dim; a++) total *= resolution;
    if (values.size() != total) throw ConfigError("grid value count does not match resolution");
}

namespace {

// d-dimensional FFT by axis passes over the row-major array
void fft_nd(std::vector<std::complex<double>>& data, int dim, int n, int sign) {
    std::vector<std::complex<double>> line(n);
    std::size_t total = data.size();
    for (int axis = 0; axis < dim; axis++) {
        // stride of the axis and number of lines
        std::size_t stride = 1;
        for (int a = axis + 1; a < dim; a++) stride *= n;
        const std::size_t block = stride * n;
        for (std::size_t base = 0; base < total; base += block) {
            for (std::size_t off = 0; off < stride; off++) {
                for (int i = 0; i < n; i++) line[i] = data[base + off + i * stride];
                fft_pow2(line.data(), n, sign);
                for (int i = 0; i < n; i++) data[base + off + i * stride] = line[i];
            }
        }
    }
}

// squared frequency |xi|^2 of the flat index, modes xi_axis = (pi/L) m
double freq_sq(std::size_t flat, int dim, int n, double half_width) {
    double acc = 0.0;
    for (int a = dim - 1; a >= 0; a--) {
        const int idx = static_cast<int>(flat % n);
        flat /= n;
        const double xi = M_PI / half_width * signed_mode(idx, n);
        acc += xi * xi;
    }
    return acc;
}

// smooth bump: 1 on |x| < 1, exp(1 - 1/(1 - (t-1)^2)) on the shell 1 < t < 2
double bump(double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const double s = t - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double radius_of(std::size_t flat, const PeriodicGridField& f) {
    double acc = 0.0;
    std::size_t rest = flat;
    for (int a = f.dim - 1; a >= 0; a--) {
        const int idx = static_cast<int>(rest % f.resolution);
        rest /= f.resolution;
        const double x = f.coord(idx);
        acc += x * x;
    }
    return std::sqrt(acc);
}

}  // namespace

PeriodicGridField smooth_sk(const PeriodicGridField& f, int k) {
    f.validate();
    if (k < 1) throw ConfigError("smoothing index k must be positive");
    const double nyquist = M_PI / f.half_width * (f.resolution / 2);
    if (k > nyquist)
        throw DomainError("cutoff k = " + std::to_string(k) + " exceeds grid Nyquist frequency " +
                          std::to_string(nyquist));

    std::vector<std::complex<double>> spec(f.values.begin(), f.values.end());
    fft_nd(spec, f.dim, f.resolution, -1);
    const double ksq = static_cast<double>(k) * k;
    for (std::size_t i = 0; i < spec.size(); i++)
        if (freq_sq(i, f.dim, f.resolution, f.half_width) > ksq) spec[i] = 0.0;
    fft_nd(spec, f.dim, f.resolution, +1);

    PeriodicGridField out = f;
    const double scale = 1.0 / static_cast<double>(spec.size());
    for (std::size_t i = 0; i < spec.size(); i++)
        out.values[i] = spec[i].real() * scale * bump(radius_of(i, f) / k);
    return out;
}

double grid_sobolev_norm(const PeriodicGridField& f, double s) {
    f.validate();
    std::vector<std::complex<double>> spec(f.values.begin(), f.values.end());
    fft_nd(spec, f.dim, f.resolution, -1);
    const double inv_total = 1.0 / static_cast<double>(spec.size());
    double volume = 1.0;
    for (int a = 0; a < f.dim; a++) volume *= 2.0 * f.half_width;
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); i++) {
        const double w = std::pow(1.0 + freq_sq(i, f.dim, f.resolution, f.half_width), s);
        acc += w * std::norm(spec[i] * inv_total);
    }
    return std::sqrt(volume * acc);
}

}  // namespace cmet
