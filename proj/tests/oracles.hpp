#pragma once

// Test-side reference computations, independent of the library paths they
// check: quadrature, reference ODE integration, closed forms.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// 16-point Gauss-Legendre nodes and weights on [-1, 1]
inline const double kGaussX[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                  0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                  0.9445750230732326, 0.9894009349916499};
inline const double kGaussW[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                  0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                  0.0622535239386479, 0.0271524594117541};

inline double gauss_panel(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 8; i++)
        acc += kGaussW[i] * (f(mid + half * kGaussX[i]) + f(mid - half * kGaussX[i]));
    return acc * half;
}

// composite Gauss-Legendre over explicit panel edges
inline double gauss_composite(const std::function<double(double)>& f, const std::vector<double>& edges) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); i++) acc += gauss_panel(f, edges[i], edges[i + 1]);
    return acc;
}

inline std::vector<double> uniform_edges(double a, double b, int panels) {
    std::vector<double> e(panels + 1);
    for (int i = 0; i <= panels; i++) e[i] = a + (b - a) * i / panels;
    return e;
}

// edges geometric in (a, b] after a linear start panel
inline std::vector<double> geometric_edges(double a, double b, int panels) {
    std::vector<double> e(panels + 1);
    const double ratio = std::pow(b / a, 1.0 / panels);
    e[0] = 0.0;
    double x = a;
    for (int i = 1; i <= panels; i++, x *= ratio) e[i] = x;
    e[panels] = b;
    return e;
}

inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 96) {
    return gauss_composite(f, uniform_edges(a, b, panels));
}

// perimeter of the ellipse (ax cos t, ay sin t)
inline double ellipse_perimeter(double ax, double ay) {
    return integrate([&](double t) { return std::hypot(ax * std::sin(t), ay * std::cos(t)); }, 0.0,
                     2.0 * M_PI, 128);
}

// K_nu(x) from the integral representation int_0^inf e^{-x cosh t} cosh(nu t) dt
inline double bessel_k_quadrature(double nu, double x) {
    double hi = 2.0;
    while (x * std::cosh(hi) < 750.0 && hi < 60.0) hi += 0.25;
    return integrate([&](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); }, 0.0,
                     hi, 256);
}

// radial quadrature of k(0) = (2 pi)^{-d} int (1+|xi|^2)^{-s} d xi for d = 2, 3
inline double kernel_k0_quadrature(double s, int d) {
    const auto edges = geometric_edges(1e-3, 500.0, 160);
    if (d == 2) {
        const double val = gauss_composite([&](double r) { return r * std::pow(1.0 + r * r, -s); }, edges);
        return val * 2.0 * M_PI / std::pow(2.0 * M_PI, 2);
    }
    if (d == 3) {
        const double val =
            gauss_composite([&](double r) { return r * r * std::pow(1.0 + r * r, -s); }, edges);
        return val * 4.0 * M_PI / std::pow(2.0 * M_PI, 3);
    }
    throw std::runtime_error("unsupported dimension");
}

// 2D inverse Fourier transform of (1+|xi|^2)^{-s} at radius r via the radial
// (Hankel) reduction with J_0
inline double kernel_value_hankel_2d(double s, double r) {
    return gauss_composite(
               [&](double rho) {
                   return rho * std::cyl_bessel_j(0.0, rho * r) * std::pow(1.0 + rho * rho, -s);
               },
               uniform_edges(0.0, 120.0, 240)) /
           (2.0 * M_PI);
}

// Cash-Karp RK45 with adaptive steps for scalar ODEs
inline double ode45(const std::function<double(double, double)>& f, double y0, double t0, double t1,
                    double tol = 1e-12) {
    double t = t0, y = y0, h = (t1 - t0) / 64.0;
    const int maxit = 2000000;
    for (int it = 0; it < maxit && t < t1; it++) {
        if (t + h > t1) h = t1 - t;
        const double k1 = f(t, y);
        const double k2 = f(t + h / 5.0, y + h * k1 / 5.0);
        const double k3 = f(t + 3.0 * h / 10.0, y + h * (3.0 * k1 + 9.0 * k2) / 40.0);
        const double k4 = f(t + 3.0 * h / 5.0, y + h * (0.3 * k1 - 0.9 * k2 + 1.2 * k3));
        const double k5 = f(t + h, y + h * (-11.0 / 54.0 * k1 + 2.5 * k2 - 70.0 / 27.0 * k3 +
                                            35.0 / 27.0 * k4));
        const double k6 =
            f(t + 7.0 / 8.0 * h,
              y + h * (1631.0 / 55296.0 * k1 + 175.0 / 512.0 * k2 + 575.0 / 13824.0 * k3 +
                       44275.0 / 110592.0 * k4 + 253.0 / 4096.0 * k5));
        const double y5 = y + h * (37.0 / 378.0 * k1 + 250.0 / 621.0 * k3 + 125.0 / 594.0 * k4 +
                                   512.0 / 1771.0 * k6);
        const double y4 = y + h * (2825.0 / 27648.0 * k1 + 18575.0 / 48384.0 * k3 +
                                   13525.0 / 55296.0 * k4 + 277.0 / 14336.0 * k5 + 0.25 * k6);
        const double err = std::abs(y5 - y4);
        const double scale = tol * (1.0 + std::abs(y));
        if (err <= scale) {
            t += h;
            y = y5;
        }
        h *= std::clamp(0.9 * std::pow(scale / (err + 1e-300), 0.2), 0.2, 5.0);
    }
    return y;
}

// minimal constrained quadratic: min w^T G w subject to C w = u, where C is
// the block of G rows belonging to the constraint set. Returns the minimum.
inline double constrained_min_energy(const Eigen::MatrixXd& gram, const std::vector<int>& rows,
                                     const Eigen::VectorXd& u) {
    const int total = static_cast<int>(gram.rows());
    const int nc = static_cast<int>(rows.size());
    Eigen::MatrixXd c(nc, total);
    for (int i = 0; i < nc; i++) c.row(i) = gram.row(rows[i]);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    const Eigen::MatrixXd ginv_ct = llt.solve(c.transpose());
    const Eigen::MatrixXd h = c * ginv_ct;
    Eigen::LLT<Eigen::MatrixXd> hllt(0.5 * (h + h.transpose()));
    const Eigen::VectorXd lambda = hllt.solve(u);
    // w = G^{-1} C^T lambda and E = lambda^T H lambda = lambda^T u
    return lambda.dot(u);
}

}  // namespace oracle
