#include "cmet/fourier.hpp"

#include <cmath>

#include "cmet/errors.hpp"

namespace cmet {

std::vector<std::complex<double>> dft_forward(const Eigen::VectorXd& f) {
    const int N = static_cast<int>(f.size());
    std::vector<std::complex<double>> out(N);
    const double w = 2.0 * M_PI / N;
    for (int j = 0; j < N; j++) {
        const int m = signed_mode(j, N);
        double re = 0.0, im = 0.0;
        for (int i = 0; i < N; i++) {
            const double ang = w * m * i;
            re += f(i) * std::cos(ang);
            im -= f(i) * std::sin(ang);
        }
        out[j] = std::complex<double>(re / N, im / N);
    }
    return out;
}

Eigen::MatrixXd circulant_from_multiplier(int N, const std::vector<double>& g) {
    if (static_cast<int>(g.size()) != N) throw ConfigError("multiplier length must equal N");
    // first row h(delta) = (1/N) sum_m g(m) cos(m * 2 pi delta / N); the sine
    // part cancels because g pairs m with -m (mode -N/2 pairs with itself).
    std::vector<double> h(N, 0.0);
    const double w = 2.0 * M_PI / N;
    for (int delta = 0; delta < N; delta++) {
        double acc = 0.0;
        for (int j = 0; j < N; j++) {
            const int m = signed_mode(j, N);
            acc += g[j] * std::cos(w * m * delta);
        }
        h[delta] = acc / N;
    }
    Eigen::MatrixXd M(N, N);
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++) M(i, j) = h[(j - i + N) % N];
    // enforce exact symmetry against rounding in the cos sums
    M = 0.5 * (M + M.transpose()).eval();
    return M;
}

Eigen::MatrixXd circle_sobolev_gram(int N, double order) {
    std::vector<double> g(N);
    for (int j = 0; j < N; j++) {
        const double m = signed_mode(j, N);
        g[j] = 2.0 * M_PI / N * std::pow(1.0 + m * m, order);
    }
    return circulant_from_multiplier(N, g);
}

Eigen::MatrixXd circle_sobolev_gram_sqrt(int N, double order) {
    std::vector<double> g(N);
    for (int j = 0; j < N; j++) {
        const double m = signed_mode(j, N);
        g[j] = std::sqrt(2.0 * M_PI / N * std::pow(1.0 + m * m, order));
    }
    return circulant_from_multiplier(N, g);
}

void fft_pow2(std::complex<double>* a, int n, int sign) {
    if (n <= 0 || (n & (n - 1)) != 0) throw ConfigError("fft size must be a power of two");
    // bit reversal
    for (int i = 1, j = 0; i < n; i++) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / len;
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; k++) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace cmet
