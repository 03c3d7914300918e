#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace cmet {

// One Fourier convention everywhere: forward transform with 1/N,
//     f_hat(m) = (1/N) sum_j f(theta_j) e^{-i m theta_j},
// and Parseval in the d-theta measure, ||f||^2_{L^2(dtheta)} = 2*pi*sum |f_hat(m)|^2.
// Signed modes m run over {-N/2, ..., N/2 - 1} for even N.

// signed mode index for slot j of an N-point transform
inline int signed_mode(int j, int N) { return (j < (N + 1) / 2) ? j : j - N; }

// direct O(N^2) forward DFT (curve-sized inputs; slot j carries mode signed_mode(j, N))
std::vector<std::complex<double>> dft_forward(const Eigen::VectorXd& f);

// Circulant N x N matrix with eigenvalue g(m) on the Fourier mode m,
//     M_{jk} = (1/N) sum_m g(m) e^{i m (theta_j - theta_k)}.
// Real and symmetric when g is even in m (mode -N/2 pairs with itself).
Eigen::MatrixXd circulant_from_multiplier(int N, const std::vector<double>& g);

// Gram matrix of the H^order(S^1, dtheta) inner product on point samples:
// u^T M u = 2*pi*sum_m (1+m^2)^order |u_hat(m)|^2. Multiplier form with
// g(m) = (2*pi/N)(1+m^2)^order.
Eigen::MatrixXd circle_sobolev_gram(int N, double order);

// Matrix square root of the same Gram (multiplier sqrt), used to symmetrize
// generalized eigenproblems without inverting ill-conditioned factors.
Eigen::MatrixXd circle_sobolev_gram_sqrt(int N, double order);

// In-place radix-2 complex FFT; n must be a power of two. sign = -1 forward,
// +1 inverse. No normalization (callers divide by n after a forward pass).
void fft_pow2(std::complex<double>* a, int n, int sign);

}  // namespace cmet
