#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cmet/core.hpp"
#include "cmet/kernel.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace cmet;

TEST_CASE("bessel_k: closed form, quadrature and recurrence oracles") {
    // K_{1/2}(1) = sqrt(pi/2) e^{-1}
    const double half = std::sqrt(M_PI / 2.0) * std::exp(-1.0);
    CHECK(std::abs(bessel_k(0.5, 1.0) - half) / half < 1e-10);

    const double k0_ref = oracle::bessel_k_quadrature(0.0, 1.0);
    CHECK(k0_ref == doctest::Approx(0.4210244382).epsilon(1e-8));
    CHECK(std::abs(bessel_k(0.0, 1.0) - k0_ref) / k0_ref < 1e-10);

    // K_2(2) from K_0, K_1 via the upward recurrence
    const double k0 = oracle::bessel_k_quadrature(0.0, 2.0);
    const double k1 = oracle::bessel_k_quadrature(1.0, 2.0);
    const double k2_ref = k0 + (2.0 / 2.0) * k1;
    CHECK(k2_ref == doctest::Approx(0.2537597546).epsilon(1e-8));
    CHECK(std::abs(bessel_k(2.0, 2.0) - k2_ref) / k2_ref < 1e-10);
}

TEST_CASE("bessel_k: accuracy across the working range") {
    for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
        for (double x : {1e-6, 1e-3, 0.1, 1.0, 10.0, 50.0}) {
            const double ref = oracle::bessel_k_quadrature(nu, x);
            CHECK(std::abs(bessel_k(nu, x) - ref) / ref < 1e-10);
        }
    }
    CHECK_THROWS_AS(bessel_k(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(bessel_k(1.0, -1.0), DomainError);
}

TEST_CASE("kernel normalization: k(0) matches the defining Fourier integral") {
    // closed form checks first
    const SobolevKernel k32(3.0, 2);
    CHECK(k32.k0() == doctest::Approx(1.0 / (8.0 * M_PI)).epsilon(1e-12));
    CHECK(k32.eval(0.0) == k32.k0());
    CHECK(k32.eval(0.0) / k32.k0() == 1.0);

    for (auto [s, d] : {std::pair{3.0, 2}, {2.5, 2}, {3.0, 3}}) {
        const SobolevKernel kern(s, d);
        const double quad = oracle::kernel_k0_quadrature(s, d);
        CHECK(std::abs(kern.k0() - quad) < 1e-8);
    }
}

TEST_CASE("kernel profile matches the 2D inverse-Fourier quadrature at r=1") {
    const SobolevKernel kern(3.0, 2);
    const double ref = oracle::kernel_value_hankel_2d(3.0, 1.0);
    CHECK(std::abs(kern.eval(1.0) - ref) < 1e-6);
}

TEST_CASE("kernel derivative-over-r agrees with finite differences") {
    for (auto [s, d] : {std::pair{3.0, 2}, {2.5, 2}, {3.5, 3}}) {
        const SobolevKernel kern(s, d, 0.8);
        for (double r : {0.05, 0.3, 1.0, 2.7}) {
            const double h = 1e-6;
            const double fd = (kern.eval(r + h) - kern.eval(r - h)) / (2.0 * h * r);
            CHECK(kern.deriv_over_r(r) == doctest::Approx(fd).epsilon(1e-6));
        }
        // finite limit at zero
        CHECK(std::isfinite(kern.deriv_over_r(0.0)));
        CHECK(kern.deriv_over_r(0.0) < 0.0);
    }
}

TEST_CASE("gram: landmark mode, decay, and positive definiteness") {
    const SobolevKernel kern(3.0, 2);

    MatrixXd one(1, 2);
    one << 0.3, -0.7;
    const CometricGram g1(kern, one);
    CHECK(g1.matrix().rows() == 2);
    CHECK(g1.matrix()(0, 0) == doctest::Approx(kern.k0()));
    CHECK(g1.matrix()(0, 1) == 0.0);

    MatrixXd two(2, 2);
    two << 0.0, 0.0, 100.0, 0.0;  // |delta| = 100 * scale
    const CometricGram g2(kern, two);
    CHECK(std::abs(g2.scalar_matrix()(0, 1)) < 1e-12 * kern.k0());

    const Curve circle = make_circle(32);
    const CometricGram g3(kern, circle);
    const MatrixXd m = g3.scalar_matrix();
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12 * kern.k0());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("gram: coincident points reported with the offending pair") {
    const SobolevKernel kern(3.0, 2);
    MatrixXd pts = make_circle(16).points;
    pts.row(9) = pts.row(2);
    CHECK_THROWS_WITH_AS(CometricGram(kern, pts), doctest::Contains("2"), SpdError);
}

TEST_CASE("gram: translation invariance") {
    const SobolevKernel kern(3.0, 2);
    Rng rng(7);
    const Curve c = helpers::random_immersed_curve(48, rng);
    const CometricGram g(kern, c);
    Curve shifted = c;
    shifted.points.col(0).array() += 0.5;
    shifted.points.col(1).array() -= 0.25;
    const CometricGram gs(kern, shifted);
    CHECK((g.scalar_matrix() - gs.scalar_matrix()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("cometric_apply: zero, landmark scaling, column extraction") {
    const SobolevKernel kern(3.0, 2);
    const Curve circle = make_circle(24);
    const CometricGram B(kern, circle);

    VectorXd zero = VectorXd::Zero(48);
    CHECK(cometric_apply(B, zero).norm() == 0.0);

    MatrixXd one(1, 2);
    one << 1.0, 2.0;
    const CometricGram b1(kern, one);
    VectorXd p(2);
    p << 2.0, -3.0;
    CHECK((cometric_apply(b1, p) - kern.k0() * p).norm() < 1e-15);

    // e_1 extracts the first column; compare against direct summation
    VectorXd e1 = VectorXd::Zero(48);
    e1(0) = 1.0;
    const VectorXd col = cometric_apply(B, e1);
    for (int i = 0; i < 24; i++) {
        const double direct = kern.eval((circle.points.row(i) - circle.points.row(0)).norm());
        CHECK(std::abs(col(i * 2) - direct) < 1e-12);
        CHECK(col(i * 2 + 1) == 0.0);
    }
}

TEST_CASE("metric_solve: zero, landmark inverse, round trip") {
    const SobolevKernel kern(3.0, 2);

    MatrixXd one(1, 2);
    one << -0.2, 0.4;
    const CometricGram b1(kern, one);
    VectorXd u(2);
    u << 0.5, 1.5;
    // for s=3, d=2: 1/k(0) = 8 pi
    CHECK((metric_solve(b1, u) - 8.0 * M_PI * u).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(metric_solve(b1, VectorXd::Zero(2)).norm() == 0.0);

    const Curve circle = make_circle(32);
    const CometricGram B(kern, circle);
    Rng rng(5);
    VectorXd p(64);
    for (int i = 0; i < 64; i++) p(i) = rng.normal();
    const VectorXd round = metric_solve(B, cometric_apply(B, p));
    CHECK((round - p).norm() / p.norm() < 1e-9);
}

TEST_CASE("operator identities: A B and B A round trips on random curves") {
    // scale 0.5: at scale 1 and N = 128 the Gram condition number (~5e8)
    // puts the double-precision round-trip floor above 1e-9 no matter how
    // the solve is refined; the identity itself is scale-independent
    const SobolevKernel kern(3.0, 2, 0.5);
    Rng rng(21);
    for (int rep = 0; rep < 6; rep++) {
        const int N = 32 + 32 * (rep % 4);  // up to 128
        const Curve c = helpers::random_immersed_curve(N, rng);
        const CometricGram B(kern, c);
        const TangentField u = helpers::random_smooth_field(N, 2, rng);

        // B (A u): solve then apply
        const MatrixXd p = B.solve(u.vectors);
        const MatrixXd u_back = B.apply_precise(p);
        CHECK((u_back - u.vectors).norm() / u.vectors.norm() < 1e-9);

        // A (B p): apply then solve
        const TangentField q = helpers::random_smooth_field(N, 2, rng);
        const MatrixXd v = B.apply_precise(q.vectors);
        const MatrixXd q_back = B.solve(v);
        CHECK((q_back - q.vectors).norm() / q.vectors.norm() < 1e-9);
    }
    // at the default scale the same identity holds up to the conditioning
    // floor; check it at a moderate size
    const SobolevKernel unit_scale(3.0, 2, 1.0);
    const Curve c = helpers::random_immersed_curve(64, rng);
    const CometricGram B(unit_scale, c);
    const TangentField q = helpers::random_smooth_field(64, 2, rng);
    const MatrixXd back = B.solve(B.apply_precise(q.vectors));
    CHECK((back - q.vectors).norm() / q.vectors.norm() < 1e-9);
}

TEST_CASE("gram assembly: parallel kernel equals the serial reference") {
    const SobolevKernel kern(3.0, 2);
    Rng rng(3);
    const Curve c = helpers::random_immersed_curve(96, rng);
    MatrixXd ks, kp, gs, gp;
    kernel_matrices_serial(kern, c.points, ks, &gs);
    kernel_matrices(kern, c.points, kp, &gp);
    CHECK((ks - kp).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gs - gp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve diagnostics carry the refined residual") {
    const SobolevKernel kern(3.0, 2);
    const Curve circle = make_circle(64);
    const CometricGram B(kern, circle);
    Rng rng(9);
    const TangentField u = helpers::random_smooth_field(64, 2, rng);
    SolveDiag diag;
    B.solve(u.vectors, &diag);
    CHECK(diag.residual < 1e-10);
    CHECK_FALSE(diag.conditioning_warning);
}
