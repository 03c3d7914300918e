#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cmet/core.hpp"
#include "cmet/kernel.hpp"
#include "cmet/outer.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace cmet;

namespace {
const SobolevKernel kKern(3.0, 2, 1.0);
}

TEST_CASE("outer_eval: landmark value, zero field, parallelogram law") {
    MatrixXd pt(1, 2);
    pt << 0.2, -0.1;
    const CometricGram b1(kKern, pt);
    MatrixXd e1(1, 2);
    e1 << 1.0, 0.0;
    // single landmark: G^O(u,u) = |u|^2 / k(0) = 8 pi for s=3, d=2
    CHECK(outer_eval(b1, TangentField(e1), TangentField(e1)) ==
          doctest::Approx(8.0 * M_PI).epsilon(1e-12));

    Rng rng(3);
    const Curve q = helpers::random_immersed_curve(32, rng);
    const CometricGram B(kKern, q);
    const MatrixXd zero = MatrixXd::Zero(32, 2);
    CHECK(outer_eval(B, TangentField(zero), TangentField(zero)) == 0.0);

    for (int rep = 0; rep < 5; rep++) {
        const TangentField u = helpers::random_smooth_field(32, 2, rng);
        const TangentField v = helpers::random_smooth_field(32, 2, rng);
        const double upv = outer_eval(B, TangentField(u.vectors + v.vectors), TangentField(u.vectors + v.vectors));
        const double umv = outer_eval(B, TangentField(u.vectors - v.vectors), TangentField(u.vectors - v.vectors));
        const double uu = outer_eval(B, u, u);
        const double vv = outer_eval(B, v, v);
        CHECK(std::abs(upv + umv - 2.0 * uu - 2.0 * vv) <= 1e-10 * (upv + umv));
    }
}

TEST_CASE("outer_eval: invariant under simultaneous rotation") {
    Rng rng(17);
    const Curve q = helpers::random_immersed_curve(32, rng);
    const TangentField u = helpers::random_smooth_field(32, 2, rng);
    const TangentField v = helpers::random_smooth_field(32, 2, rng);
    const double base = outer_eval(kKern, q, u, v);

    const double ang = 0.83;
    Eigen::Matrix2d rot;
    rot << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
    const Curve qr(q.points * rot.transpose());
    const TangentField ur(u.vectors * rot.transpose());
    const TangentField vr(v.vectors * rot.transpose());
    // rotation perturbs the pairwise distances at rounding level; the solve
    // amplifies that by its conditioning
    CHECK(outer_eval(kKern, qr, ur, vr) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("lift_field: interpolation, energy identity, minimality") {
    Rng rng(23);
    const Curve q = helpers::random_immersed_curve(32, rng);
    const TangentField u = helpers::random_smooth_field(32, 2, rng);
    const AmbientField lift = lift_field(kKern, q, u);

    // trace reproduces u
    const MatrixXd traced = lift.eval_at(q.points);
    CHECK((traced - u.vectors).norm() / u.vectors.norm() < 1e-9);

    // ||X||_A^2 equals the metric value
    const double energy = lift.norm_a_squared();
    const double metric = outer_eval(kKern, q, u, u);
    CHECK(std::abs(energy - metric) <= 1e-10 * std::abs(metric));

    // minimality against the constrained least-squares oracle on doubled centers
    MatrixXd stacked(64, 2);
    stacked.topRows(32) = q.points;
    for (int i = 0; i < 32; i++)
        stacked.row(32 + i) = q.points.row(i) * 1.35 + Eigen::RowVector2d(0.05, -0.02);
    MatrixXd joint;
    kernel_matrices(kKern, stacked, joint, nullptr);
    std::vector<int> curve_rows(32);
    for (int i = 0; i < 32; i++) curve_rows[i] = i;
    double oracle_energy = 0.0;
    for (int c = 0; c < 2; c++)
        oracle_energy += oracle::constrained_min_energy(joint, curve_rows, u.vectors.col(c));
    CHECK(std::abs(oracle_energy - energy) <= 1e-8 * energy);

    // trace-annihilating perturbations cannot reduce the energy
    const CometricGram B(kKern, q);
    const MatrixXd cross = joint.topRightCorner(32, 32);
    for (int rep = 0; rep < 20; rep++) {
        MatrixXd zeta_extra(32, 2);
        for (int i = 0; i < 32; i++)
            for (int c = 0; c < 2; c++) zeta_extra(i, c) = 0.5 * rng.normal();
        const MatrixXd zeta_curve = -B.solve(cross * zeta_extra);
        MatrixXd zeta(64, 2);
        zeta.topRows(32) = zeta_curve;
        zeta.bottomRows(32) = zeta_extra;
        // verify the trace of the perturbation really vanishes at curve points
        MatrixXd w_joint(64, 2);
        w_joint.topRows(32) = B.solve(u.vectors);
        w_joint.bottomRows(32).setZero();
        const MatrixXd wz = w_joint + zeta;
        double perturbed = 0.0;
        for (int c = 0; c < 2; c++) perturbed += wz.col(c).dot(joint * wz.col(c));
        CHECK(perturbed >= energy - 1e-8);
    }
}

TEST_CASE("projection identities: idempotence, trace preservation, orthogonality") {
    Rng rng(29);
    const Curve q = helpers::random_immersed_curve(32, rng);

    // X already a lift from q
    const TangentField u = helpers::random_smooth_field(32, 2, rng);
    const AmbientField lifted = lift_field(kKern, q, u);
    const ProjectionReport r1 = projection_identities_check(kKern, q, lifted);
    CHECK(r1.idempotence <= 1e-10);
    CHECK(r1.trace <= 1e-10);

    // random kernel fields with centers off the curve
    for (int rep = 0; rep < 10; rep++) {
        MatrixXd centers(12, 2), weights(12, 2);
        for (int i = 0; i < 12; i++) {
            centers(i, 0) = rng.uniform(-1.6, 1.6);
            centers(i, 1) = rng.uniform(-1.6, 1.6);
            weights(i, 0) = rng.normal();
            weights(i, 1) = rng.normal();
        }
        const AmbientField x(centers, weights, kKern);
        const ProjectionReport rep2 = projection_identities_check(kKern, q, x);
        CHECK(rep2.trace <= 1e-9);
        CHECK(rep2.idempotence <= 1e-8);
        CHECK(rep2.orthogonality <= 1e-8);
    }
}

TEST_CASE("outer_path_energy: zero momenta and the single-landmark line") {
    MomentumPath rest;
    rest.base = make_circle(16);
    rest.momenta.assign(8, MatrixXd::Zero(16, 2));
    const OuterPathEval pe = outer_path_energy(kKern, rest);
    CHECK(pe.energy == 0.0);
    for (const auto& c : pe.trajectory)
        CHECK((c.points - rest.base.points).cwiseAbs().maxCoeff() == 0.0);

    // one landmark, constant momentum: qdot = k(0) p exactly
    MomentumPath one;
    one.base = Curve(MatrixXd::Zero(1, 2));
    MatrixXd p(1, 2);
    p << 0.7, -0.4;
    one.momenta.assign(16, p);
    const OuterPathEval pe1 = outer_path_energy(kKern, one);
    const double k0 = kKern.k0();
    CHECK(pe1.energy == doctest::Approx(k0 * p.squaredNorm()).epsilon(1e-12));
    CHECK(pe1.length == doctest::Approx(std::sqrt(k0) * p.norm()).epsilon(1e-12));
    CHECK((pe1.trajectory.back().points - k0 * p).cwiseAbs().maxCoeff() < 1e-12);
}

namespace {

// re-solve momenta that make the explicit-midpoint stepper reproduce a given
// consecutive pair of states exactly (fixed point on p)
MatrixXd resolve_step_momentum(const SobolevKernel& kern, const MatrixXd& q_from,
                               const MatrixXd& q_to, double dt) {
    const MatrixXd v = (q_to - q_from) / dt;
    CometricGram b_from(kern, q_from);
    MatrixXd p = b_from.solve(v);
    for (int it = 0; it < 60; it++) {
        const MatrixXd h = q_from + 0.5 * dt * b_from.apply(p);
        CometricGram b_half(kern, h);
        const MatrixXd p_next = b_half.solve(v);
        const double delta = (p_next - p).norm();
        p = p_next;
        if (delta < 1e-14 * (1.0 + p.norm())) break;
    }
    return p;
}

}  // namespace

TEST_CASE("outer_path_energy: time reversal with re-solved momenta") {
    // smooth momentum path on a small curve, fine steps
    const int N = 12, T = 512;
    const Curve base = make_circle(N);
    MomentumPath mp;
    mp.base = base;
    for (int t = 0; t < T; t++) {
        const double tau = (t + 0.5) / T;
        MatrixXd p(N, 2);
        for (int i = 0; i < N; i++) {
            const double th = 2.0 * M_PI * i / N;
            p(i, 0) = 0.8 * std::cos(th + tau) * (1.0 - 0.3 * tau);
            p(i, 1) = 0.5 * std::sin(2.0 * th - tau);
        }
        mp.momenta.push_back(p);
    }
    const OuterPathEval fwd = outer_path_energy(kKern, mp);

    const double dt = 1.0 / T;
    double reversed_energy = 0.0;
    for (int t = 0; t < T; t++) {
        const MatrixXd& from = mp.induced[T - t].points;
        const MatrixXd& to = mp.induced[T - t - 1].points;
        const MatrixXd p = resolve_step_momentum(kKern, from, to, dt);
        const MatrixXd h = from + 0.5 * dt * CometricGram(kKern, from).apply(p);
        reversed_energy += dt * (p.array() * CometricGram(kKern, h).apply(p).array()).sum();
    }
    CHECK(std::abs(reversed_energy - fwd.energy) / fwd.energy < 1e-6);
}

TEST_CASE("outer path gradient agrees with finite differences") {
    Rng rng(63);
    const int N = 10, T = 4;
    MomentumPath mp;
    mp.base = helpers::random_immersed_curve(N, rng, 0.05);
    for (int t = 0; t < T; t++) {
        MatrixXd p(N, 2);
        for (int i = 0; i < N; i++)
            for (int c = 0; c < 2; c++) p(i, c) = 0.4 * rng.normal();
        mp.momenta.push_back(p);
    }
    MatrixXd lambda(N, 2);
    for (int i = 0; i < N; i++)
        for (int c = 0; c < 2; c++) lambda(i, c) = rng.normal();

    auto objective = [&](const MomentumPath& path) {
        MomentumPath copy = path;
        const OuterPathEval pe = outer_path_energy(kKern, copy);
        return pe.energy + (lambda.array() * copy.induced.back().points.array()).sum();
    };

    const std::vector<MatrixXd> grad = outer_path_gradient(kKern, mp, lambda);
    const double h = 1e-6;
    for (int probe = 0; probe < 8; probe++) {
        const int t = static_cast<int>(rng.raw() % T);
        const int i = static_cast<int>(rng.raw() % N);
        const int c = static_cast<int>(rng.raw() % 2);
        MomentumPath plus = mp, minus = mp;
        plus.momenta[t](i, c) += h;
        minus.momenta[t](i, c) -= h;
        const double fd = (objective(plus) - objective(minus)) / (2.0 * h);
        CHECK(grad[t](i, c) == doctest::Approx(fd).epsilon(5e-6));
    }
}

TEST_CASE("outer_distance: identical curves, first-order consistency") {
    PathOptOptions opts;
    opts.T = 8;
    opts.tol = 1e-7;
    opts.match_tol = 1e-5;
    opts.penalty0 = 100.0;
    opts.penalty_stages = 5;
    opts.max_iters = 400;

    const Curve q = make_circle(32);
    const DistanceReport same = outer_distance(kKern, q, q, opts);
    CHECK(same.value == 0.0);
    CHECK(same.converged);

    Rng rng(71);
    const TangentField u = helpers::random_smooth_field(32, 2, rng, 4);
    const double eps = 1e-2;
    Curve q2 = q;
    q2.points += eps * u.vectors;
    const DistanceReport rep = outer_distance(kKern, q, q2, opts);
    const double predicted = std::sqrt(outer_eval(kKern, q, u, u));
    CHECK(rep.value / eps == doctest::Approx(predicted).epsilon(0.05));
    // energy trace of the last stage is nonincreasing
    for (std::size_t i = 1; i < rep.energy_trace.size(); i++)
        CHECK(rep.energy_trace[i] <= rep.energy_trace[i - 1] + 1e-14);
}

TEST_CASE("outer_distance: translated circle against the constant-velocity lift") {
    PathOptOptions opts;
    opts.T = 16;
    opts.tol = 1e-5;
    opts.match_tol = 1e-3;
    opts.max_iters = 300;

    const int N = 64;
    const Curve q1 = make_circle(N);
    Curve q2 = q1;
    q2.points.col(0).array() += 0.5;

    // feasible path: at every step re-solve momenta so the realized velocity
    // is the constant translation field
    const double dt = 1.0 / opts.T;
    MomentumPath feasible;
    feasible.base = q1;
    MatrixXd q = q1.points;
    for (int t = 0; t < opts.T; t++) {
        MatrixXd target = q;
        target.col(0).array() += 0.5 * dt;
        feasible.momenta.push_back(resolve_step_momentum(kKern, q, target, dt));
        q = target;
    }
    const OuterPathEval fe = outer_path_energy(kKern, feasible);
    CHECK((fe.trajectory.back().points - q2.points).cwiseAbs().maxCoeff() < 1e-10);

    const DistanceReport rep = outer_distance(kKern, q1, q2, opts);
    CHECK(rep.value <= fe.length + 1e-3);
    CHECK(rep.value > 0.0);
}

TEST_CASE("outer_distance: realized orbit paths are never shorter than the estimate") {
    PathOptOptions opts;
    opts.T = 8;
    opts.tol = 1e-6;
    opts.match_tol = 1e-4;
    opts.penalty0 = 100.0;
    opts.penalty_stages = 5;

    Rng rng(83);
    const int N = 24;
    const Curve q1 = make_circle(N);
    MomentumPath mp;
    mp.base = q1;
    for (int t = 0; t < opts.T; t++) {
        MatrixXd p(N, 2);
        for (int i = 0; i < N; i++) {
            const double th = 2.0 * M_PI * i / N;
            p(i, 0) = 0.6 * std::cos(th);
            p(i, 1) = 0.4 * std::sin(2.0 * th + 0.3 * t);
        }
        mp.momenta.push_back(p);
    }
    const OuterPathEval pe = outer_path_energy(kKern, mp);
    const Curve q2 = pe.trajectory.back();
    const DistanceReport rep = outer_distance(kKern, q1, q2, opts);
    CHECK(pe.length >= rep.value - 0.05 * rep.value - 2.0 * opts.match_tol);
}

TEST_CASE("hsprime equivalence probe: positive, stable under refinement") {
    double lo_prev = 0.0, hi_prev = 0.0;
    for (int N : {32, 64, 128}) {
        const auto [lo, hi] = hsprime_equivalence_probe(kKern, make_circle(N), 2.5);
        CHECK(lo > 0.0);
        CHECK(hi > lo);
        if (lo_prev > 0.0) {
            CHECK(lo / lo_prev < 2.0);
            CHECK(lo_prev / lo < 2.0);
            CHECK(hi / hi_prev < 2.0);
            CHECK(hi_prev / hi < 2.0);
        }
        lo_prev = lo;
        hi_prev = hi;
    }
}

TEST_CASE("demo_discontinuity_1d: pinned values and the jump at |x| = 1") {
    Demo1DConfig cfg;
    cfg.x = 0.0;
    const Demo1DResult at0 = demo_discontinuity_1d(cfg);
    CHECK(std::abs(at0.value - 2.0 * std::tanh(1.0)) < 1e-2);

    cfg.x = 2.0;
    CHECK(demo_discontinuity_1d(cfg).value <= 1e-2);

    cfg.x = 0.999;
    const double inside = demo_discontinuity_1d(cfg).value;
    cfg.x = 1.001;
    const double outside = demo_discontinuity_1d(cfg).value;
    CHECK(inside / outside > 50.0);

    // off-grid request snaps to the nearest node (spacing 1e-3) and records it
    cfg.x = 0.00042;
    const Demo1DResult snapped = demo_discontinuity_1d(cfg);
    CHECK(snapped.x_requested == 0.00042);
    CHECK(std::abs(snapped.x_snapped - 0.0) < 1e-12);

    Demo1DConfig bad;
    bad.h = 0.5;
    CHECK_THROWS_AS(demo_discontinuity_1d(bad), ConfigError);
}
