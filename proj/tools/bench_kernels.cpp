// Benchmark of the OpenMP kernels against their serial reference
// implementations: Gram assembly, ambient field evaluation, flow
// integration. Differences must be exactly zero (entries are computed
// independently, so the parallel schedule cannot change results).

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cmet/core.hpp"
#include "cmet/flows.hpp"
#include "cmet/kernel.hpp"
#include "cmet/outer.hpp"
#include "cmet/rng.hpp"

using namespace cmet;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_ms(F&& fn, int reps) {
    const double t0 = now_ms();
    for (int r = 0; r < reps; r++) fn();
    return (now_ms() - t0) / reps;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d\n\n", omp_get_max_threads());
#else
    std::printf("openmp not enabled; parallel variants run serially\n\n");
#endif

    const SobolevKernel kern(3.0, 2, 1.0);
    Rng rng(1234);

    {
        const Curve q = make_circle(256);
        MatrixXd ks, kp, gs, gp;
        const double ts = time_ms([&] { kernel_matrices_serial(kern, q.points, ks, &gs); }, 5);
        const double tp = time_ms([&] { kernel_matrices(kern, q.points, kp, &gp); }, 5);
        const double diff = (ks - kp).cwiseAbs().maxCoeff() + (gs - gp).cwiseAbs().maxCoeff();
        std::printf("gram assembly N=256       serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   maxdiff %g\n",
                    ts, tp, ts / tp, diff);
    }

    {
        const Curve q = make_circle(128);
        MatrixXd w(128, 2);
        for (int i = 0; i < 128; i++)
            for (int c = 0; c < 2; c++) w(i, c) = rng.normal();
        const AmbientField field(q.points, w, kern);
        MatrixXd pts(4096, 2);
        for (int i = 0; i < pts.rows(); i++)
            for (int c = 0; c < 2; c++) pts(i, c) = rng.uniform(-2.0, 2.0);
        MatrixXd es, ep;
        const double ts = time_ms([&] { es = field.eval_at_serial(pts); }, 5);
        const double tp = time_ms([&] { ep = field.eval_at(pts); }, 5);
        std::printf("field eval P=4096 N=128   serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   maxdiff %g\n",
                    ts, tp, ts / tp, (es - ep).cwiseAbs().maxCoeff());
    }

    {
        const Curve q = make_circle(64);
        MatrixXd u(64, 2);
        for (int i = 0; i < 64; i++) {
            const double t = 2.0 * M_PI * i / 64;
            u(i, 0) = 0.3 * std::cos(2.0 * t);
            u(i, 1) = 0.3 * std::sin(3.0 * t);
        }
        const AmbientField lifted = lift_field(kern, q, TangentField(u));
        const std::vector<AmbientField> fields{lifted};
        FlowResult fs, fp;
        const double ts = time_ms([&] { fs = integrate_flow_serial(fields, q.points, 128); }, 3);
        const double tp = time_ms([&] { fp = integrate_flow(fields, q.points, 128); }, 3);
        std::printf("flow steps=128 P=64       serial %8.2f ms   parallel %8.2f ms   speedup %.2fx   maxdiff %g\n",
                    ts, tp, ts / tp, (fs.final() - fp.final()).cwiseAbs().maxCoeff());
    }

    return 0;
}
