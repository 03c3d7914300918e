#pragma once

#include <cmath>

#include "cmet/core.hpp"
#include "cmet/rng.hpp"
#include "cmet/types.hpp"

namespace helpers {

// smooth random embedded curve: unit circle with seeded low-mode radial and
// tangential wobble, small enough to stay embedded
inline cmet::Curve random_immersed_curve(int N, cmet::Rng& rng, double wobble = 0.15) {
    cmet::MatrixXd pts(N, 2);
    double cr[4], sr[4], ct[4], st[4];
    for (int m = 0; m < 4; m++) {
        cr[m] = wobble * rng.normal() / (1.0 + m);
        sr[m] = wobble * rng.normal() / (1.0 + m);
        ct[m] = 0.3 * wobble * rng.normal() / (1.0 + m);
        st[m] = 0.3 * wobble * rng.normal() / (1.0 + m);
    }
    for (int i = 0; i < N; i++) {
        const double t = 2.0 * M_PI * i / N;
        double rad = 1.0, ang = t;
        for (int m = 0; m < 4; m++) {
            rad += cr[m] * std::cos((m + 2) * t) + sr[m] * std::sin((m + 2) * t);
            ang += ct[m] * std::cos((m + 1) * t) + st[m] * std::sin((m + 1) * t);
        }
        pts(i, 0) = rad * std::cos(ang);
        pts(i, 1) = rad * std::sin(ang);
    }
    cmet::Curve c(std::move(pts));
    c.validate();
    return c;
}

// band-limited random field (modes up to max_mode), the discrete stand-in
// for an H^{s'} tangent vector
inline cmet::TangentField random_smooth_field(int N, int d, cmet::Rng& rng, int max_mode = 6) {
    cmet::MatrixXd v = cmet::MatrixXd::Zero(N, d);
    for (int c = 0; c < d; c++)
        for (int m = 0; m <= max_mode; m++) {
            const double gc = rng.normal() / (1.0 + m * m);
            const double gs = rng.normal() / (1.0 + m * m);
            for (int i = 0; i < N; i++) {
                const double t = 2.0 * M_PI * i / N;
                v(i, c) += gc * std::cos(m * t) + gs * std::sin(m * t);
            }
        }
    return cmet::TangentField(std::move(v));
}

}  // namespace helpers
