#include "cmet/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmet/core.hpp"
#include "cmet/inner.hpp"
#include "cmet/kernel.hpp"
#include "cmet/outer.hpp"

namespace cmet {

PerturbationFamily family_from_string(const std::string& s) {
    if (s == "fourier-random") return PerturbationFamily::FourierRandom;
    if (s == "translation") return PerturbationFamily::Translation;
    if (s == "bending") return PerturbationFamily::Bending;
    throw ConfigError("unknown perturbation family '" + s + "'");
}

std::string family_to_string(PerturbationFamily f) {
    switch (f) {
        case PerturbationFamily::FourierRandom: return "fourier-random";
        case PerturbationFamily::Translation: return "translation";
        case PerturbationFamily::Bending: return "bending";
    }
    return "?";
}

void ExperimentSpec::validate() const {
    base.validate();
    metric.validate(true);
    if (sample_count < 5) throw ConfigError("sample count must be at least 5");
    if (!(ball_radius > 0.0)) throw ConfigError("ball radius must be positive");
    if (amplitude < 0.0) throw ConfigError("perturbation amplitude must be nonnegative");
}

TangentField family_direction(const ExperimentSpec& spec, Rng& rng) {
    const int N = spec.base.samples(), d = spec.base.dim();
    MatrixXd dir = MatrixXd::Zero(N, d);
    switch (spec.family) {
        case PerturbationFamily::Translation: {
            Eigen::RowVectorXd w(d);
            for (int c = 0; c < d; c++) w(c) = rng.normal();
            w /= w.norm();
            dir.rowwise() = w;
            break;
        }
        case PerturbationFamily::FourierRandom: {
            for (int c = 0; c < d; c++)
                for (int m = 1; m <= 6; m++) {
                    const double gc = rng.normal() / (1.0 + m * m);
                    const double gs = rng.normal() / (1.0 + m * m);
                    for (int i = 0; i < N; i++) {
                        const double t = 2.0 * M_PI * i / N;
                        dir(i, c) += gc * std::cos(m * t) + gs * std::sin(m * t);
                    }
                }
            break;
        }
        case PerturbationFamily::Bending: {
            if (d != 2) throw ConfigError("bending family needs d = 2");
            const double phase = rng.uniform(0.0, 2.0 * M_PI);
            const VectorXd w = arc_element(spec.base);
            const double dtheta = 2.0 * M_PI / N;
            for (int i = 0; i < N; i++) {
                const int ip = (i + 1) % N, im = (i - 1 + N) % N;
                const Eigen::RowVector2d tang =
                    (spec.base.points.row(ip) - spec.base.points.row(im)) / (2.0 * dtheta * w(i));
                const Eigen::RowVector2d normal(-tang(1), tang(0));
                const double t = 2.0 * M_PI * i / N;
                dir.row(i) = std::sin(2.0 * t + phase) * normal;
            }
            break;
        }
    }
    const double rms = std::sqrt(dir.rowwise().squaredNorm().mean());
    if (rms > 0.0) dir /= rms;
    return TangentField(std::move(dir));
}

std::vector<SampledCurve> sample_ball(const ExperimentSpec& spec, double* acceptance_fraction) {
    spec.validate();
    const SobolevKernel kern(spec.metric.s, spec.metric.d, spec.metric.kernel_scale);
    Rng rng(spec.seed);

    std::vector<SampledCurve> accepted;
    int draws = 0;
    const int rounds = 10;
    for (int round = 0; round < rounds && static_cast<int>(accepted.size()) < spec.sample_count; round++) {
        // draw a whole round sequentially so the random stream is independent
        // of worker count, then measure distances in parallel
        std::vector<Curve> batch;
        const int want = spec.sample_count - static_cast<int>(accepted.size());
        for (int i = 0; i < want; i++) {
            const TangentField u = family_direction(spec, rng);
            Curve cand(spec.base.points + spec.amplitude * u.vectors);
            draws++;
            try {
                cand.validate();
            } catch (const std::exception&) {
                continue;  // rejected draw, not even immersed
            }
            batch.push_back(std::move(cand));
        }
        std::vector<double> dist(batch.size(), -1.0);
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < static_cast<int>(batch.size()); i++) {
            try {
                dist[i] = outer_distance(kern, spec.base, batch[i], spec.opts).value;
            } catch (const std::exception&) {
                dist[i] = -1.0;
            }
        }
        for (std::size_t i = 0; i < batch.size(); i++)
            if (dist[i] >= 0.0 && dist[i] <= spec.ball_radius)
                accepted.push_back({std::move(batch[i]), dist[i]});
    }
    if (acceptance_fraction)
        *acceptance_fraction = draws > 0 ? static_cast<double>(accepted.size()) / draws : 0.0;
    if (draws > 0 && accepted.size() < std::max<std::size_t>(1, draws / 10))
        throw ConfigError("ball acceptance rate below 10%; reduce the perturbation amplitude");
    if (static_cast<int>(accepted.size()) < spec.sample_count)
        throw ConfigError("could not fill the sample ball; reduce the perturbation amplitude");
    accepted.resize(spec.sample_count);
    return accepted;
}

namespace {

struct PairTask {
    int i, j;
};

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ComparisonReport run_comparison(const ExperimentSpec& spec) {
    spec.validate();
    const SobolevKernel kern(spec.metric.s, spec.metric.d, spec.metric.kernel_scale);
    const InnerMetric inner(spec.metric);
    const double sprime = spec.metric.s_prime();

    ComparisonReport rep;
    auto samples = sample_ball(spec, &rep.acceptance_fraction);
    rep.accepted_samples = static_cast<int>(samples.size());

    std::vector<PairTask> tasks;
    for (int i = 0; i < static_cast<int>(samples.size()); i++)
        for (int j = i + 1; j < static_cast<int>(samples.size()); j++) tasks.push_back({i, j});
    if (spec.max_pairs > 0 && static_cast<int>(tasks.size()) > spec.max_pairs)
        tasks.resize(spec.max_pairs);
    if (tasks.empty()) throw ConfigError("no distinct pairs to compare");

    rep.pairs.assign(tasks.size(), PairRow{});
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < static_cast<int>(tasks.size()); t++) {
        const Curve& a = samples[tasks[t].i].curve;
        const Curve& b = samples[tasks[t].j].curve;
        PairRow row;
        row.id1 = tasks[t].i;
        row.id2 = tasks[t].j;
        const TangentField diff(b.points - a.points);
        row.flat_sprime = sobolev_norm_circle(diff, sprime);
        row.flat_hn = sobolev_norm_circle(diff, spec.metric.n);
        if (row.flat_sprime == 0.0) {
            row.flagged = true;  // identical pair carries no ratio information
            rep.pairs[t] = row;
            continue;
        }
        try {
            const DistanceReport di = inner_distance(inner, a, b, spec.opts);
            const DistanceReport dov = outer_distance(kern, a, b, spec.opts);
            row.dist_inner = di.value;
            row.dist_outer = dov.value;
            bool ok = di.converged && dov.converged;
            if (ok && spec.refine_check) {
                // refinement stability: halve the tolerance, flag ratios
                // moving by more than 20%
                PathOptOptions tight = spec.opts;
                tight.tol *= 0.5;
                const double di2 = inner_distance(inner, a, b, tight).value;
                const double do2 = outer_distance(kern, a, b, tight).value;
                const double r1 = safe_ratio(row.dist_inner, row.dist_outer);
                const double r2 = safe_ratio(di2, do2);
                if (r1 > 0.0 && std::abs(r2 - r1) > 0.2 * r1) ok = false;
            }
            row.ratio_inner_outer = safe_ratio(row.dist_inner, row.dist_outer);
            row.ratio_flat_outer = safe_ratio(row.flat_sprime, row.dist_outer);
            row.ratio_outer_flat = safe_ratio(row.dist_outer, row.flat_sprime);
            row.flagged = !ok;
            if (!di.converged || !dov.converged) {
#pragma omp atomic
                rep.unconverged_count++;
            }
        } catch (const std::exception&) {
            row.flagged = true;
        }
        rep.pairs[t] = row;
    }

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : rep.pairs) {
        if (row.flagged) {
            rep.flagged_count++;
            continue;
        }
        rep.max_ratio_inner_outer = std::max(rep.max_ratio_inner_outer, row.ratio_inner_outer);
        rep.max_ratio_flat_outer = std::max(rep.max_ratio_flat_outer, row.ratio_flat_outer);
        rep.max_ratio_outer_flat = std::max(rep.max_ratio_outer_flat, row.ratio_outer_flat);
        lo = std::min(lo, row.ratio_outer_flat);
        hi = std::max(hi, row.ratio_outer_flat);
    }
    if (std::isfinite(lo)) rep.bilipschitz = {lo, hi};
    return rep;
}

std::pair<double, double> bilipschitz_probe(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.amplitude <= 0.0) throw ConfigError("no distinct pairs: probe amplitude is zero");
    const SobolevKernel kern(spec.metric.s, spec.metric.d, spec.metric.kernel_scale);
    const double sprime = spec.metric.s_prime();
    Rng rng(spec.seed);

    std::vector<TangentField> dirs;
    for (int i = 0; i < spec.sample_count; i++) dirs.push_back(family_direction(spec, rng));

    std::vector<double> ratio(dirs.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(dirs.size()); i++) {
        const Curve cand(spec.base.points + spec.amplitude * dirs[i].vectors);
        const double flat = spec.amplitude * sobolev_norm_circle(dirs[i], sprime);
        const double dist = outer_distance(kern, spec.base, cand, spec.opts).value;
        ratio[i] = flat > 0.0 ? dist / flat : 0.0;
    }
    const auto [mn, mx] = std::minmax_element(ratio.begin(), ratio.end());
    return {*mn, *mx};
}

}  // namespace cmet
