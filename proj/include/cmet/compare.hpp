#pragma once

#include <cstdint>

#include "cmet/report.hpp"
#include "cmet/rng.hpp"
#include "cmet/types.hpp"

namespace cmet {

enum class PerturbationFamily { FourierRandom, Translation, Bending };

PerturbationFamily family_from_string(const std::string& s);
std::string family_to_string(PerturbationFamily f);

// Sampling plan for curves in an outer-metric ball around a base curve.
struct ExperimentSpec {
    Curve base;
    double ball_radius = 0.5;
    int sample_count = 5;
    PerturbationFamily family = PerturbationFamily::FourierRandom;
    MetricConfig metric;
    std::uint64_t seed = 42;
    double amplitude = 0.15;   // perturbation magnitude before ball rejection
    int max_pairs = 0;         // 0 = all unordered pairs
    bool refine_check = true;  // re-run pairs at half tolerance and flag drifters
    PathOptOptions opts;

    void validate() const;
};

struct SampledCurve {
    Curve curve;
    double dist_to_base = 0.0;  // certified upper bound
};

// Draw perturbed curves, keep those within outer distance ball_radius of the
// base (distances are optimizer upper bounds). Errors when fewer than 10% of
// draws are accepted. acceptance_fraction, when given, receives
// accepted / drawn.
std::vector<SampledCurve> sample_ball(const ExperimentSpec& spec,
                                      double* acceptance_fraction = nullptr);

struct PairRow {
    int id1 = 0, id2 = 0;
    double dist_inner = 0.0;
    double dist_outer = 0.0;
    double flat_sprime = 0.0;   // ||c1 - c2||_{H^{s'}}
    double flat_hn = 0.0;       // ||c1 - c2||_{H^n}
    double ratio_inner_outer = 0.0;
    double ratio_flat_outer = 0.0;   // flat_sprime / dist_outer
    double ratio_outer_flat = 0.0;   // dist_outer / flat_sprime
    bool flagged = false;       // unconverged, or ratio unstable under refinement
};

struct ComparisonReport {
    std::vector<PairRow> pairs;
    double max_ratio_inner_outer = 0.0;
    double max_ratio_flat_outer = 0.0;
    double max_ratio_outer_flat = 0.0;
    std::pair<double, double> bilipschitz{0.0, 0.0};  // extremal dist^O / flat ratios
    int flagged_count = 0;
    int unconverged_count = 0;
    int accepted_samples = 0;
    double acceptance_fraction = 0.0;
};

// Distance comparison over sampled pairs: inner and outer geodesic upper
// bounds, flat norm differences, ratio statistics. Pairs whose ratio moves
// more than 20% when the optimizer tolerance is halved are flagged and
// excluded from the maxima.
ComparisonReport run_comparison(const ExperimentSpec& spec);

// Extremal observed ratios dist^O / ||Delta||_{H^{s'}} over small-amplitude
// pairs of the family (linear regime).
std::pair<double, double> bilipschitz_probe(const ExperimentSpec& spec);

// Perturbation direction of the family for a given draw index (used by the
// probes to compare against pointwise metric predictions).
TangentField family_direction(const ExperimentSpec& spec, Rng& rng);

}  // namespace cmet
