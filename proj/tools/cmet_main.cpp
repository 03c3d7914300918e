// Command-line driver: geodesic distances between curve files, the
// inner/outer comparison experiment, flow integration and the 1D
// discontinuity demo. Exit codes: 0 converged / clean, 2 valid but
// unconverged (or flagged pairs), 1 error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cmet/compare.hpp"
#include "cmet/core.hpp"
#include "cmet/flows.hpp"
#include "cmet/inner.hpp"
#include "cmet/io.hpp"
#include "cmet/kernel.hpp"
#include "cmet/outer.hpp"

namespace {

using namespace cmet;

struct GlobalArgs {
    std::string config_path;
    std::string out_path;
    long long seed = -1;
    int workers = -1;
};

RunConfig load_config(const GlobalArgs& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = read_config_file(g.config_path);
    if (g.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(g.seed);
        cfg.experiment.seed = cfg.seed;
    }
    if (g.workers >= 0) cfg.workers = g.workers;
    if (!g.out_path.empty()) cfg.out_path = g.out_path;
#ifdef _OPENMP
    if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
    return cfg;
}

std::string require_out(const RunConfig& cfg) {
    if (cfg.out_path.empty()) throw ConfigError("no output path: pass --out or set 'out' in the config");
    return cfg.out_path;
}

int report_exit_code(const DistanceReport& rep) { return rep.converged ? 0 : 2; }

int run_distance(const GlobalArgs& g, const std::string& a_path, const std::string& b_path, bool inner) {
    RunConfig cfg = load_config(g);
    const Curve a = read_curve_file(a_path);
    const Curve b = read_curve_file(b_path);
    if (a.samples() != b.samples())
        throw ConfigError("curve sample count mismatch: " + std::to_string(a.samples()) + " vs " +
                          std::to_string(b.samples()));
    if (a.dim() != b.dim() || a.dim() != cfg.metric.d)
        throw ConfigError("curve dimension mismatch against config");

    DistanceReport rep;
    if (inner) {
        rep = inner_distance(InnerMetric(cfg.metric), a, b, cfg.optimizer);
    } else {
        const SobolevKernel kern(cfg.metric.s, cfg.metric.d, cfg.metric.kernel_scale);
        rep = outer_distance(kern, a, b, cfg.optimizer);
        rep.metric = cfg.metric;
    }
    atomic_write_file(require_out(cfg), report_to_json(rep).dump(2) + "\n");
    std::cout << (inner ? "inner" : "outer") << " distance value " << format_double(rep.value)
              << (rep.converged ? " (converged)" : " (not converged)") << "\n";
    return report_exit_code(rep);
}

int run_compare(const GlobalArgs& g) {
    RunConfig cfg = load_config(g);
    if (!cfg.has_experiment) throw ConfigError("compare needs an 'experiment' block in the config");
    if (cfg.experiment.sample_count < 1) throw ConfigError("empty sample count");
    if (cfg.experiment.amplitude <= 0.0) throw ConfigError("no distinct pairs: amplitude is zero");

    const ComparisonReport rep = run_comparison(cfg.experiment);
    std::pair<double, double> probe{0.0, 0.0};
    {
        ExperimentSpec probe_spec = cfg.experiment;
        probe_spec.amplitude = std::min(probe_spec.amplitude, 0.05);
        probe = bilipschitz_probe(probe_spec);
    }
    Json j = comparison_to_json(rep);
    j["bilipschitz_probe_lower"] = probe.first;
    j["bilipschitz_probe_upper"] = probe.second;

    const std::string out = require_out(cfg);
    atomic_write_file(out, j.dump(2) + "\n");
    std::filesystem::path csv_path(out);
    csv_path.replace_extension(".csv");
    atomic_write_file(csv_path, comparison_to_csv(rep));
    std::cout << "compared " << rep.pairs.size() << " pairs, max dist_I/dist_O "
              << format_double(rep.max_ratio_inner_outer) << ", flagged " << rep.flagged_count << "\n";
    return rep.flagged_count == 0 ? 0 : 2;
}

int run_flow(const GlobalArgs& g, const std::string& curve_path, const std::string& translate,
             const std::string& lift_path, int steps) {
    RunConfig cfg = load_config(g);
    const Curve q = read_curve_file(curve_path);
    const SobolevKernel kern(cfg.metric.s, q.dim(), cfg.metric.kernel_scale);

    std::vector<AmbientField> fields;
    if (!translate.empty()) {
        std::stringstream ss(translate);
        std::vector<double> comps;
        std::string item;
        while (std::getline(ss, item, ',')) comps.push_back(std::stod(item));
        if (static_cast<int>(comps.size()) != q.dim())
            throw ConfigError("--translate needs d comma-separated components");
        // constant field over the working region: one kernel bundle whose
        // scale dwarfs the geometry
        const SobolevKernel wide(cfg.metric.s, q.dim(), 1e8);
        MatrixXd center = MatrixXd::Zero(1, q.dim());
        MatrixXd weight(1, q.dim());
        for (int c = 0; c < q.dim(); c++) weight(0, c) = comps[c] / wide.k0();
        fields.emplace_back(center, weight, wide);
    } else if (!lift_path.empty()) {
        const TangentField u = read_field_file(lift_path);
        fields.push_back(lift_field(kern, q, u));
    } else {
        throw ConfigError("flow needs --translate or --lift-field");
    }

    const FlowResult fr = integrate_flow(fields, q.points, steps);
    const Curve moved = act_on_curve(fr, q);

    // serialize at most 64 frames
    Json j;
    j["steps"] = fr.steps;
    const int stride = std::max(1, (fr.steps + 63) / 64);
    Json frames = Json::array();
    Json times = Json::array();
    for (int s = 0; s <= fr.steps; s += stride) {
        Json frame = Json::array();
        const MatrixXd& m = fr.frames[s];
        for (int i = 0; i < m.rows(); i++) {
            Json row = Json::array();
            for (int c = 0; c < m.cols(); c++) row.push_back(m(i, c));
            frame.push_back(row);
        }
        frames.push_back(frame);
        times.push_back(static_cast<double>(s) / fr.steps);
    }
    j["frame_times"] = times;
    j["frames"] = frames;
    j["final_curve"] = curve_to_json(moved);
    atomic_write_file(require_out(cfg), j.dump(2) + "\n");
    std::cout << "flowed " << q.samples() << " points over " << steps << " steps\n";
    return 0;
}

int run_demo1d(const GlobalArgs& g, const std::vector<double>& sweep) {
    RunConfig cfg = load_config(g);
    if (sweep.empty()) throw ConfigError("empty sweep: pass at least one x value");
    std::ostringstream csv;
    csv << "x,value,x_snapped\n";
    for (double x : sweep) {
        Demo1DConfig dcfg;
        dcfg.x = x;
        const Demo1DResult res = demo_discontinuity_1d(dcfg);
        csv << format_double(x) << ',' << format_double(res.value) << ','
            << format_double(res.x_snapped) << '\n';
    }
    atomic_write_file(require_out(cfg), csv.str());
    std::cout << "demo1d sweep of " << sweep.size() << " points written\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Riemannian metrics on spaces of closed curves"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalArgs g;
    app.add_option("--config", g.config_path, "JSON run configuration");
    app.add_option("--out", g.out_path, "output path (overrides config)");
    app.add_option("--seed", g.seed, "seed (overrides config)");
    app.add_option("--workers", g.workers, "worker thread bound (overrides config)");

    std::string curve_a, curve_b;
    auto* inner_cmd = app.add_subcommand("inner-dist", "inner geodesic distance between two curve files");
    inner_cmd->add_option("curveA", curve_a)->required();
    inner_cmd->add_option("curveB", curve_b)->required();
    auto* outer_cmd = app.add_subcommand("outer-dist", "outer geodesic distance between two curve files");
    outer_cmd->add_option("curveA", curve_a)->required();
    outer_cmd->add_option("curveB", curve_b)->required();

    auto* compare_cmd = app.add_subcommand("compare", "distance comparison experiment");

    std::string flow_curve, flow_translate, flow_lift;
    int flow_steps = 64;
    auto* flow_cmd = app.add_subcommand("flow", "integrate a kernel field flow acting on a curve");
    flow_cmd->add_option("--curve", flow_curve)->required();
    flow_cmd->add_option("--translate", flow_translate, "constant displacement, comma separated");
    flow_cmd->add_option("--lift-field", flow_lift, "tangent field JSON to lift and flow");
    flow_cmd->add_option("--steps", flow_steps, "RK4 step count");

    std::vector<double> sweep;
    auto* demo_cmd = app.add_subcommand("demo1d", "1D induced-metric discontinuity sweep");
    demo_cmd->add_option("--sweep", sweep, "x values to evaluate")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (inner_cmd->parsed()) return run_distance(g, curve_a, curve_b, true);
        if (outer_cmd->parsed()) return run_distance(g, curve_a, curve_b, false);
        if (compare_cmd->parsed()) return run_compare(g);
        if (flow_cmd->parsed()) return run_flow(g, flow_curve, flow_translate, flow_lift, flow_steps);
        if (demo_cmd->parsed()) return run_demo1d(g, sweep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
