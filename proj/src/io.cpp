#include "cmet/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cmet {

namespace {

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + context);
    }
}

Json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open file " + p.string());
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("failed to parse " + p.string() + ": " + e.what());
    }
    return j;
}

MatrixXd rows_from_json(const Json& arr, int d, const std::string& what) {
    if (!arr.is_array() || arr.empty()) throw ConfigError(what + " must be a nonempty array");
    MatrixXd m(arr.size(), d);
    for (std::size_t i = 0; i < arr.size(); i++) {
        const auto& row = arr[i];
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            throw ConfigError(what + " row " + std::to_string(i) + " must have d entries");
        for (int c = 0; c < d; c++) m(i, c) = row[c].get<double>();
    }
    return m;
}

Json rows_to_json(const MatrixXd& m) {
    Json arr = Json::array();
    for (int i = 0; i < m.rows(); i++) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); c++) row.push_back(m(i, c));
        arr.push_back(row);
    }
    return arr;
}

}  // namespace

Curve curve_from_json(const Json& j) {
    reject_unknown_keys(j, {"d", "points"}, "curve");
    if (!j.contains("d") || !j.contains("points")) throw ConfigError("curve needs 'd' and 'points'");
    const int d = j["d"].get<int>();
    Curve c(rows_from_json(j["points"], d, "curve points"));
    if (c.samples() < 8)
        throw ConfigError("curve sample count must be at least 8, got " + std::to_string(c.samples()));
    c.validate();
    return c;
}

Json curve_to_json(const Curve& c) {
    Json j;
    j["d"] = c.dim();
    j["points"] = rows_to_json(c.points);
    return j;
}

Curve read_curve_file(const std::filesystem::path& p) { return curve_from_json(read_json_file(p)); }

void write_curve_file(const std::filesystem::path& p, const Curve& c) {
    atomic_write_file(p, curve_to_json(c).dump(2) + "\n");
}

TangentField field_from_json(const Json& j) {
    reject_unknown_keys(j, {"d", "vectors"}, "tangent field");
    if (!j.contains("d") || !j.contains("vectors"))
        throw ConfigError("tangent field needs 'd' and 'vectors'");
    const int d = j["d"].get<int>();
    TangentField u(rows_from_json(j["vectors"], d, "field vectors"));
    u.validate();
    return u;
}

Json field_to_json(const TangentField& u) {
    Json j;
    j["d"] = u.dim();
    j["vectors"] = rows_to_json(u.vectors);
    return j;
}

TangentField read_field_file(const std::filesystem::path& p) {
    return field_from_json(read_json_file(p));
}

Json report_to_json(const DistanceReport& r) {
    Json j;
    j["value"] = r.value;
    j["path_length"] = r.path_length;
    j["mismatch_correction"] = r.mismatch_correction;
    j["endpoint_mismatch"] = r.endpoint_mismatch;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["grad_norm"] = r.grad_norm;
    j["energy_trace"] = r.energy_trace;
    j["warnings"] = r.warnings;
    Json metric;
    metric["d"] = r.metric.d;
    metric["n"] = r.metric.n;
    metric["a"] = r.metric.a;
    metric["s"] = r.metric.s;
    metric["kernel_scale"] = r.metric.kernel_scale;
    j["metric"] = metric;
    Json opt;
    opt["tol"] = r.options.tol;
    opt["max_iters"] = r.options.max_iters;
    opt["T"] = r.options.T;
    opt["continuation"] = r.options.continuation;
    opt["match_tol"] = r.options.match_tol;
    opt["penalty0"] = r.options.penalty0;
    opt["penalty_growth"] = r.options.penalty_growth;
    opt["penalty_stages"] = r.options.penalty_stages;
    j["optimizer"] = opt;
    if (r.curve_path) {
        Json curves = Json::array();
        for (const auto& c : r.curve_path->curves) curves.push_back(rows_to_json(c.points));
        j["path"] = Json{{"kind", "curves"}, {"d", r.curve_path->curves.front().dim()}, {"curves", curves}};
    } else if (r.momentum_path) {
        Json momenta = Json::array();
        for (const auto& p : r.momentum_path->momenta) momenta.push_back(rows_to_json(p));
        Json induced = Json::array();
        for (const auto& c : r.momentum_path->induced) induced.push_back(rows_to_json(c.points));
        j["path"] = Json{{"kind", "momenta"},
                         {"d", r.momentum_path->base.dim()},
                         {"momenta", momenta},
                         {"induced", induced}};
    }
    return j;
}

Json comparison_to_json(const ComparisonReport& r) {
    Json j;
    j["accepted_samples"] = r.accepted_samples;
    j["acceptance_fraction"] = r.acceptance_fraction;
    j["max_ratio_inner_outer"] = r.max_ratio_inner_outer;
    j["max_ratio_flat_outer"] = r.max_ratio_flat_outer;
    j["max_ratio_outer_flat"] = r.max_ratio_outer_flat;
    j["bilipschitz_lower"] = r.bilipschitz.first;
    j["bilipschitz_upper"] = r.bilipschitz.second;
    j["flagged_count"] = r.flagged_count;
    j["unconverged_count"] = r.unconverged_count;
    Json pairs = Json::array();
    for (const auto& p : r.pairs) {
        Json row;
        row["id1"] = p.id1;
        row["id2"] = p.id2;
        row["dist_inner"] = p.dist_inner;
        row["dist_outer"] = p.dist_outer;
        row["flat_sprime"] = p.flat_sprime;
        row["flat_hn"] = p.flat_hn;
        row["ratio_inner_outer"] = p.ratio_inner_outer;
        row["ratio_flat_outer"] = p.ratio_flat_outer;
        row["ratio_outer_flat"] = p.ratio_outer_flat;
        row["flagged"] = p.flagged;
        pairs.push_back(row);
    }
    j["pairs"] = pairs;
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string comparison_to_csv(const ComparisonReport& r) {
    std::ostringstream out;
    out << "id1,id2,dist_inner,dist_outer,flat_sprime,flat_hn,ratio_inner_outer,"
           "ratio_flat_outer,ratio_outer_flat,flagged\n";
    for (const auto& p : r.pairs) {
        out << p.id1 << ',' << p.id2 << ',' << format_double(p.dist_inner) << ','
            << format_double(p.dist_outer) << ',' << format_double(p.flat_sprime) << ','
            << format_double(p.flat_hn) << ',' << format_double(p.ratio_inner_outer) << ','
            << format_double(p.ratio_flat_outer) << ',' << format_double(p.ratio_outer_flat) << ','
            << (p.flagged ? 1 : 0) << '\n';
    }
    return out.str();
}

namespace {

MetricConfig metric_from_json(const Json& j) {
    reject_unknown_keys(j, {"d", "n", "a", "s", "kernel_scale"}, "metric");
    MetricConfig m;
    if (j.contains("d")) m.d = j["d"].get<int>();
    if (j.contains("n")) m.n = j["n"].get<int>();
    if (j.contains("a")) m.a = j["a"].get<std::vector<double>>();
    if (j.contains("s")) m.s = j["s"].get<double>();
    if (j.contains("kernel_scale")) m.kernel_scale = j["kernel_scale"].get<double>();
    m.validate();
    return m;
}

PathOptOptions optimizer_from_json(const Json& j) {
    reject_unknown_keys(j,
                        {"tol", "max_iters", "T", "continuation", "match_tol", "penalty0",
                         "penalty_growth", "penalty_stages"},
                        "optimizer");
    PathOptOptions o;
    if (j.contains("tol")) o.tol = j["tol"].get<double>();
    if (j.contains("max_iters")) o.max_iters = j["max_iters"].get<int>();
    if (j.contains("T")) o.T = j["T"].get<int>();
    if (j.contains("continuation")) o.continuation = j["continuation"].get<bool>();
    if (j.contains("match_tol")) o.match_tol = j["match_tol"].get<double>();
    if (j.contains("penalty0")) o.penalty0 = j["penalty0"].get<double>();
    if (j.contains("penalty_growth")) o.penalty_growth = j["penalty_growth"].get<double>();
    if (j.contains("penalty_stages")) o.penalty_stages = j["penalty_stages"].get<int>();
    if (o.tol <= 0.0 || o.max_iters < 1 || o.T < 1) throw ConfigError("invalid optimizer options");
    return o;
}

}  // namespace

RunConfig config_from_json(const Json& j) {
    reject_unknown_keys(
        j, {"schema_version", "metric", "optimizer", "experiment", "seed", "workers", "out"},
        "config");
    RunConfig cfg;
    if (!j.contains("schema_version")) throw ConfigError("config needs schema_version");
    cfg.schema_version = j["schema_version"].get<int>();
    if (cfg.schema_version != 1) throw ConfigError("unsupported schema_version");
    if (j.contains("metric")) cfg.metric = metric_from_json(j["metric"]);
    if (j.contains("optimizer")) cfg.optimizer = optimizer_from_json(j["optimizer"]);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
    if (j.contains("out")) cfg.out_path = j["out"].get<std::string>();

    if (j.contains("experiment")) {
        const Json& e = j["experiment"];
        reject_unknown_keys(e,
                            {"base_curve", "base_circle_samples", "ball_radius", "sample_count",
                             "family", "amplitude", "max_pairs", "refine_check"},
                            "experiment");
        cfg.has_experiment = true;
        ExperimentSpec& spec = cfg.experiment;
        spec.metric = cfg.metric;
        spec.seed = cfg.seed;
        spec.opts = cfg.optimizer;
        if (e.contains("base_curve")) {
            if (e["base_curve"].is_string())
                spec.base = read_curve_file(e["base_curve"].get<std::string>());
            else
                spec.base = curve_from_json(e["base_curve"]);
        } else {
            int n = e.contains("base_circle_samples") ? e["base_circle_samples"].get<int>() : 64;
            MatrixXd pts(n, 2);
            for (int i = 0; i < n; i++) {
                const double t = 2.0 * M_PI * i / n;
                pts(i, 0) = std::cos(t);
                pts(i, 1) = std::sin(t);
            }
            spec.base = Curve(std::move(pts));
        }
        if (e.contains("ball_radius")) spec.ball_radius = e["ball_radius"].get<double>();
        if (e.contains("sample_count")) spec.sample_count = e["sample_count"].get<int>();
        if (e.contains("family")) spec.family = family_from_string(e["family"].get<std::string>());
        if (e.contains("amplitude")) spec.amplitude = e["amplitude"].get<double>();
        if (e.contains("max_pairs")) spec.max_pairs = e["max_pairs"].get<int>();
        if (e.contains("refine_check")) spec.refine_check = e["refine_check"].get<bool>();
    }
    return cfg;
}

RunConfig read_config_file(const std::filesystem::path& p) {
    return config_from_json(read_json_file(p));
}

void atomic_write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write to " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, p);
}

}  // namespace cmet
