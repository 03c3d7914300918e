#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cmet/compare.hpp"
#include "cmet/report.hpp"
#include "cmet/types.hpp"

namespace cmet {

using Json = nlohmann::ordered_json;

// Curve file format: {"d": int, "points": [[x1,...,xd], ...]}; closure is
// implicit. Readers reject N < 8 and non-finite coordinates.
Curve curve_from_json(const Json& j);
Json curve_to_json(const Curve& c);
Curve read_curve_file(const std::filesystem::path& p);
void write_curve_file(const std::filesystem::path& p, const Curve& c);

// Tangent field file format: {"d": int, "vectors": [[...], ...]}.
TangentField field_from_json(const Json& j);
Json field_to_json(const TangentField& u);
TangentField read_field_file(const std::filesystem::path& p);

Json report_to_json(const DistanceReport& r);
Json comparison_to_json(const ComparisonReport& r);
std::string comparison_to_csv(const ComparisonReport& r);

// Full run configuration; unknown keys anywhere are rejected.
struct RunConfig {
    int schema_version = 1;
    MetricConfig metric;
    PathOptOptions optimizer;
    ExperimentSpec experiment;   // base curve defaults to a unit circle
    bool has_experiment = false;
    std::uint64_t seed = 42;
    int workers = 0;             // 0 = library default
    std::string out_path;
};

RunConfig config_from_json(const Json& j);
RunConfig read_config_file(const std::filesystem::path& p);

// Serialize doubles exactly (shortest round-trip form) for bit-stable report
// files; temp-file + rename so readers never observe partial output.
void atomic_write_file(const std::filesystem::path& p, const std::string& content);

std::string format_double(double v);  // %.17g canonical form used in CSVs

}  // namespace cmet
