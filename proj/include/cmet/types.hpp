#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "cmet/errors.hpp"

namespace cmet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Closed curve sampled uniformly in parameter: row i is the point at
// theta_i = 2*pi*i/N. Closure is implicit (index N wraps to 0).
struct Curve {
    MatrixXd points;  // N x d

    Curve() = default;
    explicit Curve(MatrixXd pts) : points(std::move(pts)) {}

    int samples() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    // N >= 8, all coordinates finite, no zero-length edge.
    void validate() const;
};

// Velocity field attached to a curve, one vector per sample.
struct TangentField {
    MatrixXd vectors;  // N x d

    TangentField() = default;
    explicit TangentField(MatrixXd v) : vectors(std::move(v)) {}

    int samples() const { return static_cast<int>(vectors.rows()); }
    int dim() const { return static_cast<int>(vectors.cols()); }

    void validate() const;
    void validate_against(const Curve& c) const;
};

// Parameters shared by the two metric families.
//
//   n, a   inner metric: order and coefficients a_0..a_n
//   s      order of the ambient Sobolev operator (outer metric)
//   scale  kernel length scale; the kernel argument is |x| / scale
//
// s_prime = s - (d-1)/2 is the order the outer metric induces on curves.
struct MetricConfig {
    int d = 2;
    int n = 2;
    std::vector<double> a = {1.0, 0.0, 1.0};
    double s = 3.0;
    double kernel_scale = 1.0;

    double s_prime() const { return s - (d - 1) / 2.0; }

    // Basic invariants; with for_comparison also the hypothesis
    // s >= n + (d-1)/2 the comparison experiments need.
    void validate(bool for_comparison = false) const;
};

// Row-major flattening between N x d sample matrices and length N*d vectors
// (entry i*d + alpha is coordinate alpha of sample i).
VectorXd flatten(const MatrixXd& m);
MatrixXd unflatten(const VectorXd& v, int d);

// FNV-1a over the raw point bytes; identifies the generating curve of a Gram.
std::uint64_t hash_points(const MatrixXd& pts);

}  // namespace cmet
