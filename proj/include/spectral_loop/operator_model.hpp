#pragma once

#include "spectral_loop/expression.hpp"
#include "spectral_loop/linalg.hpp"

#include <vector>

namespace sloop {

struct OperatorSample {
    Mat matrix;
    double normality_residual = 0.0;
};

struct OperatorPath {
    std::vector<OperatorSample> samples;  // x_g = g / grid_size, g = 0..grid_size
    bool is_loop = false;
    double tail_bound = 0.0;
    int grid_size = 0;
    std::vector<double> gaps;  // ‖M_{g+1} - M_g‖

    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].matrix.rows()); }
    const Mat& at(int g) const { return samples[static_cast<size_t>(g)].matrix; }
    double x(int g) const { return static_cast<double>(g) / grid_size; }
    double max_norm() const;
};

struct Segment {
    enum class Kind { Rotation, Diagonal };
    Kind kind = Kind::Rotation;
    int i = 0, j = 1;
    Expr angle;              // rotation: [[c, s], [-s, c]] on (i, j)
    Expr scale_i, scale_j;   // diagonal: diag(scale_i, scale_j) on (i, j)
    double a = 0.0, b = 1.0; // support; identity above b, frozen at T(a) below a

    Mat block(double x, int dim) const;
};

struct GeneratorSpec {
    int dim = 0;
    std::vector<Expr> initial_diagonal;
    std::vector<Segment> segments;
    double tail_bound = 0.0;

    Mat evaluate(double x) const;
};

// Throws NotNormal when the residual exceeds tol.
OperatorSample validate_sample(const Mat& m, double tol);
// Uses the default τ_norm for m.
OperatorSample validate_sample(const Mat& m);

// Builds a path from raw samples, validating each one and recording gaps.
OperatorPath make_path(std::vector<Mat> mats, bool want_loop, double tail_bound);

struct Truncation {
    OperatorPath path;
    double increment = 0.0;
};
Truncation truncate_path(const OperatorPath& path, int m);

OperatorPath evaluate_generator(const GeneratorSpec& spec, int G);

struct TailIndex {
    int m = 0;
    bool insufficient = false;
};
TailIndex tail_index(const OperatorPath& path, double eps);

OperatorPath unroll_loop(const OperatorPath& loop);

} // namespace sloop
