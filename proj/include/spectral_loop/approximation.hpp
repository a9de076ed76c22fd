#pragma once

#include "spectral_loop/continuation.hpp"
#include "spectral_loop/operator_model.hpp"

#include <vector>

namespace sloop {

// Indices below are track ids of a braid that satisfies condition (1).
struct ApproximationPlan {
    int n = 0;
    std::vector<int> S;       // max modulus ≥ 1/n
    std::vector<int> S0, S1;  // modulus ≥ 1/n at x = 0 and x = 1
    int s_n = 0;
    int alpha_index = 0;
    double alpha = 0.0;
    std::vector<int> sigma;        // monodromy, all tracks
    std::vector<int> sigma_prime;  // on S, -1 elsewhere
    std::vector<int> H, L;         // S and S ∪ σ(S), ascending
    // pairs (σ'(i), σ(i)) for σ'(i) ∈ S \ σ(S); V1(1) sends the first to the second
    std::vector<std::pair<int, int>> moved;
    // per track, sampled λ' (empty for tracks outside S)
    std::vector<std::vector<cplx>> lambda_prime;
    double perturbation = 0.0;  // largest radial shift applied to separate λ' values
    int grid_size = 0;

    bool in_S(int t) const;
};

ApproximationPlan select_plan(EigenBraid& braid, int n);

ApproximationPlan build_lambda_prime(const EigenBraid& braid, ApproximationPlan plan);

struct PartialIsometryPath {
    std::vector<Mat> samples;  // in track coordinates, size = number of tracks
    int rank = 0;
};

PartialIsometryPath build_isometry_path(const ApproximationPlan& plan, int G, int dim);

struct AnReport {
    double max_deviation = 0.0;  // max_g ‖Ā_n - Ā‖
    double bound = 0.0;          // 4/n + tail_bound
    double closure = 0.0;        // ‖Ā_n(0) - Ā_n(1)‖
    double spectrum_error = 0.0; // retained spectrum vs λ'
};

struct Approximant {
    OperatorPath path;
    AnReport report;
};

// Ā_n = U V Λ' V* U* with U the diagonalizer built from framed.
Approximant assemble_An(const OperatorPath& path, const FramedBraid& framed, const ApproximationPlan& plan);

// Same with an explicit diagonalizer whose column c carries track c.
Approximant assemble_An(const OperatorPath& path, const std::vector<Mat>& u, const ApproximationPlan& plan,
                        const PartialIsometryPath& v1);

} // namespace sloop
