#pragma once

#include "spectral_loop/approximation.hpp"
#include "spectral_loop/continuation.hpp"
#include "spectral_loop/projection_geometry.hpp"

#include <vector>

namespace sloop {

struct TriplePath {
    std::vector<ProjectionTriple> triples;  // sigma = identity in label order
    std::vector<double> distances;          // d(t_g, t_{g+1})
};

// Reorders other's tracks so that track t carries the same eigenvalues as
// ref's track t at every grid point. Throws SpectraMismatch otherwise.
EigenBraid align_braid(const EigenBraid& ref, const EigenBraid& other, double tol);

// labels[g][k]: eigenvalue carried by line k at grid index g.
TriplePath build_phi(const OperatorPath& an, const OperatorPath& bn, const std::vector<std::vector<cplx>>& labels,
                     double threshold);

// Labels taken from a trace of an; needs condition (1) on an.
TriplePath build_phi(const OperatorPath& an, const OperatorPath& bn, double threshold);

struct LoopLift {
    std::vector<Mat> w;
    std::vector<cplx> closure_phases;  // per label before redistribution
    double max_intertwining = 0.0;     // max ‖W p_k W* - q_k‖
    double max_isometry = 0.0;         // max of ‖W*W - P‖, ‖WW* - Q‖
    double closure = 0.0;              // ‖W(1) - W(0)‖ after redistribution
};

LoopLift lift_loop(const TriplePath& phi);

struct StrongLift {
    std::vector<Mat> u;
    double max_residual = 0.0;  // ‖U A U* - B‖ on the retained block
};

StrongLift strong_lift_path(const OperatorPath& a, const OperatorPath& b, double threshold);

struct TruncationChoice {
    int m = 0;
    std::vector<double> measured;  // max over the grid of each of the six left sides
    std::vector<double> targets;
    double slack = 0.0;            // min over inequalities of target - measured
};

TruncationChoice choose_truncation(const std::vector<Mat>& w, const OperatorPath& an, const OperatorPath& bn, int n,
                                   double norm_sum, double tail_a = 0.0, double tail_b = 0.0);

Mat block_dilation(const Mat& u_prime);

struct IntertwinerPath {
    std::vector<Mat> samples;
    int block_rank = 0;
    double bound_achieved = 0.0;
    double target = 0.0;
    double max_unitarity = 0.0;
    double closure = 0.0;
    double outside_block = 0.0;  // max |U - I| entry outside the top-left block
};

struct EquivalenceReport {
    int n = 0;
    int s_n = 0;
    int m_n = 0;
    std::vector<double> residuals;
    double max_residual = 0.0;
    bool success = false;
};

struct Intertwined {
    IntertwinerPath path;
    EquivalenceReport report;
};

Intertwined assemble_intertwiner(const std::vector<Mat>& w, int m, const OperatorPath& a, const OperatorPath& b, int n);

struct PipelineResult {
    Intertwined result;
    ApproximationPlan plan;
    OperatorPath an, bn;
    AnReport an_report, bn_report;
    TriplePath phi;
    LoopLift lift;
    TruncationChoice truncation;
    double max_chart_distance = 0.0;
    std::vector<int> monodromy;
};

// braid -> plan -> Ā_n, B̄_n -> Φ -> W -> m(n) -> dilation -> certificate.
PipelineResult run_equivalence(const OperatorPath& a, const OperatorPath& b, int n, double threshold);

} // namespace sloop
