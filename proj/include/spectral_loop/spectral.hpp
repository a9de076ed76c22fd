#pragma once

#include "spectral_loop/linalg.hpp"
#include "spectral_loop/operator_model.hpp"

#include <vector>

namespace sloop {

struct EigenPair {
    cplx lambda;
    Vec v;  // unit eigenvector, largest component real positive
    Mat p;  // v v*
};

struct SpectralFrame {
    int point_index = 0;
    std::vector<EigenPair> pairs;  // |λ| descending, then arg ascending
    double threshold = 0.0;
    int dim = 0;
    Vec spectrum;               // every eigenvalue, retained or not
    double schur_offdiag = 0.0; // Frobenius norm of the strict upper Schur part
};

struct GapData {
    std::vector<double> delta;
    std::vector<double> r;
    std::vector<double> alpha;
    std::vector<double> eta;
    // true when the threshold circle (not a neighbour) sets δ_i
    std::vector<bool> threshold_limited;
};

// Default pairwise gap below which two retained eigenvalues count as equal.
double default_delta_min(const Mat& m);

// All eigenvalues of a normal matrix, with orthonormal eigenvectors as
// columns. offdiag receives the strict upper Schur mass (0 for exact normality).
void normal_eigen(const Mat& m, Vec& values, Mat& vectors, double* offdiag = nullptr);

// Lower bound on σ_min(z - M): min_j |z - λ_j| minus the Schur off-diagonal mass.
double resolvent_floor(const SpectralFrame& frame, cplx z);

SpectralFrame eigen_frame(const OperatorSample& s, double threshold, int point_index = 0);
SpectralFrame eigen_frame(const OperatorSample& s, double threshold, int point_index, double delta_min);

struct RieszResult {
    Mat q;
    double error_bound = 0.0;  // ‖Q_2N - Q_N‖ at the last doubling
    int nodes = 0;
};

// Plain N-node trapezoidal rule on |z - c| = r, no spectrum check.
Mat riesz_quadrature(const Mat& m, cplx center, double radius, int nodes);

// Checks the contour, then doubles from `nodes` until successive results
// agree within tol (default 1e-12 * max(1, ‖M‖)).
RieszResult riesz_projection(const OperatorSample& s, cplx center, double radius, int nodes = 128, double tol = -1.0,
                             int max_nodes = 8192);

GapData separation_radii(const SpectralFrame& frame, const Mat& m);

bool local_multiplicity_check(const OperatorPath& path, int g, cplx center, double beta);

Mat psd_sqrt(const Mat& h, double tol = -1.0);

} // namespace sloop
