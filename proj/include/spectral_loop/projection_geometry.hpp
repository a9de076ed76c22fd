#pragma once

#include "spectral_loop/linalg.hpp"

#include <vector>

namespace sloop {

// Two families of n pairwise orthogonal lines plus a pairing p[i] <-> q[sigma[i]].
// Lines are stored by unit-vector representatives.
struct ProjectionTriple {
    std::vector<Vec> p;
    std::vector<Vec> q;
    std::vector<int> sigma;
    std::vector<cplx> labels;  // optional

    int n() const { return static_cast<int>(p.size()); }
    Mat pmat(int i) const { return rank_one(p[static_cast<size_t>(i)]); }
    Mat qmat(int i) const { return rank_one(q[static_cast<size_t>(i)]); }
    // the partner line of p[i]
    const Vec& partner(int i) const { return q[static_cast<size_t>(sigma[static_cast<size_t>(i)])]; }
};

// Throws PreconditionViolated if a family is not orthonormal or sigma is not a permutation.
void check_triple(const ProjectionTriple& t, double tol = -1.0);

// ‖vv* - ww*‖ for unit v, w.
double rank1_distance(const Vec& v, const Vec& w);

struct BottleneckMatch {
    std::vector<int> tau;  // p[i] of a pairs with p[tau[i]] of b
    double value = 0.0;
    bool certified_unique = false;
};

BottleneckMatch bottleneck_distance(const ProjectionTriple& a, const ProjectionTriple& b);

// Edge costs c(i, j) used by the bottleneck matcher.
std::vector<std::vector<double>> bottleneck_costs(const ProjectionTriple& a, const ProjectionTriple& b);

double match_stability(const ProjectionTriple& ref, const ProjectionTriple& a, const ProjectionTriple& b);

// (I + p_new - p) v with p = u u*, p_new = w w*.
Vec transport_projection(const Vec& u, const Vec& w, const Vec& v);

struct GaugePhases {
    std::vector<cplx> z;
};

// Largest ‖U p_j U* - q_{sigma(j)}‖ over the triple.
double intertwining_defect(const Mat& u, const ProjectionTriple& t);

// Phases of U in the chart centred at ref, indexed by ref's p-list.
GaugePhases extract_phases(const ProjectionTriple& ref, const ProjectionTriple& near, const Mat& u);

// Σ z_i q_{sigma(i)} U p_i, phases indexed by the triple's p-list.
Mat apply_gauge(const Mat& u, const GaugePhases& phases, const ProjectionTriple& triple);

} // namespace sloop
