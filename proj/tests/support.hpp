#pragma once

#include "spectral_loop/linalg.hpp"
#include "spectral_loop/operator_model.hpp"
#include "spectral_loop/projection_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testing {

using sloop::cplx;
using sloop::Mat;
using sloop::Vec;

inline Mat random_gaussian(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> N;
    Mat z(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) z(i, j) = cplx(N(rng), N(rng));
    return z;
}

inline Mat random_unitary(std::mt19937_64& rng, int dim) {
    Eigen::HouseholderQR<Mat> qr(random_gaussian(rng, dim, dim));
    return qr.householderQ();
}

// Normal matrix with the given spectrum in a random basis.
inline Mat normal_with_spectrum(std::mt19937_64& rng, const std::vector<cplx>& spec) {
    const int n = static_cast<int>(spec.size());
    Mat u = random_unitary(rng, n);
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = spec[static_cast<size_t>(i)];
    return u * d.asDiagonal() * u.adjoint();
}

// Spectrum of n points in the disc of radius 2 with pairwise gap ≥ sep.
inline std::vector<cplx> separated_spectrum(std::mt19937_64& rng, int n, double sep) {
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < n) {
        cplx z(U(rng), U(rng));
        if (std::abs(z) > 2.0) continue;
        bool ok = std::all_of(out.begin(), out.end(), [&](cplx w) { return std::abs(w - z) >= sep; });
        if (ok) out.push_back(z);
    }
    return out;
}

inline std::vector<int> random_perm(std::mt19937_64& rng, int n) {
    std::vector<int> p(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

// n orthonormal lines in C^dim for each family, random pairing.
inline sloop::ProjectionTriple random_triple(std::mt19937_64& rng, int n, int dim) {
    sloop::ProjectionTriple t;
    Mat a = random_unitary(rng, dim), b = random_unitary(rng, dim);
    for (int i = 0; i < n; ++i) {
        t.p.push_back(a.col(i));
        t.q.push_back(b.col(i));
    }
    t.sigma = random_perm(rng, n);
    return t;
}

// Apply a small unitary drift to both families of t.
inline sloop::ProjectionTriple perturb_triple(std::mt19937_64& rng, const sloop::ProjectionTriple& t, double eps) {
    const auto dim = t.p.empty() ? 0 : t.p[0].size();
    Mat h = random_gaussian(rng, static_cast<int>(dim), static_cast<int>(dim));
    h = 0.5 * (h + h.adjoint().eval());
    h /= sloop::op_norm(h);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Mat ua = es.eigenvectors() * (cplx(0, eps) * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
             es.eigenvectors().adjoint();
    sloop::ProjectionTriple out = t;
    for (auto& v : out.p) v = ua * v;
    for (auto& v : out.q) v = ua.adjoint() * v;
    return out;
}

// x ↦ R(x) diag(d_k(x)) R(x)* with R(x) = exp(i x H) for a fixed Hermitian H
// and eigenvalues moving on separated circles.
inline sloop::OperatorPath rotating_diagonal_path(std::mt19937_64& rng, int dim, int G) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Mat h = random_gaussian(rng, dim, dim);
    h = 0.5 * (h + h.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    std::vector<cplx> base;
    for (int i = 0; i < dim; ++i) base.push_back(std::polar(1.0 + i, 2.0 * std::numbers::pi * U(rng)));
    std::vector<double> speed;
    for (int i = 0; i < dim; ++i) speed.push_back(U(rng) - 0.5);
    std::vector<Mat> mats;
    for (int g = 0; g <= G; ++g) {
        double x = static_cast<double>(g) / G;
        Mat r = es.eigenvectors() * (cplx(0, x) * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
                es.eigenvectors().adjoint();
        Vec d(dim);
        for (int i = 0; i < dim; ++i) d(i) = base[static_cast<size_t>(i)] * std::polar(1.0, speed[static_cast<size_t>(i)] * x);
        mats.push_back(r * d.asDiagonal() * r.adjoint());
    }
    return sloop::make_path(std::move(mats), false, 0.0);
}

inline sloop::OperatorPath conjugate_path(const sloop::OperatorPath& a, const Mat& v) {
    std::vector<Mat> mats;
    for (int g = 0; g <= a.grid_size; ++g) mats.push_back(v * a.at(g) * v.adjoint());
    return sloop::make_path(std::move(mats), a.is_loop, a.tail_bound);
}

inline sloop::OperatorPath constant_path(const Mat& m, int G, bool loop) {
    return sloop::make_path(std::vector<Mat>(static_cast<size_t>(G) + 1, m), loop, 0.0);
}

inline Mat diag(std::initializer_list<cplx> d) {
    Vec v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index k = 0;
    for (cplx z : d) v(k++) = z;
    return v.asDiagonal();
}

} // namespace testing
