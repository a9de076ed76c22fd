#include "spectral_loop/spectral.hpp"

#include "spectral_loop/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace sloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double min_singular(const Mat& a) {
    Mat g = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

void fix_phase(Vec& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    cplx ph = v(k) / std::abs(v(k));
    v /= ph;
}

} // namespace

double default_delta_min(const Mat& m) { return 100.0 * tol_rel() * std::max(1.0, op_norm(m)); }

void normal_eigen(const Mat& m, Vec& values, Mat& vectors, double* offdiag) {
    Eigen::ComplexSchur<Mat> schur(m);
    values = schur.matrixT().diagonal();
    vectors = schur.matrixU();
    if (offdiag) *offdiag = schur.matrixT().triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();
}

double resolvent_floor(const SpectralFrame& frame, cplx z) {
    double d = 1e300;
    for (Eigen::Index k = 0; k < frame.spectrum.size(); ++k) d = std::min(d, std::abs(z - frame.spectrum(k)));
    return std::max(0.0, d - frame.schur_offdiag);
}

SpectralFrame eigen_frame(const OperatorSample& s, double threshold, int point_index) {
    return eigen_frame(s, threshold, point_index, default_delta_min(s.matrix));
}

SpectralFrame eigen_frame(const OperatorSample& s, double threshold, int point_index, double delta_min) {
    SpectralFrame f;
    f.point_index = point_index;
    f.threshold = threshold;
    f.dim = static_cast<int>(s.matrix.rows());
    Vec vals;
    Mat vecs;
    normal_eigen(s.matrix, vals, vecs, &f.schur_offdiag);
    f.spectrum = vals;
    std::vector<int> keep;
    for (int k = 0; k < vals.size(); ++k)
        if (std::abs(vals(k)) > threshold) keep.push_back(k);
    std::sort(keep.begin(), keep.end(), [&](int a, int b) {
        double ma = std::abs(vals(a)), mb = std::abs(vals(b));
        if (ma != mb) return ma > mb;
        return std::arg(vals(a)) < std::arg(vals(b));
    });
    for (int k : keep) {
        EigenPair ep;
        ep.lambda = vals(k);
        ep.v = vecs.col(k);
        fix_phase(ep.v);
        ep.p = rank_one(ep.v);
        f.pairs.push_back(std::move(ep));
    }
    for (size_t a = 0; a < f.pairs.size(); ++a)
        for (size_t b = a + 1; b < f.pairs.size(); ++b)
            if (std::abs(f.pairs[a].lambda - f.pairs[b].lambda) <= delta_min)
                throw Error(ErrorKind::MultiplicityViolation,
                            "eigenvalues " + std::to_string(a) + " and " + std::to_string(b) + " coincide at grid index " +
                                std::to_string(point_index),
                            point_index, std::abs(f.pairs[a].lambda - f.pairs[b].lambda));
    return f;
}

Mat riesz_quadrature(const Mat& m, cplx center, double radius, int nodes) {
    const auto n = m.rows();
    Mat acc = Mat::Zero(n, n);
    const Mat id = Mat::Identity(n, n);
    for (int k = 0; k < nodes; ++k) {
        cplx w = std::polar(1.0, kTwoPi * k / nodes);
        cplx z = center + radius * w;
        acc += (radius * w) * Eigen::PartialPivLU<Mat>(z * id - m).solve(id);
    }
    return acc / static_cast<double>(nodes);
}

RieszResult riesz_projection(const OperatorSample& s, cplx center, double radius, int nodes, double tol, int max_nodes) {
    if (nodes < 16) throw Error(ErrorKind::Usage, "riesz_projection needs at least 16 nodes");
    if (!(radius > 0)) throw Error(ErrorKind::Usage, "contour radius must be positive");
    const Mat& m = s.matrix;
    Eigen::ComplexSchur<Mat> schur(m, false);
    Vec ev = schur.matrixT().diagonal();
    double margin = 1e-3 * radius, closest = 1e300;
    for (int k = 0; k < ev.size(); ++k) closest = std::min(closest, std::abs(std::abs(ev(k) - center) - radius));
    if (closest < margin)
        throw Error(ErrorKind::ContourHitsSpectrum, "contour passes within " + std::to_string(closest) + " of the spectrum",
                    std::nullopt, closest);
    if (tol < 0) tol = 1e-12 * std::max(1.0, op_norm(m));

    const auto n = m.rows();
    const Mat id = Mat::Identity(n, n);
    Mat q = riesz_quadrature(m, center, radius, nodes);
    int N = nodes;
    for (;;) {
        // the 2N rule reuses the N existing nodes; add the odd ones
        Mat odd = Mat::Zero(n, n);
        for (int k = 0; k < N; ++k) {
            cplx w = std::polar(1.0, kTwoPi * (2 * k + 1) / (2 * N));
            cplx z = center + radius * w;
            odd += (radius * w) * Eigen::PartialPivLU<Mat>(z * id - m).solve(id);
        }
        Mat q2 = 0.5 * (q + odd / static_cast<double>(N));
        double err = op_norm(q2 - q);
        N *= 2;
        if (err <= tol) return {q2, err, N};
        if (N >= max_nodes)
            throw Error(ErrorKind::QuadratureNotConverged, "quadrature change " + std::to_string(err) + " at " + std::to_string(N) + " nodes",
                        N, err);
        q = q2;
    }
}

GapData separation_radii(const SpectralFrame& frame, const Mat& m) {
    const size_t k = frame.pairs.size();
    GapData gd;
    gd.delta.resize(k);
    gd.r.resize(k);
    gd.threshold_limited.resize(k);
    const auto n = m.rows();
    const Mat id = Mat::Identity(n, n);
    const bool have_spectrum = frame.spectrum.size() == n;
    for (size_t i = 0; i < k; ++i) {
        cplx li = frame.pairs[i].lambda;
        double other = 1e300;
        for (size_t j = 0; j < k; ++j)
            if (j != i) other = std::min(other, std::abs(li - frame.pairs[j].lambda));
        double to_thr = std::abs(li) - frame.threshold;
        double d = std::min({other, to_thr, std::abs(li)});
        gd.delta[i] = d / 3.0;
        gd.threshold_limited[i] = to_thr <= other;
        double r = 1e300;
        for (int p = 0; p < 64; ++p) {
            double rad = gd.delta[i] * (0.25 + 0.25 * (p % 4) / 3.0);
            cplx z = li + std::polar(rad, kTwoPi * p / 64.0);
            r = std::min(r, have_spectrum ? resolvent_floor(frame, z) : min_singular(z * id - m));
        }
        if (r <= tol_rel() * std::max(1.0, op_norm(m)))
            throw Error(ErrorKind::ContourHitsSpectrum, "annulus probe near-singular for eigenvalue " + std::to_string(i),
                        static_cast<long>(i), r);
        gd.r[i] = r;
    }
    gd.alpha = gd.r;
    gd.eta = gd.r;
    return gd;
}

bool local_multiplicity_check(const OperatorPath& path, int g, cplx center, double beta) {
    if (!(beta > 0)) throw Error(ErrorKind::Usage, "beta must be positive");
    const Mat& mg = path.at(g);
    const auto n = mg.rows();
    const Mat id = Mat::Identity(n, n);
    const double rad = beta / 2.0;
    // Neumann-series budget: samples closer than this keep the contour resolvent defined
    double budget = 1e300;
    for (int p = 0; p < 64; ++p) budget = std::min(budget, min_singular((center + std::polar(rad, kTwoPi * p / 64.0)) * id - mg));

    auto rank_at = [&](int h) {
        RieszResult rr = riesz_projection(path.samples[static_cast<size_t>(h)], center, rad);
        return std::lround(rr.q.trace().real());
    };
    if (rank_at(g) != 1) return false;
    for (int dir : {-1, 1}) {
        for (int h = g + dir; h >= 0 && h <= path.grid_size; h += dir) {
            bool adjacent = (h == g + dir);
            if (!adjacent && op_norm(path.at(h) - mg) >= budget) break;
            if (rank_at(h) != 1) return false;
        }
    }
    return true;
}

Mat psd_sqrt(const Mat& h, double tol) {
    if (h.rows() != h.cols()) throw Error(ErrorKind::SizeMismatch, "psd_sqrt: matrix not square");
    double scale = std::max(1.0, op_norm(h));
    if (tol < 0) tol = tol_rel() * scale;
    double asym = op_norm(h - h.adjoint());
    if (asym > tol) throw Error(ErrorKind::NotHermitian, "psd_sqrt: matrix not Hermitian", std::nullopt, asym);
    Mat hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(hs);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.size() && ev(0) < -tol)
        throw Error(ErrorKind::NegativeEigenvalue, "psd_sqrt: eigenvalue " + std::to_string(ev(0)), std::nullopt, ev(0));
    Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace sloop
