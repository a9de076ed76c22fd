#include "spectral_loop/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace sloop {

double tol_rel() {
    static const double tol = [] {
        if (const char* s = std::getenv("SPECTRALLOOP_TOL")) {
            try {
                double v = std::stod(s);
                if (v > 0 && std::isfinite(v)) return v;
            } catch (...) {
            }
        }
        return 1e-10;
    }();
    return tol;
}

double herm_norm(const Mat& h) {
    if (h.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Mat g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double normality_residual(const Mat& m) {
    Mat c = m * m.adjoint() - m.adjoint() * m;
    return herm_norm(c);
}

double normality_tol(const Mat& m) {
    double n = op_norm(m);
    return tol_rel() * n * n;
}

bool all_finite(const Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const cplx z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

Mat rank_one(const Vec& v) { return v * v.adjoint(); }

Mat complete_unitary(const Mat& cols, int dim) {
    Mat u = Mat::Zero(dim, dim);
    int k = static_cast<int>(cols.cols());
    u.leftCols(k) = cols;
    int next = k;
    for (int e = 0; e < dim && next < dim; ++e) {
        Vec v = Vec::Zero(dim);
        v(e) = 1.0;
        // two passes of classical Gram-Schmidt
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < next; ++j) v -= u.col(j) * u.col(j).dot(v);
        double nv = v.norm();
        if (nv > 1e-8) u.col(next++) = v / nv;
    }
    return u;
}

double unitarity_defect(const Mat& u) {
    Mat d = u * u.adjoint() - Mat::Identity(u.rows(), u.cols());
    return herm_norm(d);
}

} // namespace sloop
