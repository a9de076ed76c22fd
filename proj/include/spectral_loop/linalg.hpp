#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace sloop {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Relative tolerance; SPECTRALLOOP_TOL overrides the default 1e-10.
double tol_rel();

// Largest singular value via the Hermitian eigenproblem of M*M.
double op_norm(const Mat& m);

// Same, for a matrix known to be Hermitian: max |eigenvalue|.
double herm_norm(const Mat& h);

double normality_residual(const Mat& m);

// τ_norm for a given matrix: tol_rel() * ‖M‖².
double normality_tol(const Mat& m);

bool all_finite(const Mat& m);

Mat rank_one(const Vec& v);

// Complete the given orthonormal columns to a unitary by Gram-Schmidt
// against e_0, e_1, ... in order.
Mat complete_unitary(const Mat& cols, int dim);

double unitarity_defect(const Mat& u);

} // namespace sloop
