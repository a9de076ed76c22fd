#pragma once

#include "spectral_loop/operator_model.hpp"

#include <string>

namespace sloop {

// Rows ordered n = k, k-1, ..., -k (dim 2k+1). Eigenvalue tracks of the
// diagonal carry the closed forms; the top track is e^{iπx}/2^k so the
// window closes up, and λ_{-1} carries a small imaginary bump that keeps it
// away from 0. Adjacent rotations with angle πx/2 move e_n to e_{n-1}.
GeneratorSpec example_shift_loop(int k);

// Eigenvalue of row n of the shift-loop window at x, as written into its
// diagonal expression.
cplx shift_loop_eigenvalue(int k, int n, double x);

// Index n of row r in the shift-loop window.
inline int shift_loop_label(int k, int row) { return k - row; }

// The halving cascade: A(1) = diag(1, 1/2, ..., 1/2^{k+1}), a rotation and a
// diagonal rescaling for each level n < k, and a final collapse on
// [0, 1/2^k] that sends the tracked eigenvalue to 0. With repair=false the
// rescaling uses the unnormalized interpolation, which is not the identity at
// its right support endpoint.
GeneratorSpec example_halving_cascade(int k, bool repair);

// Rotation intervals [3/2^{n+2}, 1/2^n] on which |λ_1| = 1/2^n.
inline double cascade_rotation_lo(int n) { return 3.0 / std::ldexp(1.0, n + 2); }
inline double cascade_rotation_hi(int n) { return 1.0 / std::ldexp(1.0, n); }

} // namespace sloop
