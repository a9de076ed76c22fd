#pragma once

#include "spectral_loop/operator_model.hpp"
#include "spectral_loop/spectral.hpp"

#include <string>
#include <vector>

namespace sloop {

struct Track {
    int birth = 0;
    std::vector<cplx> values;      // values[k] at grid index birth + k
    std::vector<int> pair_index;   // index into the frame's pairs at that grid index
    std::vector<bool> certified;   // step k -> k+1 passed the δ/4 ball test
    std::vector<bool> norm_certified;  // step k -> k+1 norm gap below the α budget
    bool died = false;             // ended before the last grid index
    bool end_threshold_limited = false;
    bool birth_threshold_limited = false;

    int last() const { return birth + static_cast<int>(values.size()) - 1; }
    bool alive_at(int g) const { return g >= birth && g <= last(); }
    cplx at(int g) const { return values[static_cast<size_t>(g - birth)]; }
    double max_modulus() const;
};

struct EigenBraid {
    double threshold = 0.0;
    int grid_size = 0;
    bool is_loop = false;
    std::vector<Track> tracks;
    std::vector<SpectralFrame> frames;
    std::vector<GapData> gaps;
    std::vector<int> monodromy;  // filled by monodromy() for loops

    // Tracks spanning the whole grid, in id order.
    std::vector<int> full_tracks() const;
};

EigenBraid trace_braid(const OperatorPath& path, double threshold);

struct Condition1Failure {
    int track = 0;
    int grid_index = 0;
    std::string end;     // "birth" or "death"
    std::string reason;  // "modulus-below-threshold" or "no-safe-match"
    bool limit_zero = false;
};

struct Condition1Report {
    bool satisfied = true;
    std::vector<Condition1Failure> failures;
};

Condition1Report check_condition1(const EigenBraid& braid, const OperatorPath& path);

// σ with λ_i(0) = λ_{σ(i)}(1), indexed by track id. Stores it in braid.monodromy.
std::vector<int> monodromy(EigenBraid& braid);

struct FramedBraid {
    EigenBraid braid;
    std::vector<std::vector<Vec>> sections;  // per track, per alive grid index
};

FramedBraid frame_transport(const OperatorPath& path, const EigenBraid& braid);

struct Diagonalization {
    std::vector<Mat> u;                    // per grid index
    std::vector<std::vector<int>> columns; // track id of each leading column
    double max_residual = 0.0;
};

Diagonalization diagonalize_path(const FramedBraid& framed, const OperatorPath& path);

struct Condition2Term {
    int k = 0;
    std::vector<Mat> samples;  // P_k U P_k Λ P_k U* P_k
    std::vector<int> tracks;   // track ids behind λ_1..λ_k
    double deviation = 0.0;    // max_g ‖sample - Ā‖
    double lambda_tail = 0.0;  // max_g ‖P_k Λ P_k - Λ‖
    double path_tail = 0.0;    // max_g ‖P_k Ā P_k - Ā‖
};

std::vector<Condition2Term> build_condition2_sequence(const OperatorPath& path, const FramedBraid& framed, int n);

} // namespace sloop
