#include "spectral_loop/continuation.hpp"

#include "spectral_loop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sloop {

double Track::max_modulus() const {
    double m = 0.0;
    for (cplx v : values) m = std::max(m, std::abs(v));
    return m;
}

std::vector<int> EigenBraid::full_tracks() const {
    std::vector<int> out;
    for (size_t t = 0; t < tracks.size(); ++t)
        if (tracks[t].birth == 0 && tracks[t].last() == grid_size) out.push_back(static_cast<int>(t));
    return out;
}

EigenBraid trace_braid(const OperatorPath& path, double threshold) {
    const int G = path.grid_size;
    EigenBraid br;
    br.threshold = threshold;
    br.grid_size = G;
    br.is_loop = path.is_loop;
    br.frames.resize(static_cast<size_t>(G) + 1);
    br.gaps.resize(static_cast<size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) {
        br.frames[static_cast<size_t>(g)] = eigen_frame(path.samples[static_cast<size_t>(g)], threshold, g);
        br.gaps[static_cast<size_t>(g)] = separation_radii(br.frames[static_cast<size_t>(g)], path.at(g));
    }

    std::vector<int> alive;
    auto start_track = [&](int g, int k) {
        Track t;
        t.birth = g;
        t.values.push_back(br.frames[static_cast<size_t>(g)].pairs[static_cast<size_t>(k)].lambda);
        t.pair_index.push_back(k);
        t.birth_threshold_limited = br.gaps[static_cast<size_t>(g)].threshold_limited[static_cast<size_t>(k)];
        br.tracks.push_back(std::move(t));
        alive.push_back(static_cast<int>(br.tracks.size()) - 1);
    };
    for (size_t k = 0; k < br.frames[0].pairs.size(); ++k) start_track(0, static_cast<int>(k));

    for (int g = 0; g < G; ++g) {
        const auto& next = br.frames[static_cast<size_t>(g) + 1].pairs;
        const auto& gd = br.gaps[static_cast<size_t>(g)];
        std::vector<int> claimed(next.size(), -1);
        std::vector<int> still;
        for (int id : alive) {
            Track& t = br.tracks[static_cast<size_t>(id)];
            int fi = t.pair_index.back();
            cplx l = t.values.back();
            double d4 = gd.delta[static_cast<size_t>(fi)] / 4.0;
            int hit = -1, count = 0;
            for (size_t k = 0; k < next.size(); ++k)
                if (std::abs(next[k].lambda - l) < d4) {
                    hit = static_cast<int>(k);
                    ++count;
                }
            if (count == 1 && claimed[static_cast<size_t>(hit)] == -1) {
                claimed[static_cast<size_t>(hit)] = id;
                t.values.push_back(next[static_cast<size_t>(hit)].lambda);
                t.pair_index.push_back(hit);
                t.certified.push_back(true);
                t.norm_certified.push_back(path.gaps[static_cast<size_t>(g)] < gd.alpha[static_cast<size_t>(fi)]);
                still.push_back(id);
            } else if (gd.threshold_limited[static_cast<size_t>(fi)]) {
                t.died = true;
                t.end_threshold_limited = true;
            } else {
                throw Error(ErrorKind::RefineGrid,
                            "no certified match for track " + std::to_string(id) + " at grid index " + std::to_string(g), g,
                            std::abs(l));
            }
        }
        alive = std::move(still);
        for (size_t k = 0; k < next.size(); ++k)
            if (claimed[k] == -1) start_track(g + 1, static_cast<int>(k));
    }
    return br;
}

Condition1Report check_condition1(const EigenBraid& braid, const OperatorPath& path) {
    (void)path;
    Condition1Report rep;
    for (size_t t = 0; t < braid.tracks.size(); ++t) {
        const Track& tr = braid.tracks[t];
        double half = 0.5 * tr.max_modulus();
        if (tr.birth > 0) {
            Condition1Failure f;
            f.track = static_cast<int>(t);
            f.grid_index = tr.birth;
            f.end = "birth";
            f.reason = tr.birth_threshold_limited ? "modulus-below-threshold" : "no-safe-match";
            f.limit_zero = tr.birth_threshold_limited && std::abs(tr.values.front()) < half;
            rep.failures.push_back(f);
        }
        if (tr.died) {
            Condition1Failure f;
            f.track = static_cast<int>(t);
            f.grid_index = tr.last() + 1;
            f.end = "death";
            f.reason = tr.end_threshold_limited ? "modulus-below-threshold" : "no-safe-match";
            f.limit_zero = tr.end_threshold_limited && std::abs(tr.values.back()) < half;
            rep.failures.push_back(f);
        }
    }
    rep.satisfied = rep.failures.empty();
    return rep;
}

std::vector<int> monodromy(EigenBraid& braid) {
    if (!braid.is_loop) throw Error(ErrorKind::NoCertifiedClosure, "monodromy needs a loop");
    const auto full = braid.full_tracks();
    if (full.size() != braid.tracks.size())
        throw Error(ErrorKind::NoCertifiedClosure, "monodromy needs every track to span the loop");
    const int G = braid.grid_size;
    const size_t n = braid.tracks.size();
    std::vector<int> sigma(n, -1);
    std::vector<bool> taken(n, false);
    for (size_t i = 0; i < n; ++i) {
        const Track& ti = braid.tracks[i];
        cplx start = ti.values.front();
        double d4 = braid.gaps[0].delta[static_cast<size_t>(ti.pair_index.front())] / 4.0;
        int hit = -1, count = 0;
        for (size_t j = 0; j < n; ++j)
            if (std::abs(braid.tracks[j].at(G) - start) < d4) {
                hit = static_cast<int>(j);
                ++count;
            }
        if (count != 1 || taken[static_cast<size_t>(hit)])
            throw Error(ErrorKind::NoCertifiedClosure, "no certified closure for track " + std::to_string(i), static_cast<long>(i));
        taken[static_cast<size_t>(hit)] = true;
        sigma[i] = hit;
    }
    braid.monodromy = sigma;
    return sigma;
}

FramedBraid frame_transport(const OperatorPath& path, const EigenBraid& braid) {
    (void)path;
    FramedBraid fb;
    fb.braid = braid;
    fb.sections.resize(braid.tracks.size());
    for (size_t t = 0; t < braid.tracks.size(); ++t) {
        const Track& tr = braid.tracks[t];
        auto& sec = fb.sections[t];
        sec.reserve(tr.values.size());
        sec.push_back(braid.frames[static_cast<size_t>(tr.birth)].pairs[static_cast<size_t>(tr.pair_index[0])].v);
        for (size_t k = 1; k < tr.values.size(); ++k) {
            int g = tr.birth + static_cast<int>(k);
            const Vec& v = braid.frames[static_cast<size_t>(g)].pairs[static_cast<size_t>(tr.pair_index[k])].v;
            cplx ov = v.dot(sec.back());
            if (std::abs(ov) < 0.5)
                throw Error(ErrorKind::TransportBreakdown,
                            "eigenline of track " + std::to_string(t) + " jumps at grid index " + std::to_string(g), g,
                            std::abs(ov));
            sec.push_back(v * (ov / std::abs(ov)));
        }
    }
    return fb;
}

Diagonalization diagonalize_path(const FramedBraid& framed, const OperatorPath& path) {
    const auto& br = framed.braid;
    const int G = br.grid_size;
    const int dim = path.dim();
    Diagonalization d;
    d.u.resize(static_cast<size_t>(G) + 1);
    d.columns.resize(static_cast<size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) {
        std::vector<int> cols;
        for (size_t t = 0; t < br.tracks.size(); ++t)
            if (br.tracks[t].alive_at(g)) cols.push_back(static_cast<int>(t));
        Mat w(dim, static_cast<Eigen::Index>(cols.size()));
        Vec lam(static_cast<Eigen::Index>(cols.size()));
        for (size_t c = 0; c < cols.size(); ++c) {
            const Track& tr = br.tracks[static_cast<size_t>(cols[c])];
            w.col(static_cast<Eigen::Index>(c)) = framed.sections[static_cast<size_t>(cols[c])][static_cast<size_t>(g - tr.birth)];
            lam(static_cast<Eigen::Index>(c)) = tr.at(g);
        }
        const auto k = w.cols();
        double gram = herm_norm(w.adjoint() * w - Mat::Identity(k, k));
        if (gram > 1e-6)
            throw Error(ErrorKind::SpanDeficient, "sections not orthonormal at grid index " + std::to_string(g), g, gram);
        Mat u = complete_unitary(w, dim);
        Mat block = w.adjoint() * path.at(g) * w;
        block.diagonal() -= lam;
        d.max_residual = std::max(d.max_residual, op_norm(block));
        d.u[static_cast<size_t>(g)] = std::move(u);
        d.columns[static_cast<size_t>(g)] = std::move(cols);
    }
    return d;
}

std::vector<Condition2Term> build_condition2_sequence(const OperatorPath& path, const FramedBraid& framed, int n) {
    const auto& br = framed.braid;
    const auto full = br.full_tracks();
    if (full.size() != br.tracks.size())
        throw Error(ErrorKind::Condition1Missing, "condition (1) does not hold on this path");
    const int dim = path.dim();
    if (n < 1 || n > static_cast<int>(full.size()))
        throw Error(ErrorKind::Usage, "n must lie between 1 and the number of tracks");
    Diagonalization d = diagonalize_path(framed, path);
    std::vector<Condition2Term> out;
    for (int k = 1; k <= n; ++k) {
        Condition2Term term;
        term.k = k;
        for (int i = 0; i < k; ++i) term.tracks.push_back(full[static_cast<size_t>(i)]);
        for (int g = 0; g <= br.grid_size; ++g) {
            const Mat& u = d.u[static_cast<size_t>(g)];
            Mat lam = Mat::Zero(dim, dim);
            for (size_t c = 0; c < full.size(); ++c) lam(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) = br.tracks[c].at(g);
            Mat f = Mat::Zero(dim, dim);
            f.topLeftCorner(k, k) = u.topLeftCorner(k, k);
            Mat lk = Mat::Zero(dim, dim);
            lk.topLeftCorner(k, k) = lam.topLeftCorner(k, k);
            Mat s = f * lk * f.adjoint();
            Mat pa = Mat::Zero(dim, dim);
            pa.topLeftCorner(k, k) = path.at(g).topLeftCorner(k, k);
            term.deviation = std::max(term.deviation, op_norm(s - path.at(g)));
            term.lambda_tail = std::max(term.lambda_tail, op_norm(lk - lam));
            term.path_tail = std::max(term.path_tail, op_norm(pa - path.at(g)));
            term.samples.push_back(std::move(s));
        }
        out.push_back(std::move(term));
    }
    return out;
}

} // namespace sloop
