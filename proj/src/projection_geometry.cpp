#include "spectral_loop/projection_geometry.hpp"

#include "spectral_loop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace sloop {

namespace {

// Kuhn's augmenting paths on the bipartite graph {(i, j) : allowed(i, j)}.
// Rows in `fixed_rows` are already matched to the columns in `fixed_cols`.
class Matcher {
public:
    Matcher(int n, std::function<bool(int, int)> allowed) : n_(n), allowed_(std::move(allowed)) {}

    bool perfect(const std::vector<int>& row_fixed) {
        col_owner_.assign(static_cast<size_t>(n_), -1);
        std::vector<bool> row_done(static_cast<size_t>(n_), false);
        for (int i = 0; i < n_; ++i) {
            int j = row_fixed[static_cast<size_t>(i)];
            if (j >= 0) {
                if (col_owner_[static_cast<size_t>(j)] != -1) return false;
                col_owner_[static_cast<size_t>(j)] = i;
                row_done[static_cast<size_t>(i)] = true;
            }
        }
        fixed_ = row_fixed;
        for (int i = 0; i < n_; ++i) {
            if (row_done[static_cast<size_t>(i)]) continue;
            seen_.assign(static_cast<size_t>(n_), false);
            if (!augment(i)) return false;
        }
        return true;
    }

private:
    int n_;
    std::function<bool(int, int)> allowed_;
    std::vector<int> col_owner_;
    std::vector<int> fixed_;
    std::vector<bool> seen_;

    bool augment(int i) {
        for (int j = 0; j < n_; ++j) {
            if (seen_[static_cast<size_t>(j)] || !allowed_(i, j)) continue;
            seen_[static_cast<size_t>(j)] = true;
            int owner = col_owner_[static_cast<size_t>(j)];
            if (owner != -1 && fixed_[static_cast<size_t>(owner)] >= 0) continue;
            if (owner == -1 || augment(owner)) {
                col_owner_[static_cast<size_t>(j)] = i;
                return true;
            }
        }
        return false;
    }
};

} // namespace

void check_triple(const ProjectionTriple& t, double tol) {
    if (tol < 0) tol = 1e3 * tol_rel();
    const int n = t.n();
    if (static_cast<int>(t.q.size()) != n || static_cast<int>(t.sigma.size()) != n)
        throw Error(ErrorKind::SizeMismatch, "triple families differ in size");
    std::vector<bool> hit(static_cast<size_t>(n), false);
    for (int s : t.sigma) {
        if (s < 0 || s >= n || hit[static_cast<size_t>(s)]) throw Error(ErrorKind::PreconditionViolated, "sigma is not a permutation");
        hit[static_cast<size_t>(s)] = true;
    }
    for (const auto* fam : {&t.p, &t.q})
        for (int i = 0; i < n; ++i) {
            if (std::abs((*fam)[static_cast<size_t>(i)].norm() - 1.0) > tol)
                throw Error(ErrorKind::PreconditionViolated, "family vector not unit");
            for (int j = i + 1; j < n; ++j)
                if (std::abs((*fam)[static_cast<size_t>(i)].dot((*fam)[static_cast<size_t>(j)])) > tol)
                    throw Error(ErrorKind::PreconditionViolated, "family not pairwise orthogonal");
        }
}

double rank1_distance(const Vec& v, const Vec& w) {
    if (v == w) return 0.0;
    // |w - v<v,w>| = sqrt(1 - |<v,w>|^2) without the cancellation near 0;
    // both orientations so the result is exactly symmetric
    double a = (w - v * v.dot(w)).norm();
    double b = (v - w * w.dot(v)).norm();
    return std::min(1.0, std::max(a, b));
}

std::vector<std::vector<double>> bottleneck_costs(const ProjectionTriple& a, const ProjectionTriple& b) {
    const int n = a.n();
    std::vector<std::vector<double>> c(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                std::max(rank1_distance(a.p[static_cast<size_t>(i)], b.p[static_cast<size_t>(j)]),
                         rank1_distance(a.partner(i), b.partner(j)));
    return c;
}

BottleneckMatch bottleneck_distance(const ProjectionTriple& a, const ProjectionTriple& b) {
    if (a.n() != b.n()) throw Error(ErrorKind::SizeMismatch, "bottleneck_distance: family sizes differ");
    const int n = a.n();
    BottleneckMatch out;
    if (n == 0) {
        out.certified_unique = true;
        return out;
    }
    auto c = bottleneck_costs(a, b);
    std::vector<double> vals;
    for (const auto& row : c) vals.insert(vals.end(), row.begin(), row.end());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

    std::vector<int> none(static_cast<size_t>(n), -1);
    auto feasible = [&](double cap, const std::vector<int>& fixed) {
        Matcher m(n, [&](int i, int j) { return c[static_cast<size_t>(i)][static_cast<size_t>(j)] <= cap; });
        return m.perfect(fixed);
    };
    size_t lo = 0, hi = vals.size() - 1;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (feasible(vals[mid], none)) hi = mid;
        else lo = mid + 1;
    }
    const double cap = vals[lo];

    // lexicographically smallest optimal permutation
    std::vector<int> fixed = none;
    std::vector<bool> used(static_cast<size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<size_t>(j)] || c[static_cast<size_t>(i)][static_cast<size_t>(j)] > cap) continue;
            fixed[static_cast<size_t>(i)] = j;
            if (feasible(cap, fixed)) {
                used[static_cast<size_t>(j)] = true;
                break;
            }
            fixed[static_cast<size_t>(i)] = -1;
        }
    }
    out.tau = fixed;
    out.value = cap;
    out.certified_unique = cap < 0.5;
    return out;
}

double match_stability(const ProjectionTriple& ref, const ProjectionTriple& a, const ProjectionTriple& b) {
    BottleneckMatch ma = bottleneck_distance(ref, a);
    BottleneckMatch mb = bottleneck_distance(ref, b);
    if (ma.value >= 0.25 || mb.value >= 0.25)
        throw Error(ErrorKind::PreconditionViolated, "match_stability needs both distances below 1/4", std::nullopt,
                    std::max(ma.value, mb.value));
    double worst = 0.0;
    for (int i = 0; i < ref.n(); ++i) {
        int ja = ma.tau[static_cast<size_t>(i)], jb = mb.tau[static_cast<size_t>(i)];
        worst = std::max({worst, rank1_distance(a.p[static_cast<size_t>(ja)], b.p[static_cast<size_t>(jb)]),
                          rank1_distance(a.partner(ja), b.partner(jb))});
    }
    return worst;
}

Vec transport_projection(const Vec& u, const Vec& w, const Vec& v) {
    if (rank1_distance(u, w) >= 1.0 - 1e-12) throw Error(ErrorKind::TooFar, "transport between orthogonal lines");
    return v + w * w.dot(v) - u * u.dot(v);
}

double intertwining_defect(const Mat& u, const ProjectionTriple& t) {
    double worst = 0.0;
    for (int j = 0; j < t.n(); ++j) {
        Vec up = u * t.p[static_cast<size_t>(j)];
        worst = std::max(worst, op_norm(rank_one(up) - t.qmat(t.sigma[static_cast<size_t>(j)])));
    }
    return worst;
}

GaugePhases extract_phases(const ProjectionTriple& ref, const ProjectionTriple& near, const Mat& u) {
    const double tol = 1e3 * tol_rel();
    double defect = intertwining_defect(u, near);
    if (defect > tol) throw Error(ErrorKind::NotIntertwining, "U does not intertwine the triple", std::nullopt, defect);
    BottleneckMatch m = bottleneck_distance(ref, near);
    if (m.value >= 0.25)
        throw Error(ErrorKind::PreconditionViolated, "chart needs d(ref, near) < 1/4", std::nullopt, m.value);
    GaugePhases g;
    for (int i = 0; i < ref.n(); ++i) {
        int j = m.tau[static_cast<size_t>(i)];
        Vec a = transport_projection(ref.p[static_cast<size_t>(i)], near.p[static_cast<size_t>(j)], ref.p[static_cast<size_t>(i)]);
        Vec b = transport_projection(ref.partner(i), near.partner(j), ref.partner(i));
        a.normalize();
        b.normalize();
        cplx z = b.dot(u * a);
        if (std::abs(std::abs(z) - 1.0) > tol)
            throw Error(ErrorKind::NotIntertwining, "phase of modulus " + std::to_string(std::abs(z)), i, std::abs(z));
        g.z.push_back(z);
    }
    return g;
}

Mat apply_gauge(const Mat& u, const GaugePhases& phases, const ProjectionTriple& triple) {
    double defect = intertwining_defect(u, triple);
    if (defect > 1e3 * tol_rel()) throw Error(ErrorKind::NotIntertwining, "U does not intertwine the triple", std::nullopt, defect);
    Mat out = Mat::Zero(u.rows(), u.cols());
    for (int i = 0; i < triple.n(); ++i) {
        const Vec& pv = triple.p[static_cast<size_t>(i)];
        const Vec& qv = triple.partner(i);
        out += phases.z[static_cast<size_t>(i)] * (qv * (qv.dot(u * pv))) * pv.adjoint();
    }
    return out;
}

} // namespace sloop
