#include "spectral_loop/approximation.hpp"

#include "spectral_loop/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sloop {

namespace {

constexpr double kPi = std::numbers::pi;

// Log-polar path from s to e at parameter t; a half-turn tie goes counterclockwise.
cplx log_polar(cplx s, cplx e, double t) {
    double turn = std::arg(e / s);
    if (std::abs(std::abs(turn) - kPi) < 1e-12) turn = kPi;
    double r = (1.0 - t) * std::abs(s) + t * std::abs(e);
    return std::polar(r, std::arg(s) + t * turn);
}

} // namespace

bool ApproximationPlan::in_S(int t) const { return std::binary_search(S.begin(), S.end(), t); }

ApproximationPlan select_plan(EigenBraid& braid, int n) {
    if (n < 1) throw Error(ErrorKind::Usage, "n must be positive");
    if (braid.monodromy.empty()) monodromy(braid);
    const int G = braid.grid_size;
    const int T = static_cast<int>(braid.tracks.size());
    const double cut = 1.0 / n;
    ApproximationPlan plan;
    plan.n = n;
    plan.grid_size = G;
    plan.sigma = braid.monodromy;
    for (int t = 0; t < T; ++t) {
        const Track& tr = braid.tracks[static_cast<size_t>(t)];
        if (tr.max_modulus() >= cut) plan.S.push_back(t);
        if (std::abs(tr.at(0)) >= cut) plan.S0.push_back(t);
        if (std::abs(tr.at(G)) >= cut) plan.S1.push_back(t);
    }
    if (plan.S.empty()) throw Error(ErrorKind::EmptySn, "no track reaches modulus 1/" + std::to_string(n));
    plan.s_n = static_cast<int>(plan.S.size());

    std::vector<bool> inS(static_cast<size_t>(T), false), inSigmaS(static_cast<size_t>(T), false);
    for (int i : plan.S) {
        inS[static_cast<size_t>(i)] = true;
        inSigmaS[static_cast<size_t>(plan.sigma[static_cast<size_t>(i)])] = true;
    }
    plan.sigma_prime.assign(static_cast<size_t>(T), -1);
    std::vector<int> from, to;
    for (int i : plan.S) {
        int s = plan.sigma[static_cast<size_t>(i)];
        if (inS[static_cast<size_t>(s)]) plan.sigma_prime[static_cast<size_t>(i)] = s;
        else from.push_back(i);
        if (!inSigmaS[static_cast<size_t>(i)]) to.push_back(i);
    }
    if (from.size() != to.size()) throw Error(ErrorKind::NoCertifiedClosure, "monodromy is not a bijection on the retained tracks");
    for (size_t k = 0; k < from.size(); ++k) {
        plan.sigma_prime[static_cast<size_t>(from[k])] = to[k];
        plan.moved.emplace_back(to[k], plan.sigma[static_cast<size_t>(from[k])]);
    }
    plan.H = plan.S;
    plan.L = plan.S;
    for (int i : plan.S) plan.L.push_back(plan.sigma[static_cast<size_t>(i)]);
    std::sort(plan.L.begin(), plan.L.end());
    plan.L.erase(std::unique(plan.L.begin(), plan.L.end()), plan.L.end());

    int a = G;
    while (a - 1 >= 1) {
        bool ok = true;
        for (int i : plan.S) {
            const Track& tr = braid.tracks[static_cast<size_t>(i)];
            if (std::abs(tr.at(a - 1) - tr.at(G)) >= cut) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
        --a;
    }
    plan.alpha_index = std::min(a, G - 1);
    plan.alpha = static_cast<double>(plan.alpha_index) / G;
    return plan;
}

ApproximationPlan build_lambda_prime(const EigenBraid& braid, ApproximationPlan plan) {
    const int G = braid.grid_size;
    const int T = static_cast<int>(braid.tracks.size());
    const int a = plan.alpha_index;
    std::vector<bool> inSigmaS(static_cast<size_t>(T), false);
    for (int i : plan.S) inSigmaS[static_cast<size_t>(plan.sigma[static_cast<size_t>(i)])] = true;

    plan.lambda_prime.assign(static_cast<size_t>(T), {});
    std::vector<int> interpolated;
    for (int i : plan.S) {
        const Track& tr = braid.tracks[static_cast<size_t>(i)];
        auto& lp = plan.lambda_prime[static_cast<size_t>(i)];
        lp = tr.values;
        if (inSigmaS[static_cast<size_t>(i)]) continue;
        int src = -1;
        for (int j : plan.S)
            if (plan.sigma_prime[static_cast<size_t>(j)] == i) src = j;
        cplx s = tr.at(a), e = braid.tracks[static_cast<size_t>(src)].at(0);
        for (int g = a + 1; g < G; ++g) lp[static_cast<size_t>(g)] = log_polar(s, e, static_cast<double>(g - a) / (G - a));
        lp[static_cast<size_t>(G)] = e;
        interpolated.push_back(i);
    }

    const double sep = 1.0 / (100.0 * plan.n);
    const double budget = 1.0 / (10.0 * plan.n);
    auto min_gap = [&](int i, const std::vector<cplx>& cand) {
        double m = 1e300;
        for (int g = a + 1; g < G; ++g)
            for (int j : plan.S) {
                if (j == i) continue;
                bool later_interp = std::find(interpolated.begin(), interpolated.end(), j) != interpolated.end() && j > i;
                if (later_interp) continue;
                m = std::min(m, std::abs(cand[static_cast<size_t>(g)] - plan.lambda_prime[static_cast<size_t>(j)][static_cast<size_t>(g)]));
            }
        return m;
    };
    for (int i : interpolated) {
        auto& lp = plan.lambda_prime[static_cast<size_t>(i)];
        if (min_gap(i, lp) >= sep) continue;
        double top = 0.0;
        for (int g = a + 1; g < G; ++g) top = std::max(top, std::abs(lp[static_cast<size_t>(g)]));
        bool fixed = false;
        for (double shift = sep / 8; shift <= budget * (1 + 1e-12); shift *= 2) {
            double eps = shift / top;
            std::vector<cplx> cand = lp;
            for (int g = a + 1; g < G; ++g)
                cand[static_cast<size_t>(g)] *= 1.0 - eps * std::sin(kPi * (g - a) / static_cast<double>(G - a));
            if (min_gap(i, cand) >= sep) {
                lp = std::move(cand);
                plan.perturbation = std::max(plan.perturbation, shift);
                fixed = true;
                break;
            }
        }
        if (!fixed) throw Error(ErrorKind::CannotSeparate, "cannot separate interpolated track " + std::to_string(i), i);
    }

    for (int g = 0; g <= G; ++g)
        for (size_t x = 0; x < plan.S.size(); ++x) {
            cplx vx = plan.lambda_prime[static_cast<size_t>(plan.S[x])][static_cast<size_t>(g)];
            if (std::abs(vx) == 0.0) throw Error(ErrorKind::CannotSeparate, "λ' vanishes", g);
            for (size_t y = x + 1; y < plan.S.size(); ++y)
                if (vx == plan.lambda_prime[static_cast<size_t>(plan.S[y])][static_cast<size_t>(g)])
                    throw Error(ErrorKind::CannotSeparate, "λ' values coincide", g);
        }
    return plan;
}

PartialIsometryPath build_isometry_path(const ApproximationPlan& plan, int G, int dim) {
    PartialIsometryPath v;
    v.rank = plan.s_n;
    Mat ph = Mat::Zero(dim, dim);
    for (int i : plan.H) ph(i, i) = 1.0;
    v.samples.reserve(static_cast<size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) {
        Mat m = ph;
        if (g > plan.alpha_index) {
            double th = 0.5 * kPi * (g - plan.alpha_index) / static_cast<double>(G - plan.alpha_index);
            for (auto [from, to] : plan.moved) {
                m(from, from) = std::cos(th);
                m(to, from) = std::sin(th);
            }
        }
        v.samples.push_back(std::move(m));
    }
    return v;
}

Approximant assemble_An(const OperatorPath& path, const FramedBraid& framed, const ApproximationPlan& plan) {
    Diagonalization d = diagonalize_path(framed, path);
    PartialIsometryPath v1 = build_isometry_path(plan, path.grid_size, path.dim());
    return assemble_An(path, d.u, plan, v1);
}

Approximant assemble_An(const OperatorPath& path, const std::vector<Mat>& u, const ApproximationPlan& plan,
                        const PartialIsometryPath& v1) {
    const int G = path.grid_size;
    const int dim = path.dim();
    std::vector<Mat> mats;
    mats.reserve(static_cast<size_t>(G) + 1);
    AnReport rep;
    rep.bound = 4.0 / plan.n + path.tail_bound;
    for (int g = 0; g <= G; ++g) {
        Mat lam = Mat::Zero(dim, dim);
        for (int i : plan.S) lam(i, i) = plan.lambda_prime[static_cast<size_t>(i)][static_cast<size_t>(g)];
        const Mat& U = u[static_cast<size_t>(g)];
        const Mat& V = v1.samples[static_cast<size_t>(g)];
        Mat an = U * V * lam * V.adjoint() * U.adjoint();
        rep.max_deviation = std::max(rep.max_deviation, op_norm(an - path.at(g)));

        Eigen::ComplexSchur<Mat> schur(an, false);
        Vec ev = schur.matrixT().diagonal();
        std::vector<cplx> want;
        for (int i : plan.S) want.push_back(plan.lambda_prime[static_cast<size_t>(i)][static_cast<size_t>(g)]);
        std::vector<bool> used(want.size(), false);
        int found = 0;
        for (Eigen::Index k = 0; k < ev.size(); ++k) {
            if (std::abs(ev(k)) <= 1e-12) continue;
            ++found;
            double best = 1e300;
            size_t bi = 0;
            for (size_t w = 0; w < want.size(); ++w)
                if (!used[w] && std::abs(ev(k) - want[w]) < best) {
                    best = std::abs(ev(k) - want[w]);
                    bi = w;
                }
            if (best < 1e300) used[bi] = true;
            rep.spectrum_error = std::max(rep.spectrum_error, best);
        }
        if (found != static_cast<int>(want.size())) rep.spectrum_error = std::max(rep.spectrum_error, 1.0);
        mats.push_back(std::move(an));
    }
    rep.closure = op_norm(mats.front() - mats.back());
    const double close_tol = tol_rel() * std::max(1.0, std::pow(op_norm(mats.front()), 2));
    if (rep.closure > close_tol)
        throw Error(ErrorKind::BoundViolated, "approximant does not close: " + std::to_string(rep.closure), std::nullopt, rep.closure);
    if (rep.max_deviation >= rep.bound)
        throw Error(ErrorKind::BoundViolated, "approximant deviation " + std::to_string(rep.max_deviation) + " exceeds 4/n + tail",
                    std::nullopt, rep.max_deviation);
    Approximant out;
    out.path = make_path(std::move(mats), false, 0.0);
    out.path.is_loop = true;
    out.report = rep;
    return out;
}

} // namespace sloop
