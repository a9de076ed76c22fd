#include "spectral_loop/equivalence.hpp"

#include "spectral_loop/errors.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace sloop {

namespace {

constexpr double kLiftTol = 1e-8;

struct Lines {
    std::vector<cplx> values;
    std::vector<Vec> vectors;
};

Lines retained_lines(const Mat& m, double threshold) {
    Vec vals;
    Mat vecs;
    normal_eigen(m, vals, vecs);
    Lines out;
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
        if (std::abs(vals(k)) <= threshold) continue;
        out.values.push_back(vals(k));
        out.vectors.push_back(vecs.col(k).normalized());
    }
    return out;
}

// Pick for each label the unused line with the nearest eigenvalue.
std::vector<Vec> match_labels(const Lines& lines, const std::vector<cplx>& labels, double tol, int g, const char* which) {
    std::vector<bool> used(lines.values.size(), false);
    std::vector<Vec> out;
    for (cplx lab : labels) {
        double best = 1e300;
        size_t bi = 0;
        for (size_t k = 0; k < lines.values.size(); ++k)
            if (!used[k] && std::abs(lines.values[k] - lab) < best) {
                best = std::abs(lines.values[k] - lab);
                bi = k;
            }
        if (best > tol)
            throw Error(ErrorKind::SpectraMismatch,
                        std::string(which) + " has no eigenvalue at label (" + std::to_string(lab.real()) + ", " +
                            std::to_string(lab.imag()) + ") at grid index " + std::to_string(g),
                        g, best);
        used[bi] = true;
        out.push_back(lines.vectors[bi]);
    }
    return out;
}

double label_tol(const Mat& m) { return 1e-8 * std::max(1.0, op_norm(m)); }

Mat top_block(const Mat& w, int m) { return w.topLeftCorner(m, m); }

Mat pad(const Mat& a, int dim) {
    if (a.rows() == dim) return a;
    Mat out = Mat::Zero(dim, dim);
    out.topLeftCorner(a.rows(), a.cols()) = a;
    return out;
}

} // namespace

EigenBraid align_braid(const EigenBraid& ref, const EigenBraid& other, double tol) {
    if (ref.grid_size != other.grid_size)
        throw Error(ErrorKind::SizeMismatch, "braids sampled on different grids");
    if (ref.tracks.size() != other.tracks.size())
        throw Error(ErrorKind::SpectraMismatch, "braids carry " + std::to_string(ref.tracks.size()) + " and " +
                                                    std::to_string(other.tracks.size()) + " tracks");
    EigenBraid out = other;
    out.monodromy.clear();
    std::vector<bool> used(other.tracks.size(), false);
    for (size_t t = 0; t < ref.tracks.size(); ++t) {
        const Track& a = ref.tracks[t];
        int found = -1;
        double worst_best = 1e300;
        for (size_t o = 0; o < other.tracks.size(); ++o) {
            const Track& b = other.tracks[o];
            if (used[o] || b.birth != a.birth || b.last() != a.last()) continue;
            double worst = 0.0;
            for (int g = a.birth; g <= a.last(); ++g) worst = std::max(worst, std::abs(a.at(g) - b.at(g)));
            worst_best = std::min(worst_best, worst);
            if (worst <= tol) {
                found = static_cast<int>(o);
                break;
            }
        }
        if (found < 0)
            throw Error(ErrorKind::SpectraMismatch, "no track of the second braid follows track " + std::to_string(t),
                        static_cast<long>(t), worst_best < 1e300 ? worst_best : -1.0);
        used[static_cast<size_t>(found)] = true;
        out.tracks[t] = other.tracks[static_cast<size_t>(found)];
    }
    return out;
}

TriplePath build_phi(const OperatorPath& an, const OperatorPath& bn, const std::vector<std::vector<cplx>>& labels,
                     double threshold) {
    const int G = an.grid_size;
    if (bn.grid_size != G || an.dim() != bn.dim())
        throw Error(ErrorKind::SizeMismatch, "approximants sampled on different grids or dimensions");
    if (static_cast<int>(labels.size()) != G + 1) throw Error(ErrorKind::SizeMismatch, "one label list per grid point");
    TriplePath phi;
    phi.triples.reserve(labels.size());
    for (int g = 0; g <= G; ++g) {
        const auto& lab = labels[static_cast<size_t>(g)];
        Lines la = retained_lines(an.at(g), threshold);
        Lines lb = retained_lines(bn.at(g), threshold);
        if (la.values.size() != lab.size() || lb.values.size() != lab.size())
            throw Error(ErrorKind::SpectraMismatch,
                        "retained counts " + std::to_string(la.values.size()) + " and " +
                            std::to_string(lb.values.size()) + " differ from s_n = " + std::to_string(lab.size()) +
                            " at grid index " + std::to_string(g),
                        g);
        ProjectionTriple t;
        t.p = match_labels(la, lab, label_tol(an.at(g)), g, "first approximant");
        t.q = match_labels(lb, lab, label_tol(bn.at(g)), g, "second approximant");
        t.sigma.resize(lab.size());
        for (size_t i = 0; i < lab.size(); ++i) t.sigma[i] = static_cast<int>(i);
        t.labels = lab;
        phi.triples.push_back(std::move(t));
    }
    for (int g = 0; g < G; ++g) {
        BottleneckMatch bm = bottleneck_distance(phi.triples[static_cast<size_t>(g)], phi.triples[static_cast<size_t>(g) + 1]);
        bool identity = true;
        for (size_t i = 0; i < bm.tau.size(); ++i) identity = identity && bm.tau[i] == static_cast<int>(i);
        if (bm.value >= 0.25 || !identity)
            throw Error(ErrorKind::ChartTooCoarse,
                        "consecutive triples at grid index " + std::to_string(g) + " are " + std::to_string(bm.value) +
                            " apart" + (identity ? "" : " and the nearest matching permutes labels"),
                        g, bm.value);
        phi.distances.push_back(bm.value);
    }
    return phi;
}

TriplePath build_phi(const OperatorPath& an, const OperatorPath& bn, double threshold) {
    EigenBraid br = trace_braid(an, threshold);
    auto full = br.full_tracks();
    if (full.size() != br.tracks.size())
        throw Error(ErrorKind::Condition1Missing, "first approximant has tracks that do not span the grid");
    std::vector<std::vector<cplx>> labels(static_cast<size_t>(an.grid_size) + 1);
    for (int g = 0; g <= an.grid_size; ++g)
        for (int t : full) labels[static_cast<size_t>(g)].push_back(br.tracks[static_cast<size_t>(t)].at(g));
    return build_phi(an, bn, labels, threshold);
}

LoopLift lift_loop(const TriplePath& phi) {
    const auto& T = phi.triples;
    if (T.empty()) throw Error(ErrorKind::PreconditionViolated, "lift_loop: empty triple path");
    for (double d : phi.distances)
        if (d >= 0.25) throw Error(ErrorKind::ChartTooCoarse, "lift_loop: chart condition fails", std::nullopt, d);
    const int G = static_cast<int>(T.size()) - 1;
    const int s = T[0].n();
    const auto dim = s ? T[0].p[0].size() : 0;

    // a[k], b[k]: phase-transported representatives of p_k and q_{sigma(k)}
    std::vector<std::vector<Vec>> a(static_cast<size_t>(s)), b(static_cast<size_t>(s));
    for (int k = 0; k < s; ++k) {
        a[static_cast<size_t>(k)].push_back(T[0].p[static_cast<size_t>(k)]);
        b[static_cast<size_t>(k)].push_back(T[0].partner(k));
    }
    for (int g = 0; g < G; ++g) {
        const auto& next = T[static_cast<size_t>(g) + 1];
        for (int k = 0; k < s; ++k) {
            for (auto* side : {&a, &b}) {
                const Vec& cur = (*side)[static_cast<size_t>(k)].back();
                const Vec& line = side == &a ? next.p[static_cast<size_t>(k)] : next.partner(k);
                Vec moved = transport_projection(cur, line, cur);
                double nrm = moved.norm();
                if (nrm < 0.5)
                    throw Error(ErrorKind::TransportBreakdown,
                                "line " + std::to_string(k) + " turns too far at grid index " + std::to_string(g + 1),
                                g + 1, nrm);
                (*side)[static_cast<size_t>(k)].push_back(moved / nrm);
            }
        }
    }

    // closure: line k at G sits on some line j at 0; the defect there is a phase
    LoopLift out;
    out.closure_phases.resize(static_cast<size_t>(s));
    std::vector<double> theta(static_cast<size_t>(s), 0.0);
    std::vector<bool> hit(static_cast<size_t>(s), false);
    for (int k = 0; k < s; ++k) {
        const Vec& ak = a[static_cast<size_t>(k)].back();
        const Vec& bk = b[static_cast<size_t>(k)].back();
        int j = 0;
        double best = -1.0;
        for (int c = 0; c < s; ++c) {
            double ov = std::abs(a[static_cast<size_t>(c)].front().dot(ak));
            if (ov > best) {
                best = ov;
                j = c;
            }
        }
        cplx oa = ak.dot(a[static_cast<size_t>(j)].front());
        cplx ob = b[static_cast<size_t>(j)].front().dot(bk);
        cplx zeta = ob * oa;
        if (hit[static_cast<size_t>(j)] || best < 1.0 - 1e-6 || std::abs(ob) < 1.0 - 1e-6 ||
            std::abs(std::abs(zeta) - 1.0) > 1e-6)
            throw Error(ErrorKind::ClosureDefectNotDiagonal,
                        "closure defect of line " + std::to_string(k) + " is not a phase", k, std::abs(zeta));
        hit[static_cast<size_t>(j)] = true;
        out.closure_phases[static_cast<size_t>(k)] = zeta / std::abs(zeta);
        theta[static_cast<size_t>(k)] = std::arg(zeta);
    }

    out.w.reserve(static_cast<size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) {
        Mat w = Mat::Zero(dim, dim);
        Mat P = Mat::Zero(dim, dim), Q = Mat::Zero(dim, dim);
        for (int k = 0; k < s; ++k) {
            const Vec& ak = a[static_cast<size_t>(k)][static_cast<size_t>(g)];
            const Vec& bk = b[static_cast<size_t>(k)][static_cast<size_t>(g)];
            cplx ph = std::polar(1.0, -theta[static_cast<size_t>(k)] * g / G);
            w += ph * bk * ak.adjoint();
            P += ak * ak.adjoint();
            Q += bk * bk.adjoint();
        }
        const auto& t = T[static_cast<size_t>(g)];
        out.max_intertwining = std::max(out.max_intertwining, intertwining_defect(w, t));
        out.max_isometry = std::max({out.max_isometry, op_norm(w.adjoint() * w - P), op_norm(w * w.adjoint() - Q)});
        out.w.push_back(std::move(w));
    }
    out.closure = op_norm(out.w.back() - out.w.front());
    if (out.max_intertwining > kLiftTol || out.max_isometry > kLiftTol)
        throw Error(ErrorKind::NotIntertwining, "lifted loop fails to intertwine the triples", std::nullopt,
                    std::max(out.max_intertwining, out.max_isometry));
    if (out.closure > kLiftTol)
        throw Error(ErrorKind::ClosureDefectNotDiagonal, "lifted loop does not close after phase redistribution",
                    std::nullopt, out.closure);
    return out;
}

StrongLift strong_lift_path(const OperatorPath& a, const OperatorPath& b, double threshold) {
    if (a.dim() != b.dim() || a.grid_size != b.grid_size)
        throw Error(ErrorKind::SizeMismatch, "paths differ in dimension or grid");
    EigenBraid ba = trace_braid(a, threshold);
    if (ba.full_tracks().size() != ba.tracks.size())
        throw Error(ErrorKind::Condition1Missing, "first path has tracks that do not span the window");
    EigenBraid bb = trace_braid(b, threshold);
    double tol = 1e-8 * std::max(1.0, std::max(a.max_norm(), b.max_norm()));
    bb = align_braid(ba, bb, tol);
    Diagonalization da = diagonalize_path(frame_transport(a, ba), a);
    Diagonalization db = diagonalize_path(frame_transport(b, bb), b);
    const auto s = static_cast<Eigen::Index>(ba.tracks.size());
    StrongLift out;
    out.u.reserve(static_cast<size_t>(a.grid_size) + 1);
    for (int g = 0; g <= a.grid_size; ++g) {
        const Mat& ua = da.u[static_cast<size_t>(g)];
        const Mat& ub = db.u[static_cast<size_t>(g)];
        Mat u = ub * ua.adjoint();
        // residual on the retained block of B
        Mat r = u * a.at(g) * u.adjoint() - b.at(g);
        Mat qb = ub.leftCols(s);
        out.max_residual = std::max({out.max_residual, op_norm(r * qb), op_norm(qb.adjoint() * r)});
        out.u.push_back(std::move(u));
    }
    return out;
}

namespace {

std::vector<double> measure_six(const std::vector<Mat>& w, const OperatorPath& an, const OperatorPath& bn, int m,
                                double tail_a, double tail_b) {
    std::vector<double> out(6, 0.0);
    const int dim = an.dim();
    for (size_t g = 0; g < w.size(); ++g) {
        const Mat& A = an.at(static_cast<int>(g));
        const Mat& B = bn.at(static_cast<int>(g));
        Mat up = top_block(w[g], m);
        Mat am = A.topLeftCorner(m, m);
        Mat bm = B.topLeftCorner(m, m);
        Mat pam = pad(am, dim), pbm = pad(bm, dim);
        Mat d = Mat::Identity(m, m) - up.adjoint() * up;
        Mat droot = psd_sqrt(d, 1e-9);
        Mat uu = up.adjoint() * up;
        out[0] = std::max(out[0], op_norm(up * am * up.adjoint() - bm));
        out[1] = std::max(out[1], op_norm(pam - A) + tail_a);
        out[2] = std::max(out[2], op_norm(pbm - B) + tail_b);
        out[3] = std::max(out[3], op_norm(d - droot));
        out[4] = std::max(out[4], op_norm(up * am - up * am * uu));
        out[5] = std::max(out[5], op_norm(am * up.adjoint() - uu * am * up.adjoint()));
    }
    return out;
}

} // namespace

TruncationChoice choose_truncation(const std::vector<Mat>& w, const OperatorPath& an, const OperatorPath& bn, int n,
                                   double norm_sum, double tail_a, double tail_b) {
    if (n < 1) throw Error(ErrorKind::Usage, "n must be positive");
    const int dim = an.dim();
    if (bn.dim() != dim || w.size() != an.samples.size() || w.size() != bn.samples.size())
        throw Error(ErrorKind::SizeMismatch, "choose_truncation: inputs disagree in size");
    std::vector<double> targets(6, 1.0 / n);
    targets[3] = 1.0 / (n * std::max(norm_sum, 1e-300));

    auto check = [&](int m, TruncationChoice& c) {
        c.m = m;
        c.measured = measure_six(w, an, bn, m, tail_a, tail_b);
        c.targets = targets;
        c.slack = 1e300;
        for (int i = 0; i < 6; ++i) c.slack = std::min(c.slack, targets[static_cast<size_t>(i)] - c.measured[static_cast<size_t>(i)]);
        return c.slack > 0.0;
    };

    TruncationChoice best, probe;
    int lo = 0, hi = -1;
    for (int m = 1;; m = std::min(2 * m, dim)) {
        if (check(m, probe)) {
            best = probe;
            hi = m;
            break;
        }
        lo = m;
        if (m == dim) break;
    }
    if (hi < 0)
        throw Error(ErrorKind::NoFeasibleM,
                    "no truncation rank up to " + std::to_string(dim) + " satisfies the inequality suite for n = " +
                        std::to_string(n),
                    dim, -probe.slack);
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        if (check(mid, probe)) {
            best = probe;
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return best;
}

Mat block_dilation(const Mat& u_prime) {
    const auto m = u_prime.rows();
    if (u_prime.cols() != m) throw Error(ErrorKind::SizeMismatch, "block_dilation: matrix not square");
    double nrm = op_norm(u_prime);
    if (nrm > 1.0 + tol_rel()) throw Error(ErrorKind::NotAContraction, "block_dilation: norm exceeds 1", std::nullopt, nrm);
    // both defect roots from one SVD: U' = X S Y*, (I - U'U'*)^{1/2} = X C X*, (I - U'*U')^{1/2} = Y C Y*
    Eigen::JacobiSVD<Mat> svd(u_prime, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // singular values within 1e-9 of 1 are snapped to 1; the square root would otherwise turn
    // rounding noise of size e into a defect of size sqrt(e) and break loop closure
    Eigen::VectorXd sv = svd.singularValues().cwiseMin(1.0);
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > 1.0 - 1e-9) sv(k) = 1.0;
    Eigen::VectorXd c = (1.0 - sv.array().square()).sqrt().matrix();
    const Mat& X = svd.matrixU();
    const Mat& Y = svd.matrixV();
    Mat top = X * sv.cast<cplx>().asDiagonal() * Y.adjoint();
    Mat left = X * c.cast<cplx>().asDiagonal() * X.adjoint();
    Mat right = Y * c.cast<cplx>().asDiagonal() * Y.adjoint();
    Mat out(2 * m, 2 * m);
    out << top, left, -right, top.adjoint();
    double defect = unitarity_defect(out);
    if (defect > 10.0 * std::max(tol_rel(), 1e-9))
        throw Error(ErrorKind::NotAContraction, "block_dilation: result not unitary", std::nullopt, defect);
    return out;
}

Intertwined assemble_intertwiner(const std::vector<Mat>& w, int m, const OperatorPath& a, const OperatorPath& b, int n) {
    const int dim = a.dim();
    if (b.dim() != dim || w.size() != a.samples.size() || w.size() != b.samples.size())
        throw Error(ErrorKind::SizeMismatch, "assemble_intertwiner: inputs disagree in size");
    if (m < 1 || m > dim) throw Error(ErrorKind::Usage, "truncation rank out of range");
    const int full = std::max(dim, 2 * m);
    Intertwined out;
    auto& P = out.path;
    auto& R = out.report;
    P.block_rank = 2 * m;
    P.target = 37.0 / n;
    R.n = n;
    R.m_n = m;
    for (size_t g = 0; g < w.size(); ++g) {
        Mat u = Mat::Identity(full, full);
        u.topLeftCorner(2 * m, 2 * m) = block_dilation(top_block(w[g], m));
        Mat A = pad(a.at(static_cast<int>(g)), full);
        Mat B = pad(b.at(static_cast<int>(g)), full);
        double r = op_norm(u * A * u.adjoint() - B);
        R.residuals.push_back(r);
        R.max_residual = std::max(R.max_residual, r);
        P.max_unitarity = std::max(P.max_unitarity, unitarity_defect(u));
        Mat rest = u - Mat::Identity(full, full);
        rest.topLeftCorner(2 * m, 2 * m).setZero();
        P.outside_block = std::max(P.outside_block, rest.cwiseAbs().maxCoeff());
        P.samples.push_back(std::move(u));
    }
    P.closure = op_norm(P.samples.front() - P.samples.back());
    P.bound_achieved = R.max_residual;
    R.success = R.max_residual < P.target;
    const double tau = std::max(1e-8, 10.0 * tol_rel());
    if (P.max_unitarity > tau)
        throw Error(ErrorKind::NotAContraction, "intertwiner not unitary", std::nullopt, P.max_unitarity);
    if (a.is_loop && P.closure > tau)
        throw Error(ErrorKind::NoCertifiedClosure, "intertwiner loop does not close: " + std::to_string(P.closure), std::nullopt, P.closure);
    return out;
}

PipelineResult run_equivalence(const OperatorPath& a, const OperatorPath& b, int n, double threshold) {
    if (!a.is_loop || !b.is_loop) throw Error(ErrorKind::NotALoop, "equivalence needs two loops");
    if (a.dim() != b.dim() || a.grid_size != b.grid_size)
        throw Error(ErrorKind::SizeMismatch, "loops differ in dimension or grid");
    PipelineResult res;

    EigenBraid ba = trace_braid(a, threshold);
    Condition1Report c1 = check_condition1(ba, a);
    if (!c1.satisfied)
        throw Error(ErrorKind::Condition1Missing, "first loop fails condition (1)", c1.failures.front().grid_index);
    EigenBraid bb = trace_braid(b, threshold);
    const double tol = 1e-8 * std::max(1.0, std::max(a.max_norm(), b.max_norm()));
    bb = align_braid(ba, bb, tol);
    res.monodromy = monodromy(ba);
    if (monodromy(bb) != res.monodromy)
        throw Error(ErrorKind::SpectraMismatch, "loops have different monodromy");

    FramedBraid fa = frame_transport(a, ba);
    FramedBraid fb = frame_transport(b, bb);
    Diagonalization da = diagonalize_path(fa, a);
    Diagonalization db = diagonalize_path(fb, b);

    res.plan = build_lambda_prime(fa.braid, select_plan(fa.braid, n));
    const int G = a.grid_size;
    PartialIsometryPath v1 = build_isometry_path(res.plan, G, a.dim());
    Approximant an = assemble_An(a, da.u, res.plan, v1);
    Approximant bn = assemble_An(b, db.u, res.plan, v1);
    res.an_report = an.report;
    res.bn_report = bn.report;

    std::vector<std::vector<cplx>> labels(static_cast<size_t>(G) + 1);
    double floor = 1e300;
    for (int g = 0; g <= G; ++g)
        for (int t : res.plan.S) {
            cplx l = res.plan.lambda_prime[static_cast<size_t>(t)][static_cast<size_t>(g)];
            labels[static_cast<size_t>(g)].push_back(l);
            floor = std::min(floor, std::abs(l));
        }
    res.phi = build_phi(an.path, bn.path, labels, 0.5 * floor);
    for (double d : res.phi.distances) res.max_chart_distance = std::max(res.max_chart_distance, d);
    res.an = std::move(an.path);
    res.bn = std::move(bn.path);

    res.lift = lift_loop(res.phi);
    res.truncation = choose_truncation(res.lift.w, res.an, res.bn, n, a.max_norm() + b.max_norm(), a.tail_bound,
                                       b.tail_bound);
    res.result = assemble_intertwiner(res.lift.w, res.truncation.m, a, b, n);
    res.result.report.s_n = res.plan.s_n;
    return res;
}

} // namespace sloop
