#include "spectral_loop/operator_model.hpp"

#include "spectral_loop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sloop {

double OperatorPath::max_norm() const {
    double n = 0.0;
    for (const auto& s : samples) n = std::max(n, op_norm(s.matrix));
    return n;
}

Mat Segment::block(double x, int dim) const {
    Mat t = Mat::Identity(dim, dim);
    if (x > b) return t;
    double xe = std::max(x, a);
    if (kind == Kind::Rotation) {
        cplx th = angle.eval(xe);
        cplx c = std::cos(th), s = std::sin(th);
        t(i, i) = c;
        t(i, j) = s;
        t(j, i) = -s;
        t(j, j) = c;
    } else {
        t(i, i) = scale_i.eval(xe);
        t(j, j) = scale_j.eval(xe);
    }
    return t;
}

Mat GeneratorSpec::evaluate(double x) const {
    Mat m = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) m(k, k) = initial_diagonal[static_cast<size_t>(k)].eval(x);
    for (const auto& seg : segments) {
        if (x > seg.b) continue;
        Mat t = seg.block(x, dim);
        m = t * m * t.adjoint();
    }
    return m;
}

OperatorSample validate_sample(const Mat& m, double tol) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::SizeMismatch, "sample is not square");
    if (!all_finite(m)) throw Error(ErrorKind::NotNormal, "sample has non-finite entries");
    double r = normality_residual(m);
    if (r > tol)
        throw Error(ErrorKind::NotNormal, "normality residual " + std::to_string(r) + " exceeds tolerance", std::nullopt, r);
    return {m, r};
}

OperatorSample validate_sample(const Mat& m) { return validate_sample(m, normality_tol(m)); }

OperatorPath make_path(std::vector<Mat> mats, bool want_loop, double tail_bound) {
    if (mats.size() < 2) throw Error(ErrorKind::Usage, "a path needs at least two samples");
    OperatorPath p;
    p.grid_size = static_cast<int>(mats.size()) - 1;
    p.tail_bound = tail_bound;
    p.samples.resize(mats.size());
    const auto dim = mats[0].rows();
    for (size_t g = 0; g < mats.size(); ++g) {
        if (mats[g].rows() != dim || mats[g].cols() != dim)
            throw Error(ErrorKind::SizeMismatch, "samples differ in dimension", static_cast<long>(g));
        try {
            p.samples[g] = validate_sample(mats[g]);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " at grid index " + std::to_string(g), static_cast<long>(g), e.value());
        }
    }
    p.gaps.resize(static_cast<size_t>(p.grid_size));
    for (int g = 0; g < p.grid_size; ++g) p.gaps[static_cast<size_t>(g)] = op_norm(p.at(g + 1) - p.at(g));
    const Mat& m0 = p.at(0);
    double closure = op_norm(m0 - p.at(p.grid_size));
    double tol = std::max(normality_tol(m0), tol_rel());
    if (want_loop && closure > tol)
        throw Error(ErrorKind::NotALoop, "endpoints differ by " + std::to_string(closure), std::nullopt, closure);
    p.is_loop = want_loop || closure <= tol;
    return p;
}

Truncation truncate_path(const OperatorPath& path, int m) {
    int dim = path.dim();
    if (m < 1 || m > dim) throw Error(ErrorKind::Usage, "truncation rank out of range");
    Truncation t{path, 0.0};
    if (m == dim) return t;
    for (auto& s : t.path.samples) {
        Mat c = Mat::Zero(dim, dim);
        c.topLeftCorner(m, m) = s.matrix.topLeftCorner(m, m);
        t.increment = std::max(t.increment, op_norm(c - s.matrix));
        s.matrix = c;
        s.normality_residual = normality_residual(c);
    }
    for (int g = 0; g < t.path.grid_size; ++g)
        t.path.gaps[static_cast<size_t>(g)] = op_norm(t.path.at(g + 1) - t.path.at(g));
    t.path.tail_bound = path.tail_bound + t.increment;
    return t;
}

OperatorPath evaluate_generator(const GeneratorSpec& spec, int G) {
    if (G < 2) throw Error(ErrorKind::Usage, "grid size must be at least 2");
    if (spec.dim < 1 || static_cast<int>(spec.initial_diagonal.size()) != spec.dim)
        throw Error(ErrorKind::Parse, "generator: initial_diagonal length must equal dim");
    for (size_t k = 0; k < spec.segments.size(); ++k) {
        const auto& seg = spec.segments[k];
        if (seg.i < 0 || seg.j < 0 || seg.i >= spec.dim || seg.j >= spec.dim || seg.i == seg.j)
            throw Error(ErrorKind::Parse, "generator: segment " + std::to_string(k) + " has bad indices");
        if (!(0.0 <= seg.a && seg.a <= seg.b && seg.b <= 1.0))
            throw Error(ErrorKind::Parse, "generator: segment " + std::to_string(k) + " support outside [0,1]");
        if (seg.b < 1.0) {
            Mat t = seg.block(seg.b, spec.dim);
            double d = op_norm(t - Mat::Identity(spec.dim, spec.dim));
            if (d > tol_rel())
                throw Error(ErrorKind::DiscontinuousSegment,
                            "generator: segment " + std::to_string(k) + " differs from identity by " + std::to_string(d) +
                                " at its right support endpoint",
                            static_cast<long>(k), d);
        }
    }
    std::vector<Mat> mats(static_cast<size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) mats[static_cast<size_t>(g)] = spec.evaluate(static_cast<double>(g) / G);
    return make_path(std::move(mats), false, spec.tail_bound);
}

TailIndex tail_index(const OperatorPath& path, double eps) {
    int dim = path.dim();
    for (int m = 1; m <= dim; ++m) {
        double worst = 0.0;
        for (const auto& s : path.samples) {
            Mat c = Mat::Zero(dim, dim);
            c.topLeftCorner(m, m) = s.matrix.topLeftCorner(m, m);
            worst = std::max(worst, op_norm(c - s.matrix));
        }
        if (worst + path.tail_bound < eps) return {m, false};
    }
    return {dim, true};
}

OperatorPath unroll_loop(const OperatorPath& loop) {
    if (!loop.is_loop) throw Error(ErrorKind::NotALoop, "path is not a loop");
    OperatorPath p = loop;
    p.is_loop = false;
    return p;
}

} // namespace sloop
