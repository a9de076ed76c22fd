#include "spectral_loop/equivalence.hpp"
#include "spectral_loop/errors.hpp"
#include "spectral_loop/examples.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace sloop;
using testing::diag;

namespace {

struct Pair {
    OperatorPath a, b;
    Mat v;
};

const Pair& conjugated_shift_loop() {
    static const Pair p = [] {
        Pair x;
        x.a = evaluate_generator(example_shift_loop(4), 512);
        std::mt19937_64 rng(2024);
        x.v = testing::random_unitary(rng, x.a.dim());
        x.b = testing::conjugate_path(x.a, x.v);
        return x;
    }();
    return p;
}

const PipelineResult& pipeline(int n) {
    static const PipelineResult r3 = run_equivalence(conjugated_shift_loop().a, conjugated_shift_loop().b, 3, 1e-3);
    static const PipelineResult r6 = run_equivalence(conjugated_shift_loop().a, conjugated_shift_loop().b, 6, 1e-3);
    return n == 3 ? r3 : r6;
}

std::vector<std::vector<cplx>> plan_labels(const ApproximationPlan& plan) {
    std::vector<std::vector<cplx>> out(static_cast<size_t>(plan.grid_size) + 1);
    for (int g = 0; g <= plan.grid_size; ++g)
        for (int t : plan.S) out[static_cast<size_t>(g)].push_back(plan.lambda_prime[static_cast<size_t>(t)][static_cast<size_t>(g)]);
    return out;
}

} // namespace

TEST_CASE("block dilation examples") {
    Mat z = Mat::Zero(1, 1);
    Mat d = block_dilation(z);
    Mat want(2, 2);
    want << 0, 1, -1, 0;
    CHECK((d - want).norm() < 1e-15);

    std::mt19937_64 rng(51);
    Mat u = testing::random_unitary(rng, 3);
    Mat du = block_dilation(u);
    CHECK((du.topLeftCorner(3, 3) - u).norm() < 1e-12);
    CHECK((du.bottomRightCorner(3, 3) - u.adjoint()).norm() < 1e-12);
    CHECK(du.topRightCorner(3, 3).norm() < 1e-7);
    CHECK(du.bottomLeftCorner(3, 3).norm() < 1e-7);

    Mat h = Mat::Identity(1, 1) * 0.5;
    Mat dh = block_dilation(h);
    Mat wh(2, 2);
    wh << 0.5, std::sqrt(3.0) / 2, -std::sqrt(3.0) / 2, 0.5;
    CHECK((dh - wh).norm() < 1e-15);
    CHECK(unitarity_defect(dh) < 1e-15);

    try {
        block_dilation(Mat::Identity(2, 2) * 2.0);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotAContraction);
    }
}

TEST_CASE("dilations of random contractions are unitary") {
    std::mt19937_64 rng(53);
    for (int k = 0; k < 20; ++k) {
        Mat c = testing::random_gaussian(rng, 4, 4);
        c /= 1.01 * op_norm(c);
        CHECK(unitarity_defect(block_dilation(c)) < 1e-9);
    }
}

TEST_CASE("build_phi on identical and conjugated approximants") {
    const auto& r = pipeline(3);
    auto same = build_phi(r.an, r.an, plan_labels(r.plan), 1e-6);
    for (const auto& t : same.triples)
        for (int i = 0; i < t.n(); ++i) {
            CHECK(rank1_distance(t.p[static_cast<size_t>(i)], t.q[static_cast<size_t>(i)]) < 1e-12);
            CHECK(t.sigma[static_cast<size_t>(i)] == i);
        }
    for (size_t g = 0; g < same.distances.size(); ++g) {
        double drift = 0.0;
        for (int i = 0; i < same.triples[g].n(); ++i)
            drift = std::max(drift, rank1_distance(same.triples[g].p[static_cast<size_t>(i)],
                                                   same.triples[g + 1].p[static_cast<size_t>(i)]));
        CHECK(same.distances[g] == doctest::Approx(drift).epsilon(1e-12));
    }

    Mat v = conjugated_shift_loop().v;
    std::vector<Mat> conj;
    for (int g = 0; g <= r.an.grid_size; ++g) conj.push_back(v * r.an.at(g) * v.adjoint());
    auto bn = make_path(conj, true, 0.0);
    auto phi = build_phi(r.an, bn, plan_labels(r.plan), 1e-6);
    for (const auto& t : phi.triples)
        for (int i = 0; i < t.n(); ++i) CHECK(rank1_distance(t.q[static_cast<size_t>(i)], v * t.p[static_cast<size_t>(i)]) < 1e-9);
}

TEST_CASE("chart condition on the conjugated pair at G = 512") {
    const auto& r = pipeline(3);
    CHECK(r.max_chart_distance < 0.25);
    CHECK(r.phi.triples.size() == 513);
    CHECK(r.phi.triples[0].n() == 4);
}

TEST_CASE("spectra mismatch") {
    auto a = testing::constant_path(diag({1.0, 0.5}), 8, true);
    auto b = testing::constant_path(diag({1.0, 0.4}), 8, true);
    try {
        build_phi(a, b, 1e-3);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SpectraMismatch);
    }
    try {
        strong_lift_path(a, b, 1e-3);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SpectraMismatch);
    }
    try {
        run_equivalence(a, b, 2, 1e-3);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SpectraMismatch);
    }
}

TEST_CASE("lift of a constant triple path") {
    TriplePath phi;
    ProjectionTriple t;
    t.p = {Vec::Unit(3, 0), Vec::Unit(3, 1)};
    t.q = t.p;
    t.sigma = {0, 1};
    phi.triples.assign(9, t);
    phi.distances.assign(8, 0.0);
    auto lift = lift_loop(phi);
    for (cplx z : lift.closure_phases) CHECK(std::abs(z - 1.0) < 1e-15);
    for (const auto& w : lift.w) CHECK((w - diag({1.0, 1.0, 0.0})).norm() < 1e-15);
}

TEST_CASE("a full phase turn on one line needs no correction") {
    const int G = 32;
    TriplePath phi;
    for (int g = 0; g <= G; ++g) {
        ProjectionTriple t;
        t.p = {std::polar(1.0, 2 * std::numbers::pi * g / G) * Vec::Unit(2, 0), Vec::Unit(2, 1)};
        t.q = t.p;
        t.sigma = {0, 1};
        phi.triples.push_back(t);
        if (g < G) phi.distances.push_back(0.0);
    }
    auto lift = lift_loop(phi);
    for (cplx z : lift.closure_phases) CHECK(std::abs(z - 1.0) < 1e-12);
    CHECK(lift.closure < 1e-12);
}

TEST_CASE("lifted loop of the conjugated pair") {
    const auto& r = pipeline(3);
    CHECK(r.lift.max_intertwining < 1e-8);
    CHECK(r.lift.max_isometry < 1e-8);
    CHECK(r.lift.closure < 1e-9);
    for (cplx z : r.lift.closure_phases) CHECK(std::abs(std::abs(z) - 1.0) < 1e-9);
}

TEST_CASE("strong lift") {
    const auto& p = conjugated_shift_loop();
    auto same = strong_lift_path(p.a, p.a, 1e-3);
    for (const auto& u : same.u) CHECK(op_norm(u - Mat::Identity(9, 9)) < 1e-12);
    auto s = strong_lift_path(p.a, p.b, 1e-3);
    CHECK(s.max_residual < 1e-8);

    std::mt19937_64 rng(57);
    for (int k = 0; k < 5; ++k) {
        auto a = testing::rotating_diagonal_path(rng, 3 + k, 256);
        auto b = testing::conjugate_path(a, testing::random_unitary(rng, a.dim()));
        auto lift = strong_lift_path(a, b, 1e-3);
        CHECK(lift.max_residual < 1e-8);
        for (int g = 0; g <= 256; g += 32) {
            const Mat& u = lift.u[static_cast<size_t>(g)];
            CHECK(unitarity_defect(u) < 1e-10);
            CHECK(op_norm(u * a.at(g) * u.adjoint() - b.at(g)) < 1e-8);
        }
    }
}

TEST_CASE("truncation of an exact finite-rank case") {
    auto a = testing::constant_path(diag({1.0, 0.5, 0.0, 0.0}), 4, true);
    std::vector<Mat> w(5, diag({1.0, 1.0, 0.0, 0.0}));
    auto c = choose_truncation(w, a, a, 3, 2.0);
    CHECK(c.m == 2);
    for (double m : c.measured) CHECK(m < 1e-12);
    CHECK(c.slack == doctest::Approx(1.0 / 6));
}

TEST_CASE("n too large for the window") {
    const auto& p = conjugated_shift_loop();
    try {
        run_equivalence(p.a, p.b, 40, 1e-3);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoFeasibleM);
    }
}

TEST_CASE("intertwiner for B = A with the identity lift") {
    auto a = make_path(std::vector<Mat>(5, diag({1.0, 0.5, 0.0})), true, 0.01);
    std::vector<Mat> w(5, diag({1.0, 1.0, 0.0}));
    auto res = assemble_intertwiner(w, 2, a, a, 3);
    CHECK(res.report.max_residual <= 2 * a.tail_bound + 1e-10);
    CHECK(res.report.success);
    CHECK(res.path.block_rank == 4);
    for (const auto& u : res.path.samples) CHECK(unitarity_defect(u) < 1e-12);
}

TEST_CASE("end-to-end certificate on the conjugated shift loop") {
    for (int n : {3, 6}) {
        const auto& r = pipeline(n);
        const auto& R = r.result.report;
        const auto& P = r.result.path;
        CHECK(R.success);
        CHECK(R.max_residual < 37.0 / n);
        CHECK(P.max_unitarity < 1e-9);
        CHECK(P.closure < 1e-9);
        CHECK(P.outside_block == 0.0);
        CHECK(R.residuals.size() == 513);
        double mx = 0.0;
        for (double x : R.residuals) mx = std::max(mx, x);
        CHECK(mx == R.max_residual);
        CHECK(R.s_n == r.plan.s_n);
        for (size_t i = 0; i < r.truncation.measured.size(); ++i)
            CHECK(r.truncation.measured[i] < r.truncation.targets[i]);
    }
}

TEST_CASE("fixed gauge phases on W move residuals by at most twice the slack") {
    const auto& r = pipeline(3);
    const auto& p = conjugated_shift_loop();
    auto a = unroll_loop(p.a), b = unroll_loop(p.b);
    auto base = assemble_intertwiner(r.lift.w, r.truncation.m, a, b, 3);
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> U(0.0, 2 * std::numbers::pi);
    std::vector<cplx> z;
    for (int k = 0; k < r.phi.triples[0].n(); ++k) z.push_back(std::polar(1.0, U(rng)));
    std::vector<Mat> w2;
    for (size_t g = 0; g < r.lift.w.size(); ++g) w2.push_back(apply_gauge(r.lift.w[g], GaugePhases{z}, r.phi.triples[g]));
    auto moved = assemble_intertwiner(w2, r.truncation.m, a, b, 3);
    for (size_t g = 0; g < base.report.residuals.size(); ++g)
        CHECK(std::abs(moved.report.residuals[g] - base.report.residuals[g]) <= 2 * r.truncation.slack);
}

TEST_CASE("build_phi with traced labels") {
    auto a = testing::constant_path(diag({1.0, cplx(0, 0.5), 0.0}), 8, true);
    auto phi = build_phi(a, a, 1e-3);
    REQUIRE(phi.triples.size() == 9);
    CHECK(phi.triples[0].n() == 2);
    for (double d : phi.distances) CHECK(d == 0.0);
}
