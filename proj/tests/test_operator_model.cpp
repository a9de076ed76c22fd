#include "spectral_loop/errors.hpp"
#include "spectral_loop/examples.hpp"
#include "spectral_loop/operator_model.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace sloop;
using testing::diag;

TEST_CASE("validate_sample") {
    CHECK(validate_sample(diag({1.0, cplx(0, 1)})).normality_residual == 0.0);

    Mat n(2, 2);
    n << 0, 1, 0, 0;
    try {
        validate_sample(n);
        FAIL("nilpotent accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotNormal);
        CHECK(e.value().value() == doctest::Approx(1.0).epsilon(1e-12));
    }

    std::mt19937_64 rng(3);
    Mat h = testing::random_gaussian(rng, 5, 5);
    h = h + h.adjoint().eval();
    CHECK(validate_sample(h).normality_residual < 1e-12);
}

TEST_CASE("accepted samples satisfy the normality bound") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        Mat m = testing::normal_with_spectrum(rng, testing::separated_spectrum(rng, 6, 0.05));
        auto s = validate_sample(m);
        CHECK(s.normality_residual <= tol_rel() * std::pow(op_norm(m), 2));
    }
}

TEST_CASE("truncate_path") {
    auto p = testing::constant_path(diag({1.0, 0.5, 0.25}), 4, true);
    auto t = truncate_path(p, 2);
    CHECK(t.increment == doctest::Approx(0.25));
    CHECK((t.path.at(3) - diag({1.0, 0.5, 0.0})).norm() == 0.0);
    CHECK(t.path.tail_bound == doctest::Approx(0.25));

    auto same = truncate_path(p, 3);
    CHECK(same.increment == 0.0);
    CHECK((same.path.at(0) - p.at(0)).norm() == 0.0);

    auto zero = truncate_path(testing::constant_path(Mat::Zero(3, 3), 2, true), 1);
    CHECK(zero.increment == 0.0);

    auto twice = truncate_path(t.path, 2);
    for (int g = 0; g <= 4; ++g) CHECK((twice.path.at(g) - t.path.at(g)).norm() == 0.0);
}

TEST_CASE("tail_index") {
    auto p = testing::constant_path(diag({1.0, 0.5, 0.25, 0.125}), 2, true);
    CHECK(tail_index(p, 0.3).m == 2);
    CHECK_FALSE(tail_index(p, 0.3).insufficient);

    auto z = testing::constant_path(Mat::Zero(3, 3), 2, true);
    CHECK(tail_index(z, 0.1).m == 1);

    auto tailed = make_path(std::vector<Mat>(3, diag({1.0, 0.5})), true, 0.2);
    auto ti = tail_index(tailed, 0.1);
    CHECK(ti.m == 2);
    CHECK(ti.insufficient);

    int prev = 1 << 30;
    for (double eps : {0.01, 0.1, 0.2, 0.3, 0.6, 1.1}) {
        int m = tail_index(p, eps).m;
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("make_path and loops") {
    std::vector<Mat> mats = {diag({1.0, 0.5}), diag({0.9, 0.5}), diag({1.0, 0.5})};
    auto p = make_path(mats, true, 0.0);
    CHECK(p.is_loop);
    CHECK(p.gaps[0] == doctest::Approx(0.1));
    mats.back() = diag({0.8, 0.5});
    CHECK_THROWS_AS(make_path(mats, true, 0.0), Error);
    auto open = make_path(mats, false, 0.0);
    CHECK_FALSE(open.is_loop);

    auto u = unroll_loop(p);
    CHECK_FALSE(u.is_loop);
    CHECK((u.at(0) - u.at(2)).norm() == 0.0);
    CHECK_THROWS_AS(unroll_loop(open), Error);
}

TEST_CASE("shift-loop window generator") {
    auto spec = example_shift_loop(4);
    auto p = evaluate_generator(spec, 256);
    CHECK(p.dim() == 9);
    CHECK(p.is_loop);
    CHECK(p.tail_bound == doctest::Approx(1.0 / 16));
    // at x = 0 the rotations are trivial, so the spectrum is the diagonal
    for (int r = 0; r < 9; ++r) {
        int n = shift_loop_label(4, r);
        cplx want;
        if (n == 4) want = 1.0 / 16;
        else if (n >= 0) want = std::ldexp(1.0, -n);
        else if (n == -1) want = -0.5;
        else want = -std::ldexp(1.0, n);
        CHECK(std::abs(p.at(0)(r, r) - want) < 1e-15);
        CHECK(std::abs(shift_loop_eigenvalue(4, n, 0.0) - want) < 1e-15);
    }
}

TEST_CASE("grid refinement agrees on shared nodes") {
    auto spec = example_shift_loop(3);
    auto a = evaluate_generator(spec, 64);
    auto b = evaluate_generator(spec, 128);
    for (int g = 0; g <= 64; ++g) CHECK((a.at(g) - b.at(2 * g)).norm() == 0.0);
}

TEST_CASE("constant generator is a loop") {
    GeneratorSpec spec;
    spec.dim = 2;
    spec.initial_diagonal = {Expr::parse("1"), Expr::parse("i/2")};
    auto p = evaluate_generator(spec, 8);
    CHECK(p.is_loop);
    for (int g = 0; g <= 8; ++g) CHECK((p.at(g) - p.at(0)).norm() == 0.0);
}

TEST_CASE("halving cascade: printed rescaling is discontinuous, repaired one is not") {
    try {
        evaluate_generator(example_halving_cascade(6, false), 256);
        FAIL("unrepaired cascade accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DiscontinuousSegment);
        CHECK(e.value().value() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-9));
    }
    auto p = evaluate_generator(example_halving_cascade(6, true), 1024);
    CHECK(p.dim() == 8);
    CHECK_FALSE(p.is_loop);
}
