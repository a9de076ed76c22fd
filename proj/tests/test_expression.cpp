#include "spectral_loop/errors.hpp"
#include "spectral_loop/expression.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sloop;

TEST_CASE("constant expression") {
    Expr e = Expr::parse("1");
    CHECK(e.eval(0.3) == cplx(1.0, 0.0));
}

TEST_CASE("shift-loop eigenvalue closes at 1") {
    Expr e = Expr::parse("(3/2*x - 1/2)*exp(2*pi*i*x)");
    cplx v = e.eval(1.0);
    CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(e.eval(0.0) - cplx(-0.5, 0.0)) < 1e-15);
}

TEST_CASE("pythagorean identity on a grid") {
    Expr e = Expr::parse("cos(pi*x)^2 + sin(pi*x)^2");
    for (int g = 0; g <= 256; ++g) CHECK(std::abs(e.eval(g / 256.0) - 1.0) < 1e-15);
}

TEST_CASE("functions and unary minus") {
    CHECK(std::abs(Expr::parse("sqrt(-4)").eval(0) - cplx(0, 2)) < 1e-15);
    CHECK(std::abs(Expr::parse("abs(3+4*i)").eval(0) - 5.0) < 1e-15);
    CHECK(Expr::parse("re(2-3*i)").eval(0) == cplx(2, 0));
    CHECK(Expr::parse("im(2-3*i)").eval(0) == cplx(-3, 0));
    CHECK(Expr::parse("conj(2-3*i)").eval(0) == cplx(2, 3));
    // unary minus binds to the base, so this is (-x)^2
    CHECK(std::abs(Expr::parse("-x^2").eval(3.0) - cplx(9, 0)) < 1e-15);
    CHECK(std::abs(Expr::parse("-(x^2)").eval(3.0) - cplx(-9, 0)) < 1e-15);
    CHECK(std::abs(Expr::parse("2^-2").eval(0) - 0.25) < 1e-15);
    CHECK(std::abs(Expr::parse("1/2^3").eval(0) - 0.125) < 1e-15);
}

TEST_CASE("syntax errors carry a position") {
    auto pos = [](const char* text) -> long {
        try {
            Expr::parse(text);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Parse);
            return e.index().value_or(-1);
        }
        return -2;
    };
    CHECK(pos("1 + ") == 4);
    CHECK(pos("foo(x)") == 0);
    CHECK(pos("(x") == 2);
    CHECK(pos("x^1.5") >= 2);
    CHECK(pos("x^x") >= 2);
    CHECK(pos("") == 0);
}

TEST_CASE("non-finite evaluation is an expression error") {
    Expr e = Expr::parse("1/x");
    CHECK_THROWS_AS(e.eval(0.0), Error);
    try {
        e.eval(0.0);
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::Expression);
    }
}

TEST_CASE("text round trip reparses to the same tree") {
    for (const char* t : {"exp(i*pi*x)/2^4", "-x/2^4 + 1/2^3", "((3/2*x - 1/2) + i*0.125*sin(pi*x))*exp(2*pi*i*x)"}) {
        Expr a = Expr::parse(t);
        Expr b = Expr::parse(a.text());
        CHECK(a.same_tree(b));
    }
    Expr c = Expr::constant(cplx(0.1, -2.5));
    CHECK(Expr::parse(c.text()).eval(0) == cplx(0.1, -2.5));
}

TEST_CASE("evaluation is pure") {
    Expr e = Expr::parse("exp(2*pi*i*x)*sin(3*x)");
    for (int g = 0; g <= 16; ++g) {
        double x = g / 16.0;
        CHECK(e.eval(x) == e.eval(x));
    }
}
