#include "spectral_loop/examples.hpp"

#include <cmath>
#include <string>

namespace sloop {

namespace {

std::string pow2(int e) { return std::to_string(1L << e); }

std::string shift_loop_text(int k, int n) {
    if (n == k) return "exp(i*pi*x)/" + pow2(k);
    if (n >= 0) return "-x/" + pow2(n + 1) + " + 1/" + pow2(n);
    if (n == -1) return "((3/2*x - 1/2) + i*0.125*sin(pi*x))*exp(2*pi*i*x)";
    return "-x/" + pow2(-n) + " - 1/" + pow2(-n);
}

} // namespace

GeneratorSpec example_shift_loop(int k) {
    GeneratorSpec spec;
    spec.dim = 2 * k + 1;
    spec.tail_bound = 1.0 / std::ldexp(1.0, k);
    for (int r = 0; r < spec.dim; ++r) spec.initial_diagonal.push_back(Expr::parse(shift_loop_text(k, shift_loop_label(k, r))));
    for (int r = 0; r + 1 < spec.dim; ++r) {
        Segment s;
        s.kind = Segment::Kind::Rotation;
        s.i = r;
        s.j = r + 1;
        s.angle = Expr::parse("pi*x/2");
        s.a = 0.0;
        s.b = 1.0;
        spec.segments.push_back(s);
    }
    return spec;
}

cplx shift_loop_eigenvalue(int k, int n, double x) { return Expr::parse(shift_loop_text(k, n)).eval(x); }

GeneratorSpec example_halving_cascade(int k, bool repair) {
    GeneratorSpec spec;
    spec.dim = k + 2;
    spec.tail_bound = 1.0 / std::ldexp(1.0, spec.dim);
    // Repaired: the leading entry turns to -1 on [3/4, 1], clearing the
    // positive axis for the levels it descends through.
    spec.initial_diagonal.push_back(repair ? Expr::parse("exp(i*pi*(1 - ((4*x - 3) + abs(4*x - 3))/2))") : Expr::parse("1"));
    for (int j = 1; j < spec.dim; ++j) spec.initial_diagonal.push_back(Expr::parse("1/" + pow2(j)));

    for (int n = 0; n < k; ++n) {
        Segment rot;
        rot.kind = Segment::Kind::Rotation;
        rot.i = n;
        rot.j = n + 1;
        rot.angle = Expr::parse(pow2(n + 1) + "*pi*(1/" + pow2(n) + " - x)");
        rot.a = 3.0 / std::ldexp(1.0, n + 2);
        rot.b = 1.0 / std::ldexp(1.0, n);
        spec.segments.push_back(rot);

        Segment dia;
        dia.kind = Segment::Kind::Diagonal;
        dia.i = n;
        dia.j = n + 1;
        const std::string u = "(3 - " + pow2(n + 2) + "*x)";
        if (repair) {
            // 0.3465... = ln(2)/2: the first entry is 2^{h(u)/2}, h(u) = 0.7u + 0.3u^2
            dia.scale_i = Expr::parse("exp(0.34657359027997264*(0.7*" + u + " + 0.3*" + u + "^2))*exp(2*pi*i*" + u + ")");
            dia.scale_j = Expr::parse("sqrt(" + pow2(n + 1) + "*x - 1/2)*exp(-2*pi*i*" + u + ")");
        } else {
            const std::string w = "(4 - " + pow2(n + 2) + "*x)";
            dia.scale_i = Expr::parse("1/sqrt(2)*" + w + "*exp(2*pi*i*" + u + ")");
            dia.scale_j = Expr::parse("sqrt(2)/" + w + "*exp(-2*pi*i*" + u + ")");
        }
        dia.a = 1.0 / std::ldexp(1.0, n + 1);
        dia.b = 3.0 / std::ldexp(1.0, n + 2);
        spec.segments.push_back(dia);
    }

    Segment collapse;
    collapse.kind = Segment::Kind::Diagonal;
    collapse.i = k;
    collapse.j = k + 1;
    collapse.scale_i = Expr::parse("sqrt(" + pow2(k) + "*x)");
    collapse.scale_j = Expr::parse("1");
    collapse.a = 0.0;
    collapse.b = 1.0 / std::ldexp(1.0, k);
    spec.segments.push_back(collapse);
    return spec;
}

} // namespace sloop
