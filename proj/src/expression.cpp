#include "spectral_loop/expression.hpp"

#include "spectral_loop/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace sloop {

enum class Op { Num, X, Pi, I, Add, Sub, Mul, Div, Pow, Neg, Exp, Cos, Sin, Sqrt, Abs, Re, Im, Conj };

struct Expr::Node {
    Op op = Op::Num;
    double num = 0.0;
    long power = 0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodeP = std::shared_ptr<const Expr::Node>;

NodeP make(Op op, NodeP a = nullptr, NodeP b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodeP make_num(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Num;
    n->num = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodeP parse_all() {
        NodeP e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Parse,
                    "expression: " + msg + " at position " + std::to_string(pos_) + " in \"" + s_ + "\"",
                    static_cast<long>(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodeP expr() {
        NodeP lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, lhs, term());
            else if (accept('-')) lhs = make(Op::Sub, lhs, term());
            else return lhs;
        }
    }

    NodeP term() {
        NodeP lhs = factor();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, lhs, factor());
            else if (accept('/')) lhs = make(Op::Div, lhs, factor());
            else return lhs;
        }
    }

    NodeP factor() {
        NodeP b = base();
        if (!accept('^')) return b;
        skip();
        size_t at = pos_;
        NodeP e = base();
        bool neg = false;
        if (e->op == Op::Neg) {
            neg = true;
            e = e->a;
        }
        if (e->op != Op::Num || e->num != std::floor(e->num) || std::abs(e->num) > 4096) {
            pos_ = at;
            fail("exponent must be an integer literal");
        }
        auto n = std::make_shared<Expr::Node>();
        n->op = Op::Pow;
        n->a = b;
        n->power = static_cast<long>(e->num) * (neg ? -1 : 1);
        return n;
    }

    NodeP base() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            return make(Op::Neg, base());
        }
        if (c == '(') {
            ++pos_;
            NodeP e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            if (id == "x") return make(Op::X);
            if (id == "pi") return make(Op::Pi);
            if (id == "i") return make(Op::I);
            Op fn;
            if (id == "exp") fn = Op::Exp;
            else if (id == "cos") fn = Op::Cos;
            else if (id == "sin") fn = Op::Sin;
            else if (id == "sqrt") fn = Op::Sqrt;
            else if (id == "abs") fn = Op::Abs;
            else if (id == "re") fn = Op::Re;
            else if (id == "im") fn = Op::Im;
            else if (id == "conj") fn = Op::Conj;
            else {
                pos_ = start;
                fail("unknown identifier '" + id + "'");
            }
            expect('(');
            NodeP arg = expr();
            expect(')');
            return make(fn, arg);
        }
        fail(std::string("unexpected '") + c + "'");
    }

    NodeP number() {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string tok = s_.substr(start, pos_ - start);
        if (tok == ".") {
            pos_ = start;
            fail("malformed number");
        }
        return make_num(std::strtod(tok.c_str(), nullptr));
    }
};

cplx ipow(cplx z, long n) {
    bool inv = n < 0;
    unsigned long k = inv ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    cplx r = 1.0;
    while (k) {
        if (k & 1) r *= z;
        z *= z;
        k >>= 1;
    }
    return inv ? 1.0 / r : r;
}

cplx eval_node(const Expr::Node& n, double x) {
    switch (n.op) {
    case Op::Num: return n.num;
    case Op::X: return x;
    case Op::Pi: return std::numbers::pi;
    case Op::I: return cplx(0.0, 1.0);
    case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Op::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Op::Pow: return ipow(eval_node(*n.a, x), n.power);
    case Op::Neg: return cplx(0.0, 0.0) - eval_node(*n.a, x);  // keeps +0 imaginary parts off the branch cut
    case Op::Exp: return std::exp(eval_node(*n.a, x));
    case Op::Cos: return std::cos(eval_node(*n.a, x));
    case Op::Sin: return std::sin(eval_node(*n.a, x));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, x));
    case Op::Abs: return std::abs(eval_node(*n.a, x));
    case Op::Re: return eval_node(*n.a, x).real();
    case Op::Im: return eval_node(*n.a, x).imag();
    case Op::Conj: return std::conj(eval_node(*n.a, x));
    }
    return 0.0;
}

bool same_node(const Expr::Node* a, const Expr::Node* b) {
    if (!a || !b) return a == b;
    if (a->op != b->op || a->power != b->power) return false;
    if (a->op == Op::Num && a->num != b->num) return false;
    return same_node(a->a.get(), b->a.get()) && same_node(a->b.get(), b->b.get());
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Expr::Expr() : root_(make_num(0.0)), text_("0") {}

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    Expr e;
    e.root_ = p.parse_all();
    e.text_ = text;
    return e;
}

Expr Expr::constant(cplx c) {
    std::string t;
    if (c.imag() == 0.0) t = "(" + format_real(c.real()) + ")";
    else t = "(" + format_real(c.real()) + " + " + format_real(c.imag()) + "*i)";
    return parse(t);
}

cplx Expr::eval(double x) const {
    cplx v = eval_node(*root_, x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::Expression, "expression \"" + text_ + "\" is not finite at x=" + format_real(x));
    return v;
}

bool Expr::same_tree(const Expr& other) const { return same_node(root_.get(), other.root_.get()); }

} // namespace sloop
