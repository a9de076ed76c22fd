#pragma once

#include "spectral_loop/linalg.hpp"

#include <memory>
#include <string>

namespace sloop {

// Complex-valued expression in the real variable x.
//
//   expr   = term {("+"|"-") term}
//   term   = factor {("*"|"/") factor}
//   factor = base ["^" base]            exponent must be an integer literal
//   base   = NUMBER | "x" | "pi" | "i" | IDENT "(" expr ")" | "(" expr ")" | "-" base
//   IDENT  = exp | cos | sin | sqrt | abs | re | im | conj
class Expr {
public:
    Expr();  // the constant 0

    // Throws Error(Parse) with the byte offset of the failure as index().
    static Expr parse(const std::string& text);
    static Expr constant(cplx c);

    cplx eval(double x) const;
    const std::string& text() const { return text_; }

    // Structural equality of the parsed trees.
    bool same_tree(const Expr& other) const;

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace sloop
