#pragma once

#include <memory>
#include <string>

#include "ergo/errors.hpp"

namespace ergo {

namespace detail {
struct node;
using node_ptr = std::shared_ptr<const node>;
}  // namespace detail

// Immutable symbolic expression in one variable x.
//
// Grammar: literals, x, unary minus, + - * / ^, and calls to exp, ln, sqrt,
// abs. ^ is right-associative and binds tighter than unary minus, which
// binds tighter than * and /. sign is also accepted so that derivatives of
// abs (which differentiate to sign, with sign(0) = 0) remain printable and
// re-parseable.
//
// Evaluation is plain IEEE double arithmetic. Arguments outside a
// function's domain (ln or sqrt of a negative, division by zero, fractional
// power of a negative base) raise eval_error naming the offending
// subexpression; overflow to infinity is propagated, not trapped.
//
// Derivatives are exact rewrites with literal arithmetic folded and trivial
// identities (x*1, x+0, x^1) dropped. No further simplification is
// guaranteed. Folding 0*f(x) to 0 can widen the domain of a derivative
// relative to the textbook rewrite.
//
// Nodes are shared, immutable and safe to evaluate concurrently.
class Expr {
public:
    static Expr parse(const std::string& text);
    static Expr constant(double value);
    static Expr variable();

    double eval(double x) const;
    Expr derivative() const;
    std::string str() const;
    bool same_structure(const Expr& other) const;

    explicit Expr(detail::node_ptr n) : node_(std::move(n)) {}
    const detail::node_ptr& node() const { return node_; }

private:
    detail::node_ptr node_;
};

}  // namespace ergo
