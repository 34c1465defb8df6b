#include "ergo/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace ergo {
namespace detail {

enum class op {
    number, variable, negate, add, sub, mul, div, pow,
    call_exp, call_ln, call_sqrt, call_abs, call_sign
};

struct node {
    op kind;
    double value = 0.0;      // number only
    node_ptr lhs, rhs;       // rhs empty for unary
};

bool is_call(op k) { return k >= op::call_exp; }

const char* call_name(op k) {
    switch (k) {
        case op::call_exp: return "exp";
        case op::call_ln: return "ln";
        case op::call_sqrt: return "sqrt";
        case op::call_abs: return "abs";
        case op::call_sign: return "sign";
        default: return "?";
    }
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

// Precedence for printing: + - lowest, then * /, unary minus, ^, atoms.
// A negative literal prints with a leading minus, so it parenthesizes like
// a unary minus.
int precedence(const node& n) {
    switch (n.kind) {
        case op::add: case op::sub: return 1;
        case op::mul: case op::div: return 2;
        case op::negate: return 3;
        case op::pow: return 4;
        case op::number: return n.value < 0.0 ? 3 : 5;
        default: return 5;
    }
}

std::string print(const node_ptr& n);

std::string print_child(const node_ptr& child, bool needs_parens) {
    std::string s = print(child);
    if (needs_parens) return "(" + s + ")";
    return s;
}

std::string print(const node_ptr& n) {
    const int prec = precedence(*n);
    switch (n->kind) {
        case op::number: {
            if (!std::isfinite(n->value)) throw math_error("cannot print non-finite literal");
            return format_double(n->value);
        }
        case op::variable:
            return "x";
        case op::negate:
            return "-" + print_child(n->lhs, precedence(*n->lhs) < prec);
        case op::add:
        case op::sub:
        case op::mul:
        case op::div: {
            const char sym = n->kind == op::add ? '+'
                           : n->kind == op::sub ? '-'
                           : n->kind == op::mul ? '*' : '/';
            // Left-associative: equal precedence on the right needs parens.
            // A leading minus on the right is legal re-parse input, but
            // parenthesized for readability.
            const bool rhs_minus = n->rhs->kind == op::negate ||
                                   (n->rhs->kind == op::number && n->rhs->value < 0.0);
            return print_child(n->lhs, precedence(*n->lhs) < prec) + sym +
                   print_child(n->rhs, precedence(*n->rhs) <= prec || rhs_minus);
        }
        case op::pow:
            // Right-associative, and -a^b parses as -(a^b), so a negated
            // base must keep its parentheses.
            return print_child(n->lhs, precedence(*n->lhs) <= prec) + "^" +
                   print_child(n->rhs, precedence(*n->rhs) < prec);
        default:
            return std::string(call_name(n->kind)) + "(" + print(n->lhs) + ")";
    }
}

double eval_node(const node& n, double x);

[[noreturn]] void domain_fail(const node& n, const char* what) {
    throw eval_error(std::string(what) + " in subexpression " +
                         print(std::make_shared<const node>(n)),
                     print(std::make_shared<const node>(n)));
}

double eval_call(const node& n, double arg) {
    switch (n.kind) {
        case op::call_exp: return std::exp(arg);
        case op::call_ln:
            if (arg <= 0.0) domain_fail(n, "logarithm of a non-positive value");
            return std::log(arg);
        case op::call_sqrt:
            if (arg < 0.0) domain_fail(n, "square root of a negative value");
            return std::sqrt(arg);
        case op::call_abs: return std::fabs(arg);
        case op::call_sign: return arg > 0.0 ? 1.0 : (arg < 0.0 ? -1.0 : 0.0);
        default: domain_fail(n, "unknown call");
    }
}

double eval_node(const node& n, double x) {
    switch (n.kind) {
        case op::number: return n.value;
        case op::variable: return x;
        case op::negate: return -eval_node(*n.lhs, x);
        case op::add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case op::sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case op::mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case op::div: {
            const double denom = eval_node(*n.rhs, x);
            if (denom == 0.0) domain_fail(n, "division by zero");
            return eval_node(*n.lhs, x) / denom;
        }
        case op::pow: {
            const double base = eval_node(*n.lhs, x);
            const double expo = eval_node(*n.rhs, x);
            if (base < 0.0 && expo != std::trunc(expo))
                domain_fail(n, "fractional power of a negative base");
            if (base == 0.0 && expo < 0.0) domain_fail(n, "zero raised to a negative power");
            return std::pow(base, expo);
        }
        default: return eval_call(n, eval_node(*n.lhs, x));
    }
}

node_ptr make(op kind, node_ptr lhs = nullptr, node_ptr rhs = nullptr) {
    auto n = std::make_shared<node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

node_ptr number(double v) {
    auto n = std::make_shared<node>();
    n->kind = op::number;
    n->value = v;
    return n;
}

bool is_number(const node_ptr& n, double v) {
    return n->kind == op::number && n->value == v;
}

node_ptr negate(node_ptr a) {
    // Fold so that a negated literal and a negative literal are one and the
    // same tree; printing negative numbers stays round-trippable.
    if (a->kind == op::number) return number(-a->value);
    return make(op::negate, std::move(a));
}

node_ptr binary(op kind, node_ptr a, node_ptr b) {
    if (a->kind == op::number && b->kind == op::number) {
        const node folded{kind, 0.0, a, b};
        try {
            const double v = eval_node(folded, 0.0);
            if (std::isfinite(v)) return number(v);
        } catch (const eval_error&) {
            // not evaluable (1/0, (-2)^0.5): keep the node, fail at eval
        }
    }
    switch (kind) {
        case op::add:
            if (is_number(a, 0.0)) return b;
            if (is_number(b, 0.0)) return a;
            break;
        case op::sub:
            if (is_number(b, 0.0)) return a;
            if (is_number(a, 0.0)) return negate(std::move(b));
            break;
        case op::mul:
            if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0);
            if (is_number(a, 1.0)) return b;
            if (is_number(b, 1.0)) return a;
            break;
        case op::div:
            if (is_number(b, 1.0)) return a;
            if (is_number(a, 0.0) && !is_number(b, 0.0)) return number(0.0);
            break;
        case op::pow:
            if (is_number(b, 1.0)) return a;
            if (is_number(b, 0.0)) return number(1.0);
            break;
        default:
            break;
    }
    return make(kind, std::move(a), std::move(b));
}

node_ptr call(op kind, node_ptr arg) {
    if (arg->kind == op::number) {
        const node folded{kind, 0.0, arg, nullptr};
        try {
            const double v = eval_node(folded, 0.0);
            if (std::isfinite(v)) return number(v);
        } catch (const eval_error&) {
        }
    }
    return make(kind, std::move(arg));
}

node_ptr diff(const node_ptr& n) {
    switch (n->kind) {
        case op::number: return number(0.0);
        case op::variable: return number(1.0);
        case op::negate: return negate(diff(n->lhs));
        case op::add: return binary(op::add, diff(n->lhs), diff(n->rhs));
        case op::sub: return binary(op::sub, diff(n->lhs), diff(n->rhs));
        case op::mul:
            return binary(op::add, binary(op::mul, diff(n->lhs), n->rhs),
                          binary(op::mul, n->lhs, diff(n->rhs)));
        case op::div:
            return binary(op::div,
                          binary(op::sub, binary(op::mul, diff(n->lhs), n->rhs),
                                 binary(op::mul, n->lhs, diff(n->rhs))),
                          binary(op::pow, n->rhs, number(2.0)));
        case op::pow: {
            if (n->rhs->kind == op::number) {
                // d a^c = c a^(c-1) a'
                const double c = n->rhs->value;
                return binary(op::mul,
                              binary(op::mul, number(c),
                                     binary(op::pow, n->lhs, number(c - 1.0))),
                              diff(n->lhs));
            }
            if (n->lhs->kind == op::number) {
                // d c^b = c^b ln(c) b'
                return binary(op::mul,
                              binary(op::mul, make(op::pow, n->lhs, n->rhs),
                                     call(op::call_ln, n->lhs)),
                              diff(n->rhs));
            }
            // d a^b = a^b (b' ln a + b a'/a)
            return binary(
                op::mul, make(op::pow, n->lhs, n->rhs),
                binary(op::add, binary(op::mul, diff(n->rhs), call(op::call_ln, n->lhs)),
                       binary(op::div, binary(op::mul, n->rhs, diff(n->lhs)), n->lhs)));
        }
        case op::call_exp:
            return binary(op::mul, make(op::call_exp, n->lhs), diff(n->lhs));
        case op::call_ln:
            return binary(op::div, diff(n->lhs), n->lhs);
        case op::call_sqrt:
            return binary(op::div, diff(n->lhs),
                          binary(op::mul, number(2.0), make(op::call_sqrt, n->lhs)));
        case op::call_abs:
            return binary(op::mul, make(op::call_sign, n->lhs), diff(n->lhs));
        case op::call_sign:
            // Zero almost everywhere; the jump at sign changes is dropped.
            return number(0.0);
    }
    throw math_error("differentiate: unknown node kind");
}

bool same(const node_ptr& a, const node_ptr& b) {
    if (a->kind != b->kind) return false;
    if (a->kind == op::number) return a->value == b->value;
    if (a->lhs && !same(a->lhs, b->lhs)) return false;
    if (a->rhs) return same(a->rhs, b->rhs);
    return true;
}

struct parser {
    const std::string& text;
    std::size_t pos = 0;
    int depth = 0;

    explicit parser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& what, std::size_t at) {
        throw parse_error(what + " at position " + std::to_string(at), at);
    }

    void skip_space() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }

    bool eat(char c) {
        skip_space();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos < text.size() ? text[pos] : '\0';
    }

    struct depth_guard {
        parser& p;
        explicit depth_guard(parser& pp) : p(pp) {
            if (++p.depth > 256) p.fail("expression nested too deeply", p.pos);
        }
        ~depth_guard() { --p.depth; }
    };

    node_ptr expression() {
        depth_guard guard(*this);
        node_ptr lhs = term();
        for (;;) {
            if (eat('+')) lhs = binary(op::add, std::move(lhs), term());
            else if (eat('-')) lhs = binary(op::sub, std::move(lhs), term());
            else return lhs;
        }
    }

    node_ptr term() {
        depth_guard guard(*this);
        node_ptr lhs = factor();
        for (;;) {
            if (eat('*')) lhs = binary(op::mul, std::move(lhs), factor());
            else if (eat('/')) lhs = binary(op::div, std::move(lhs), factor());
            else return lhs;
        }
    }

    node_ptr factor() {
        depth_guard guard(*this);
        if (eat('-')) return negate(factor());
        return power();
    }

    node_ptr power() {
        depth_guard guard(*this);
        node_ptr base = atom();
        if (eat('^')) return binary(op::pow, std::move(base), factor());
        return base;
    }

    node_ptr atom() {
        skip_space();
        if (pos >= text.size()) fail("unexpected end of expression", pos);
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            node_ptr inner = expression();
            if (!eat(')')) fail("expected closing parenthesis", pos);
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (c >= 'a' && c <= 'z') return parse_ident();
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    node_ptr parse_number() {
        const std::size_t start = pos;
        double value = 0.0;
        const char* begin = text.data() + pos;
        const char* end = text.data() + text.size();
        auto [rest, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || rest == begin) fail("malformed number", start);
        pos += std::size_t(rest - begin);
        return number(value);
    }

    node_ptr parse_ident() {
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= 'a' && text[pos] <= 'z') ++pos;
        const std::string name = text.substr(start, pos - start);
        if (name == "x") return make(op::variable);
        op kind;
        if (name == "exp") kind = op::call_exp;
        else if (name == "ln") kind = op::call_ln;
        else if (name == "sqrt") kind = op::call_sqrt;
        else if (name == "abs") kind = op::call_abs;
        else if (name == "sign") kind = op::call_sign;
        else fail("unknown identifier '" + name + "'", start);
        if (!eat('(')) fail("expected '(' after function name", pos);
        node_ptr arg = expression();
        if (!eat(')')) fail("expected closing parenthesis", pos);
        return call(kind, std::move(arg));
    }
};

}  // namespace detail

Expr Expr::parse(const std::string& text) {
    detail::parser p(text);
    detail::node_ptr root = p.expression();
    p.skip_space();
    if (p.pos != text.size())
        throw parse_error("trailing characters after expression at position " +
                              std::to_string(p.pos),
                          p.pos);
    return Expr(std::move(root));
}

Expr Expr::constant(double value) { return Expr(detail::number(value)); }

Expr Expr::variable() { return Expr(detail::make(detail::op::variable)); }

double Expr::eval(double x) const { return detail::eval_node(*node_, x); }

Expr Expr::derivative() const { return Expr(detail::diff(node_)); }

std::string Expr::str() const { return detail::print(node_); }

bool Expr::same_structure(const Expr& other) const {
    return detail::same(node_, other.node_);
}

}  // namespace ergo
