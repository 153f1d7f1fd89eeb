#pragma once

#include <array>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "vlasym/error.hpp"
#include "vlasym/expr.hpp"

namespace vlasym {

/// Unevaluated expression tree in which the dynamical exponent z may occur
/// both in coefficients and in exponents. Substituting a rational z turns it
/// into a plain Expr (or a first-order operator, see elaborate()).
struct TemplateNode {
    enum class Kind { Number, Var, Param, Z, Deriv, Neg, Add, Sub, Mul, Div, Pow };

    Kind kind = Kind::Number;
    Rational number;
    int index = 0;  // Var / Deriv: 0..2 for t, r, v; Param: parameter index
    std::shared_ptr<const TemplateNode> lhs, rhs;
    int line = 1;
    int column = 1;
};

using ZTemplate = std::shared_ptr<const TemplateNode>;

/// Parameter symbols replaced by fixed values during elaboration.
using Bindings = std::map<std::string, ParamRat, std::less<>>;

/// A first-order operator component-wise: s + d[t] Dt + d[r] Dr + d[v] Dv.
struct LinearForm {
    Expr s;
    std::array<Expr, 3> d;
    bool has_derivative() const { return !d[0].is_zero() || !d[1].is_zero() || !d[2].is_zero(); }
};

inline std::string template_text(const ZTemplate& n) {
    using K = TemplateNode::Kind;
    switch (n->kind) {
    case K::Number: return n->number.str();
    case K::Var: return kVarNames[static_cast<std::size_t>(n->index)];
    case K::Param: return std::string(kParamNames[static_cast<std::size_t>(n->index)]);
    case K::Z: return "z";
    case K::Deriv: return std::string("D") + kVarNames[static_cast<std::size_t>(n->index)];
    case K::Neg: return "-(" + template_text(n->lhs) + ")";
    case K::Add: return "(" + template_text(n->lhs) + " + " + template_text(n->rhs) + ")";
    case K::Sub: return "(" + template_text(n->lhs) + " - " + template_text(n->rhs) + ")";
    case K::Mul: return template_text(n->lhs) + "*" + template_text(n->rhs);
    case K::Div: return template_text(n->lhs) + "/(" + template_text(n->rhs) + ")";
    case K::Pow: return template_text(n->lhs) + "^(" + template_text(n->rhs) + ")";
    }
    return "?";
}

inline bool template_uses_z(const ZTemplate& n) {
    if (!n) return false;
    if (n->kind == TemplateNode::Kind::Z) return true;
    return template_uses_z(n->lhs) || template_uses_z(n->rhs);
}

namespace detail {

class Elaborator {
public:
    Elaborator(std::optional<Rational> z, const Bindings& bindings) : z_(std::move(z)), bindings_(bindings) {}

    LinearForm run(const ZTemplate& n) const {
        using K = TemplateNode::Kind;
        switch (n->kind) {
        case K::Number: return scalar(Expr(n->number));
        case K::Var: return scalar(Expr::var(static_cast<Var>(n->index)));
        case K::Param: {
            const auto name = kParamNames[static_cast<std::size_t>(n->index)];
            auto it = bindings_.find(name);
            return scalar(it == bindings_.end() ? Expr(ParamRat::symbol(static_cast<std::size_t>(n->index)))
                                                : Expr(it->second));
        }
        case K::Z: return scalar(Expr(z_value(*n)));
        case K::Deriv: {
            LinearForm f;
            f.d[static_cast<std::size_t>(n->index)] = Expr(1);
            return f;
        }
        case K::Neg: {
            LinearForm a = run(n->lhs);
            a.s = -a.s;
            for (auto& c : a.d) c = -c;
            return a;
        }
        case K::Add:
        case K::Sub: {
            LinearForm a = run(n->lhs), b = run(n->rhs);
            const bool sub = n->kind == K::Sub;
            a.s = sub ? a.s - b.s : a.s + b.s;
            for (std::size_t i = 0; i < 3; ++i) a.d[i] = sub ? a.d[i] - b.d[i] : a.d[i] + b.d[i];
            return a;
        }
        case K::Mul: {
            LinearForm a = run(n->lhs), b = run(n->rhs);
            if (a.has_derivative() && b.has_derivative())
                throw ParseError("product of two derivative markers is not first order", n->line, n->column);
            if (b.has_derivative()) std::swap(a, b);
            LinearForm r;
            r.s = a.s * b.s;
            for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.s;
            return r;
        }
        case K::Div: {
            LinearForm a = run(n->lhs), b = run(n->rhs);
            if (b.has_derivative()) throw ParseError("division by a derivative marker", n->rhs->line, n->rhs->column);
            if (b.s.is_zero())
                throw At<PoleError>("pole: divisor '" + template_text(n->rhs) + "' vanishes" + z_note(), n->line, n->column);
            LinearForm r;
            r.s = a.s / b.s;
            for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] / b.s;
            return r;
        }
        case K::Pow: {
            const Rational p = exponent(n->rhs);
            LinearForm b = run(n->lhs);
            if (b.has_derivative()) {
                if (p.is_one()) return b;
                throw ParseError("derivative marker raised to a power", n->line, n->column);
            }
            return scalar(power(b.s, p, *n));
        }
        }
        throw ParseError("unhandled node", n->line, n->column);
    }

    Rational exponent(const ZTemplate& n) const {
        using K = TemplateNode::Kind;
        switch (n->kind) {
        case K::Number: return n->number;
        case K::Z: return z_value(*n);
        case K::Neg: return -exponent(n->lhs);
        case K::Add: return exponent(n->lhs) + exponent(n->rhs);
        case K::Sub: return exponent(n->lhs) - exponent(n->rhs);
        case K::Mul: return exponent(n->lhs) * exponent(n->rhs);
        case K::Div: {
            const Rational d = exponent(n->rhs);
            if (d.is_zero())
                throw At<PoleError>("pole in exponent '" + template_text(n) + "'" + z_note(), n->line, n->column);
            return exponent(n->lhs) / d;
        }
        case K::Pow: {
            const Rational e = exponent(n->rhs);
            if (!e.fits_long()) throw ParseError("exponent of an exponent must be an integer", n->line, n->column);
            const Rational b = exponent(n->lhs);
            const auto bits = mpz_sizeinbase(b.num().get_mpz_t(), 2) + mpz_sizeinbase(b.den().get_mpz_t(), 2);
            if (std::abs(e.to_long()) > kMaxPower || bits * static_cast<std::size_t>(std::abs(e.to_long())) > 4096)
                throw At<DomainError>("power too large", n->line, n->column);
            if (b.is_zero() && e.sign() < 0)
                throw At<PoleError>("pole in exponent '" + template_text(n) + "'" + z_note(), n->line, n->column);
            return b.pow(e.to_long());
        }
        case K::Deriv: throw ParseError("derivative marker inside an exponent", n->line, n->column);
        case K::Var:
        case K::Param:
            throw ParseError("exponent must be a rational constant (or depend on z only)", n->line, n->column);
        }
        throw ParseError("unhandled node", n->line, n->column);
    }

private:
    static LinearForm scalar(Expr e) {
        LinearForm f;
        f.s = std::move(e);
        return f;
    }

    Rational z_value(const TemplateNode& n) const {
        if (!z_) throw ParseError("'z' used but no value for z was supplied", n.line, n.column);
        return *z_;
    }

    std::string z_note() const { return z_ ? " at z = " + z_->str() : std::string(); }

    Expr power(const Expr& base, const Rational& p, const TemplateNode& n) const {
        if (p.fits_long()) {
            if (base.is_zero() && p.sign() < 0)
                throw At<PoleError>("pole: zero base in '" + template_text(n.lhs) + "' raised to " + p.str(), n.line, n.column);
            const bool unit = base.is_zero() || (base.is_polynomial() && base.num().terms().size() == 1 &&
                              coefficient_bits(base.num().leading().second) <= 2);
            const long limit = unit ? 1024 : kMaxPower;
            if (std::abs(p.to_long()) > limit || size_bits(base) * std::size_t(std::abs(p.to_long())) > (1u << 16))
                throw At<DomainError>("power too large", n.line, n.column);
            return base.pow(p.to_long());
        }
        if (base.is_zero()) {
            if (p.sign() < 0) throw At<PoleError>("pole: zero raised to " + p.str(), n.line, n.column);
            return {};
        }
        if (!base.is_polynomial() || !base.num().is_single_term())
            throw ParseError("non-integer power of a non-monomial expression", n.line, n.column);
        const auto& [m, c] = base.num().leading();
        ParamRat coeff(1);
        if (!c.is_one()) {
            // rational coefficients are allowed when the power is exact
            if (!c.is_constant()) throw ParseError("non-integer power of a parameter coefficient", n.line, n.column);
            const Rational cv = c.constant_value();
            Rational root;
            const bool square_root = p.den() == 2 && cv.exact_sqrt(root);
            if (!square_root) throw ParseError("non-integer power of a numeric coefficient", n.line, n.column);
            if (!p.num().fits_slong_p() || std::abs(p.num().get_si()) > kMaxPower)
                throw At<DomainError>("power too large", n.line, n.column);
            coeff = ParamRat(root.pow(p.num().get_si()));
        }
        return Expr(GPoly::term(m.pow(p), coeff));
    }

    static std::size_t coefficient_bits(const ParamRat& c) {
        std::size_t bits = 0;
        for (const ParamPoly* p : {&c.num(), &c.den()})
            for (auto& [m, q] : p->terms())
                bits += mpz_sizeinbase(q.num().get_mpz_t(), 2) + mpz_sizeinbase(q.den().get_mpz_t(), 2);
        return bits;
    }

    // rough size of the coefficient data, used to refuse runaway powers
    static std::size_t size_bits(const Expr& e) {
        std::size_t bits = 0;
        for (auto& [m, c] : e.num().terms()) bits += coefficient_bits(c);
        for (auto& f : e.factors())
            for (auto& [m, c] : f.poly.terms()) bits += coefficient_bits(c);
        return bits;
    }

    static constexpr long kMaxPower = 64;
    std::optional<Rational> z_;
    const Bindings& bindings_;
};

} // namespace detail

/// Elaborates a template into a first-order operator at the given z.
inline LinearForm elaborate(const ZTemplate& t, std::optional<Rational> z, const Bindings& bindings = {}) {
    return detail::Elaborator(std::move(z), bindings).run(t);
}

/// Substitutes z into a template that denotes a plain function.
inline Expr expr_subst_z(const ZTemplate& t, std::optional<Rational> z, const Bindings& bindings = {}) {
    LinearForm f = elaborate(t, std::move(z), bindings);
    if (f.has_derivative()) throw ParseError("derivative marker in a scalar expression", t->line, t->column);
    return f.s;
}

} // namespace vlasym
