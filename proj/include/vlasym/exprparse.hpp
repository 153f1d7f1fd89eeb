#pragma once

// Text form of expressions and operators.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := integer | identifier | '(' expr ')'
//
// Identifiers: t r v, the derivative markers Dt Dr Dv, the parameter
// symbols, and z (resolved against a supplied rational). '#' starts a
// comment running to the end of the line.

#include <cctype>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vlasym/error.hpp"
#include "vlasym/expr.hpp"
#include "vlasym/vectorfield.hpp"
#include "vlasym/ztemplate.hpp"

namespace vlasym {

namespace detail {

struct Token {
    enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind;
    std::string text;
    int line;
    int column;
};

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n = 1) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance();
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) { advance(); continue; }
        const int l = line, cc = col;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Token::Kind::Number, std::string(src.substr(i, j - i)), l, cc});
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), l, cc});
            advance(j - i);
            continue;
        }
        Token::Kind k;
        switch (c) {
        case '+': k = Token::Kind::Plus; break;
        case '-': k = Token::Kind::Minus; break;
        case '*': k = Token::Kind::Star; break;
        case '/': k = Token::Kind::Slash; break;
        case '^': k = Token::Kind::Caret; break;
        case '(': k = Token::Kind::LParen; break;
        case ')': k = Token::Kind::RParen; break;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", l, cc);
        }
        out.push_back({k, std::string(1, c), l, cc});
        advance();
    }
    out.push_back({Token::Kind::End, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ZTemplate parse_all() {
        if (peek().kind == Token::Kind::End) throw ParseError("empty expression", peek().line, peek().column);
        ZTemplate e = expr();
        if (peek().kind != Token::Kind::End)
            throw ParseError("unexpected '" + peek().text + "'", peek().line, peek().column);
        return e;
    }

private:
    using K = Token::Kind;
    using N = TemplateNode::Kind;

    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

    static std::shared_ptr<TemplateNode> node(N kind, const Token& at, ZTemplate lhs = nullptr, ZTemplate rhs = nullptr) {
        auto n = std::make_shared<TemplateNode>();
        n->kind = kind;
        n->line = at.line;
        n->column = at.column;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    ZTemplate expr() {
        ZTemplate lhs = term();
        while (peek().kind == K::Plus || peek().kind == K::Minus) {
            const Token& op = take();
            lhs = node(op.kind == K::Plus ? N::Add : N::Sub, op, lhs, term());
        }
        return lhs;
    }

    ZTemplate term() {
        ZTemplate lhs = unary();
        while (peek().kind == K::Star || peek().kind == K::Slash) {
            const Token& op = take();
            lhs = node(op.kind == K::Star ? N::Mul : N::Div, op, lhs, unary());
        }
        return lhs;
    }

    ZTemplate unary() {
        if (peek().kind == K::Minus) {
            const Token& op = take();
            return node(N::Neg, op, unary());
        }
        return power();
    }

    ZTemplate power() {
        ZTemplate base = primary();
        if (peek().kind == K::Caret) {
            const Token& op = take();
            return node(N::Pow, op, base, unary());
        }
        return base;
    }

    ZTemplate primary() {
        if (++depth_ > kMaxDepth) throw ParseError("expression nested too deeply", peek().line, peek().column);
        struct Guard {
            int& d;
            ~Guard() { --d; }
        } guard{depth_};
        const Token& tok = peek();
        switch (tok.kind) {
        case K::Number: {
            take();
            auto n = node(N::Number, tok);
            n->number = Rational::parse(tok.text);
            return n;
        }
        case K::Ident: {
            take();
            return identifier(tok);
        }
        case K::LParen: {
            take();
            ZTemplate inner = expr();
            if (peek().kind != K::RParen)
                throw ParseError(peek().kind == K::End ? "missing ')'" : "expected ')' but found '" + peek().text + "'",
                                 peek().line, peek().column);
            take();
            return inner;
        }
        case K::End: throw ParseError("unexpected end of input", tok.line, tok.column);
        default: throw ParseError("unexpected '" + tok.text + "'", tok.line, tok.column);
        }
    }

    static ZTemplate identifier(const Token& tok) {
        const std::string& s = tok.text;
        for (std::size_t i = 0; i < 3; ++i) {
            if (s == kVarNames[i]) {
                auto n = node(N::Var, tok);
                n->index = static_cast<int>(i);
                return n;
            }
            if (s == std::string("D") + kVarNames[i]) {
                auto n = node(N::Deriv, tok);
                n->index = static_cast<int>(i);
                return n;
            }
        }
        if (s == "z") return node(N::Z, tok);
        if (auto p = param_index(s)) {
            auto n = node(N::Param, tok);
            n->index = *p;
            return n;
        }
        throw ParseError("unknown identifier '" + s + "'", tok.line, tok.column);
    }

    static constexpr int kMaxDepth = 400;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

} // namespace detail

inline ZTemplate parse_template(std::string_view text) {
    return detail::Parser(detail::tokenize(text)).parse_all();
}

/// Parses a scalar expression; z is required only if the text mentions it.
inline Expr parse_expr(std::string_view text, std::optional<Rational> z = std::nullopt, const Bindings& bindings = {}) {
    return expr_subst_z(parse_template(text), std::move(z), bindings);
}

inline VectorField to_vector_field(LinearForm f) {
    return {std::move(f.d[0]), std::move(f.d[1]), std::move(f.d[2]), std::move(f.s)};
}

/// Parses an operator; terms carrying Dt/Dr/Dv are derivative parts, the rest is the scalar part.
inline VectorField parse_vfield(std::string_view text, std::optional<Rational> z = std::nullopt,
                                const Bindings& bindings = {}) {
    return to_vector_field(elaborate(parse_template(text), std::move(z), bindings));
}

// ---------------------------------------------------------------------------
// printing

namespace detail {

inline std::string power_suffix(const Rational& e) {
    if (e.is_one()) return "";
    if (e.is_integer() && e.sign() > 0) return "^" + e.str();
    return "^(" + e.str() + ")";
}

/// "mu^2*x" style product; empty for the unit monomial.
inline std::string param_mono_text(const ParamPoly::Mono& m) {
    std::string s;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!m[i]) continue;
        if (!s.empty()) s += "*";
        s += kParamNames[i];
        if (m[i] != 1) s += "^" + std::to_string(m[i]);
    }
    return s;
}

inline std::string base_mono_text(const BaseMonomial& m) {
    std::string s;
    for (std::size_t i = 0; i < 3; ++i) {
        if (m.e[i].is_zero()) continue;
        if (!s.empty()) s += "*";
        s += kVarNames[i];
        s += power_suffix(m.e[i]);
    }
    return s;
}

/// Signed terms of a polynomial, highest monomial first.
template <class Poly, class MonoText>
std::vector<std::pair<bool, std::string>> signed_terms(const Poly& p, MonoText mono_text) {
    std::vector<std::pair<bool, std::string>> out;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        const auto& [m, c] = *it;
        const bool neg = c.sign() < 0;
        const Rational a = neg ? -c : c;
        std::string mt = mono_text(m);
        std::string s;
        if (mt.empty()) s = a.str();
        else if (a.is_one()) s = mt;
        else s = a.str() + "*" + mt;
        out.emplace_back(neg, s);
    }
    return out;
}

inline std::string join_terms(const std::vector<std::pair<bool, std::string>>& ts) {
    if (ts.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i == 0) s += ts[i].first ? "-" : "";
        else s += ts[i].first ? " - " : " + ";
        s += ts[i].second;
    }
    return s;
}

inline std::string param_poly_text(const ParamPoly& p) { return join_terms(signed_terms(p, param_mono_text)); }

/// Term "coefficient * monomial" split into a sign and a body.
inline std::pair<bool, std::string> gpoly_term_text(const BaseMonomial& m, const ParamRat& c) {
    const std::string mono = base_mono_text(m);
    auto glue = [](std::string a, const std::string& b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        return a + "*" + b;
    };
    if (c.den().is_constant() && c.num().is_monomial()) {
        const auto& [pm, pc] = c.num().leading();
        const Rational scale = pc / c.den().constant_value();
        const bool neg = scale.sign() < 0;
        const Rational a = neg ? -scale : scale;
        std::string body = param_mono_text(pm);
        if (!a.is_one() || (body.empty() && mono.empty())) body = glue(a.str(), body);
        return {neg, glue(body, mono)};
    }
    std::string coeff = "(" + param_poly_text(c.num()) + ")";
    if (!c.den().is_constant() || !c.den().constant_value().is_one()) coeff += "/(" + param_poly_text(c.den()) + ")";
    return {false, glue(coeff, mono)};
}

inline std::vector<std::pair<bool, std::string>> gpoly_terms(const GPoly& p) {
    std::vector<std::pair<bool, std::string>> out;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) out.push_back(gpoly_term_text(it->first, it->second));
    return out;
}

inline std::string gpoly_text(const GPoly& p) { return join_terms(gpoly_terms(p)); }

inline std::string denominator_text(const Expr& e) {
    std::string s;
    for (auto& f : e.factors()) {
        if (!s.empty()) s += "*";
        s += "(" + gpoly_text(f.poly) + ")";
        if (f.power != 1) s += "^" + std::to_string(f.power);
    }
    return s;
}

} // namespace detail

inline std::string print(const ParamRat& c) {
    std::string s = detail::param_poly_text(c.num());
    if (c.den().is_constant() && c.den().constant_value().is_one()) return s;
    return "(" + s + ")/(" + detail::param_poly_text(c.den()) + ")";
}

/// Canonical text of an expression; parse(print(e)) == e.
inline std::string print(const Expr& e) {
    if (e.is_polynomial()) return detail::gpoly_text(e.num());
    return "(" + detail::gpoly_text(e.num()) + ")/(" + detail::denominator_text(e) + ")";
}

inline std::string print(const VectorField& X) {
    std::vector<std::pair<bool, std::string>> terms;
    auto component = [&](const Expr& c, const char* marker) {
        if (c.is_zero()) return;
        const std::string suffix = marker[0] ? std::string("*") + marker : "";
        if (c.is_polynomial()) {
            for (auto& [neg, body] : detail::gpoly_terms(c.num())) {
                std::string b = body;
                if (marker[0]) b = (b == "1" ? std::string(marker) : b + suffix);
                terms.emplace_back(neg, b);
            }
        } else {
            terms.emplace_back(false, print(c) + suffix);
        }
    };
    component(X.dt, "Dt");
    component(X.dr, "Dr");
    component(X.dv, "Dv");
    component(X.scalar, "");
    return detail::join_terms(terms);
}

} // namespace vlasym
