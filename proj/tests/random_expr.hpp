#pragma once

// Fixed-seed generators for property tests.

#include <random>

#include "vlasym/expr.hpp"
#include "vlasym/vectorfield.hpp"

namespace vlasym::testing {

class ExprGen {
public:
    explicit ExprGen(unsigned seed) : rng_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Rational small_rational(int range = 4, int max_den = 3) {
        return Rational(uniform(-range, range), uniform(1, max_den));
    }

    Rational exponent(bool fractional) {
        return fractional ? Rational(uniform(-3, 3), uniform(1, 2)) : Rational(uniform(-2, 3));
    }

    ParamRat coefficient() {
        Rational c = small_rational();
        while (c.is_zero()) c = small_rational();
        ParamRat out(c);
        // occasionally a parameter factor or a parameter-fraction coefficient
        const int kind = uniform(0, 5);
        if (kind == 1) out *= sym("mu");
        if (kind == 2) out *= sym("k") - sym("mu") * sym("mu");
        if (kind == 3) out /= sym("mu");
        if (kind == 4) out *= sym("x");
        return out;
    }

    /// Random sum of 1..max_terms generalized monomials.
    Expr monomial_sum(int max_terms = 4, bool fractional = true) {
        GPoly p;
        const int n = uniform(1, max_terms);
        for (int i = 0; i < n; ++i) {
            BaseMonomial m(exponent(fractional), exponent(fractional), exponent(fractional));
            p.add_term(m, coefficient());
        }
        return Expr(p);
    }

    Expr nonzero_monomial_sum(int max_terms = 4, bool fractional = true) {
        Expr e = monomial_sum(max_terms, fractional);
        while (e.is_zero()) e = monomial_sum(max_terms, fractional);
        return e;
    }

    /// Sum with an occasional rational-function part.
    Expr expr() {
        Expr e = monomial_sum();
        if (uniform(0, 2) == 0) {
            Expr d = nonzero_monomial_sum(2, false) + Expr(ParamRat(sym("phi0")));
            e = e / d;
        }
        return e;
    }

    /// Polynomial coefficients of degree <= 2 in (t, r, v), non-negative integer exponents.
    Expr low_degree_poly() {
        GPoly p;
        const int n = uniform(1, 3);
        for (int i = 0; i < n; ++i) {
            const int a = uniform(0, 2), b = uniform(0, 2 - a), c = uniform(0, 2 - a - b);
            p.add_term(BaseMonomial(a, b, c), coefficient());
        }
        return Expr(p);
    }

    VectorField poly_field() {
        return {low_degree_poly(), low_degree_poly(), low_degree_poly(), low_degree_poly()};
    }

    std::mt19937& rng() { return rng_; }

private:
    std::mt19937 rng_;
};

} // namespace vlasym::testing
