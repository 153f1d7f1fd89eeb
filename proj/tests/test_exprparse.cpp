#include <random>
#include <string>

#include <gtest/gtest.h>

#include "random_expr.hpp"
#include "vlasym/exprparse.hpp"

using namespace vlasym;
using vlasym::testing::ExprGen;

namespace {

template <class F>
ParseError expect_parse_error(F&& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no ParseError";
    return ParseError("none", 0, 0);
}

} // namespace

TEST(ParseExpr, Examples) {
    Expr e = parse_expr("-t^2 - (2/1)*t*r");
    EXPECT_EQ(e.num().terms().size(), 2u);
    EXPECT_EQ(e, Expr::var(Var::t).pow(2) * Expr(-1) - Expr(2) * Expr::var(Var::t) * Expr::var(Var::r));
    EXPECT_EQ(parse_expr("v^(z/(1-z))", Rational(2)), Expr::var(Var::v).pow(-2));
    EXPECT_EQ(parse_expr("  t*\n r  "), parse_expr("t*r"));
}

TEST(ParseExpr, PrecedenceAndAssociativity) {
    // ^ binds tighter than unary minus, and is right-associative
    EXPECT_EQ(parse_expr("-t^2"), Expr(-1) * Expr::var(Var::t).pow(2));
    EXPECT_EQ(parse_expr("t^2^3"), Expr::var(Var::t).pow(8));
    EXPECT_EQ(parse_expr("t^-1"), Expr::var(Var::t).pow(-1));
    EXPECT_EQ(parse_expr("1 - t - r"), Expr(1) - Expr::var(Var::t) - Expr::var(Var::r));
    EXPECT_EQ(parse_expr("2/3*t"), Expr(Rational(2, 3)) * Expr::var(Var::t));
    EXPECT_EQ(parse_expr("t # comment\n + r"), parse_expr("t + r"));
}

TEST(ParseExpr, LocatedDiagnostics) {
    auto e1 = expect_parse_error([] { parse_expr("t^^2"); });
    EXPECT_EQ(e1.line, 1);
    EXPECT_EQ(e1.column, 3);

    auto e2 = expect_parse_error([] { parse_expr("t +\n  foo"); });
    EXPECT_EQ(e2.line, 2);
    EXPECT_EQ(e2.column, 3);
    EXPECT_NE(std::string(e2.what()).find("foo"), std::string::npos);

    auto e3 = expect_parse_error([] { parse_expr("v^z"); });
    EXPECT_EQ(e3.column, 3);

    auto e4 = expect_parse_error([] { parse_expr("(t + r"); });
    EXPECT_NE(std::string(e4.what()).find(")"), std::string::npos);

    auto e5 = expect_parse_error([] { parse_vfield("t^(Dt)*Dr"); });
    EXPECT_EQ(e5.column, 4);

    auto e6 = expect_parse_error([] { parse_vfield("Dt*Dr"); });
    EXPECT_EQ(e6.column, 3);

    auto e7 = expect_parse_error([] { parse_expr("t $ r"); });
    EXPECT_EQ(e7.column, 3);

    EXPECT_THROW(parse_expr("v^(1/(1-z))", Rational(1)), PoleError);
    try {
        parse_expr("t + x/(z-2)", Rational(2));
        FAIL();
    } catch (const At<PoleError>& e) {
        EXPECT_EQ(e.line, 1);
        EXPECT_EQ(e.column, 6);
    }
}

TEST(ParseVField, Examples) {
    VectorField x1 = parse_vfield("-(t^2)*Dt - 2*t*r*Dr - mu*r^2*Dr - 2*x*t - 2*gamma*r");
    EXPECT_EQ(x1.dt, parse_expr("-t^2"));
    EXPECT_EQ(x1.dr, parse_expr("-2*t*r - mu*r^2"));
    EXPECT_TRUE(x1.dv.is_zero());
    EXPECT_EQ(x1.scalar, parse_expr("-2*x*t - 2*gamma*r"));

    VectorField xm1 = parse_vfield("-Dt");
    EXPECT_EQ(xm1.dt, Expr(-1));
    EXPECT_TRUE(xm1.dr.is_zero() && xm1.dv.is_zero() && xm1.scalar.is_zero());

    EXPECT_EQ(parse_vfield("-v*Dr").dr, parse_expr("-v"));

    VectorField y = parse_vfield("-v*Dr - r^(1-2*z)*phi0*Dv", Rational(2));
    EXPECT_EQ(y.dv, parse_expr("-phi0*r^(-3)"));
    EXPECT_EQ(parse_vfield("Dt*t").dt, parse_expr("t"));
}

TEST(Print, Examples) {
    EXPECT_EQ(print(parse_expr("r*t")), "t*r");
    EXPECT_EQ(print(Expr()), "0");
    EXPECT_EQ(print(VectorField{}), "0");
    EXPECT_EQ(print(parse_vfield("-(t^2)*Dt - 2*t*r*Dr - mu*r^2*Dr - 2*x*t - 2*gamma*r")),
              "-t^2*Dt - 2*t*r*Dr - mu*r^2*Dr - 2*x*t - 2*gamma*r");
    EXPECT_EQ(print(parse_expr("v^(-2) + v^(1/2)")), "v^(1/2) + v^(-2)");
}

TEST(Print, RoundTripRandomExprs) {
    ExprGen g(31);
    for (int i = 0; i < 500; ++i) {
        Expr e = g.expr();
        const std::string text = print(e);
        Expr back = parse_expr(text);
        EXPECT_EQ(back, e) << text;
        EXPECT_EQ(print(back), text);
    }
}

TEST(Print, RoundTripRandomFields) {
    ExprGen g(32);
    for (int i = 0; i < 100; ++i) {
        VectorField X = g.poly_field();
        X.dv = X.dv + g.expr();
        const std::string text = print(X);
        EXPECT_EQ(parse_vfield(text), X) << text;
    }
}

TEST(Parser, FuzzedTokenStreamsGiveLocatedDiagnostics) {
    static const char* vocab[] = {"t",  "r",   "v", "Dt",  "Dr", "Dv",   "z",  "mu", "x",   "phi0", "1",
                                  "2",  "0",   "7", "3/4", "+",  "-",    "*",  "/",  "^",   "(",    ")",
                                  "((", "))",  " ", "\n",  "#c\n", "@",  "\xe2\x88\x82", "Dz", "9999999999999", "."};
    constexpr std::size_t kVocab = sizeof(vocab) / sizeof(vocab[0]);
    std::mt19937 rng(33);
    std::uniform_int_distribution<std::size_t> pick(0, kVocab - 1), len(0, 14), zpick(0, 4);
    const std::optional<Rational> zs[] = {std::nullopt, Rational(1), Rational(2), Rational(0), Rational(1, 2)};
    int parsed = 0, diagnosed = 0;
    for (int i = 0; i < 100000; ++i) {
        std::string text;
        const std::size_t n = len(rng);
        for (std::size_t k = 0; k < n; ++k) text += vocab[pick(rng)];
        try {
            VectorField X = parse_vfield(text, zs[zpick(rng)]);
            (void)X;
            ++parsed;
        } catch (const ParseError& e) {
            EXPECT_GE(e.line, 1) << text;
            EXPECT_GE(e.column, 1) << text;
            ++diagnosed;
        } catch (const Error& e) {
            const auto* at = dynamic_cast<const Located*>(&e);
            ASSERT_NE(at, nullptr) << e.what() << " for input: " << text;
            EXPECT_GE(at->column, 1) << text;
            ++diagnosed;
        } catch (const std::exception& e) {
            ADD_FAILURE() << "unexpected exception '" << e.what() << "' for input: " << text;
        }
    }
    EXPECT_GT(parsed, 1000);
    EXPECT_GT(diagnosed, 1000);
}
