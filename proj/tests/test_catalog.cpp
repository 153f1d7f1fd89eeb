#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "vlasym/catalog.hpp"

using namespace vlasym;

namespace {

const ParamRat mu = sym("mu");
const ParamRat k = sym("k");

Expr E(const char* text, std::optional<Rational> z = std::nullopt) { return parse_expr(text, z); }

void expect_table(const Representation& rep, const ParamRat& ek, const ParamRat& eq) {
    StructureTable t = verify_table(rep);
    ASSERT_TRUE(t.k.has_value()) << rep.name;
    EXPECT_EQ(*t.k, ek) << rep.name << " k = " << print(*t.k);
    EXPECT_EQ(*t.q, eq) << rep.name << " q = " << print(*t.q);
    EXPECT_EQ(t.pairs.size(), 15u);
    for (auto& p : t.pairs) EXPECT_TRUE(p.ok) << rep.name << " " << p.name << ": " << print(p.difference);
}

void expect_symmetries(const Representation& rep) {
    for (auto& c : verify_symmetries(rep)) {
        EXPECT_TRUE(c.ok()) << rep.name << " " << c.generator << " lambda=" << print(c.report.lambda)
                            << " res_r=" << print(c.report.residual_r) << " res_v=" << print(c.report.residual_v)
                            << " scalar=" << print(c.report.residual_scalar);
        if (c.matches_stated) {
            EXPECT_TRUE(*c.matches_stated) << rep.name << " " << c.generator << " lambda=" << print(c.report.lambda);
        }
    }
}

const Rational kZs[] = {Rational(2), Rational(3), Rational(-1), Rational(1, 2)};

} // namespace

TEST(Standard, BracketsAndTable) {
    Representation s = make_standard();
    EXPECT_TRUE(vf_bracket(s.X(0), s.Y(0)).is_zero());
    EXPECT_EQ(vf_bracket(s.X(1), s.Y(-1)), ParamRat(2) * s.Y(0));
    // [Y0, Y-1] = mu Y-1, so (k, q) = (0, mu)
    expect_table(s, ParamRat(0), mu);
}

TEST(Standard, Multipliers) {
    Representation s = make_standard();
    auto y1 = symmetry_multiplier(s.boltzmann, s.Y(1));
    EXPECT_TRUE(y1.ok);
    EXPECT_TRUE(y1.lambda.is_zero());
    EXPECT_TRUE(y1.rho->is_zero());
    auto x1 = symmetry_multiplier(s.boltzmann, s.X(1));
    EXPECT_EQ(x1.lambda, E("-2*t"));
    EXPECT_EQ(*x1.rho, ParamRat(2) * (mu * sym("x") - sym("gamma")));
}

TEST(Standard, InfiniteFamily) {
    Representation s = make_standard();
    for (int n = -1; n <= 1; ++n) {
        auto [X, Y] = make_standard_n(n);
        EXPECT_EQ(X, s.X(n)) << n;
        EXPECT_EQ(Y, s.Y(n)) << n;
    }
    auto [X2, Y2] = make_standard_n(2);
    EXPECT_EQ(vf_bracket(X2, s.X(-1)), ParamRat(3) * s.X(1));
    EXPECT_EQ(vf_bracket(X2, s.Y(-1)), ParamRat(3) * s.Y(1));
    (void)Y2;
    EXPECT_THROW(make_standard_n(-2), InvalidArgument);

    // [S, X2] = -3t^2 S + 6t(mu x - gamma): rejected unless gamma = mu x
    auto rep = symmetry_multiplier(s.boltzmann, X2);
    EXPECT_EQ(rep.lambda, E("-3*t^2"));
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.residual_scalar, E("6*t*(mu*x - gamma)"));
    auto fixed = symmetry_multiplier(s.boltzmann, X2.subst_param("gamma", mu * sym("x")));
    EXPECT_TRUE(fixed.ok);
    EXPECT_EQ(fixed.lambda, E("-3*t^2"));
}

TEST(Standard, MuZeroRejected) {
    EXPECT_THROW(make_standard({{"mu", ParamRat(0)}}), InvalidArgument);
}

TEST(CaseA, TableAndSymmetries) {
    for (const Rational& z : kZs) {
        Representation a = make_caseA(z);
        expect_table(a, ParamRat(0), -mu);
        expect_symmetries(a);
    }
    EXPECT_EQ(symmetry_multiplier(make_caseA(Rational(3)).boltzmann, make_caseA(Rational(3)).X(1)).lambda, E("-2*t"));
    EXPECT_THROW(make_caseA(Rational(0)), InvalidArgument);
    // z = 1 is admissible for case A itself
    expect_table(make_caseA(Rational(1)), ParamRat(0), -mu);
}

TEST(CaseB1, TableAndSymmetries) {
    for (const Rational& z : kZs) {
        Representation b = make_caseB1(z);
        expect_table(b, ParamRat(0), -mu);
        expect_symmetries(b);
    }
    auto b = make_caseB1(Rational(2));
    EXPECT_EQ(symmetry_multiplier(b.boltzmann, b.X(1)).lambda, E("-2*t - A110/mu*v^(-2)"));
}

TEST(CaseB1, ReducesToCaseA) {
    for (const Rational& z : kZs) {
        Representation b = make_caseB1(z, {{"A110", ParamRat(0)}});
        Representation a = make_caseA(z);
        for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(b.basis[i], a.basis[i]);
    }
}

TEST(CaseB1, ZOneNeedsA110Zero) {
    try {
        make_caseB1(Rational(1));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("set A110=0 before z"), std::string::npos);
    }
    EXPECT_NO_THROW(make_caseB1(Rational(1), {{"A110", ParamRat(0)}}));
}

TEST(CaseB2, TableAndSymmetries) {
    for (const Rational& z : kZs) {
        Representation b = make_caseB2(z);
        expect_table(b, mu, ParamRat(1) - mu);
        expect_symmetries(b);
    }
}

TEST(CaseB2, MultipliersFromTheDtComponent) {
    // lambda = L(A_t)/mu; with A_t = -(t^2 + mu r^2 v^-2) this is -2(t + r/v) for every z
    for (const Rational& z : kZs) {
        Representation b = make_caseB2(z);
        EXPECT_EQ(symmetry_multiplier(b.boltzmann, b.X(1)).lambda, E("-2*t - 2*r*v^(-1)"));
        EXPECT_EQ(symmetry_multiplier(b.boltzmann, b.Y(1)).lambda, E("-2*t - 2*r*v^(-1)"));
        EXPECT_EQ(symmetry_multiplier(b.boltzmann, b.Y(0)).lambda, Expr(-1));
    }
    Representation b = make_caseB2(Rational(2));
    EXPECT_EQ(vf_bracket(b.Y(0), b.Y(-1)), ParamRat(mu) * b.X(-1) + (ParamRat(1) - mu) * b.Y(-1));
}

TEST(Example1, TableAndSymmetries) {
    for (const Rational& z : kZs) {
        Representation e = make_example1(z);
        expect_table(e, k, (k - mu * mu) / mu);
        expect_symmetries(e);
    }
    Representation e = make_example1(Rational(3));
    EXPECT_EQ(symmetry_multiplier(e.boltzmann, e.Y(0)).lambda, Expr(-k / mu));
    EXPECT_EQ(symmetry_multiplier(e.boltzmann, e.X(1)).lambda, E("-2*(t + k/(3*mu)*r*v^(-1))"));
}

TEST(Example1, ConstraintSystem) {
    for (Rational z : {Rational(2), Rational(3), Rational(-1), Rational(1, 2)}) {
        auto res = verify_example1_system(z);
        EXPECT_EQ(res.size(), 31u);
        for (auto& r : res) EXPECT_TRUE(r.ok()) << r.equation << " at z=" << z.str() << ": " << print(r.residual);
    }
    EXPECT_THROW(verify_example1_system(Rational(1)), InvalidArgument);
}

TEST(Example1, FormsMatchHandValues) {
    const Rational z(2);
    auto f = example1_forms(z);
    // a0 = (k/z)/u with u in the v slot
    EXPECT_EQ(f.a0, E("k/2*v^(-1)"));
    EXPECT_EQ(f.d0, E("-mu*x/2"));
    EXPECT_EQ(f.D, E("mu^2*x/2*v^(-1)"));
}

TEST(Example2, TableAndSymmetriesAtZ2) {
    Representation e = make_example2_z2();
    expect_table(e, ParamRat(0), -mu);
    expect_symmetries(e);
    EXPECT_EQ(symmetry_multiplier(e.boltzmann, e.X(1)).lambda, E("-2*t"));
    EXPECT_EQ(e.force, E("phi0*r^(-3)"));
}

TEST(Example2, ClosedFormsSolveTheReducedEquations) {
    auto res = example2_z2_ode_residuals();
    EXPECT_TRUE(res.b12_equation.is_zero()) << print(res.b12_equation);
    EXPECT_TRUE(res.d12_equation.is_zero()) << print(res.d12_equation);
    auto d = example2_z2_data();
    ParamValues pv{{"mu", 1.0}, {"x", 1.0}, {"phi0", 1.0}};
    EXPECT_DOUBLE_EQ(d.d12.eval({0, 1, 1}, pv), -0.5);
}

TEST(Example2, SpecializedParametersStillClose) {
    Bindings p{{"mu", ParamRat(Rational(3, 2))}, {"b120", ParamRat(2)}, {"b121", ParamRat(-1)}};
    Representation e = make_example2_z2(p);
    expect_table(e, ParamRat(0), ParamRat(Rational(-3, 2)));
    expect_symmetries(e);
}

TEST(Table, DetectsCorruption) {
    Representation s = make_standard();
    s.basis[2].dt = s.basis[2].dt + E("t^3");
    StructureTable t = verify_table(s);
    ASSERT_TRUE(t.k.has_value());
    std::vector<std::string> failed;
    for (auto& p : t.pairs)
        if (!p.ok) {
            failed.push_back(p.name);
            EXPECT_FALSE(p.difference.is_zero());
        }
    EXPECT_EQ(failed, (std::vector<std::string>{"[X[-1],X[1]]", "[X[0],X[1]]", "[X[1],Y[0]]",
                                                "[X[1],Y[1]]"}));
    EXPECT_FALSE(t.ok());
}

TEST(Table, SequentialAndParallelAgree) {
    Representation b = make_caseB2(Rational(3));
    StructureTable a = verify_table(b, true), c = verify_table(b, false);
    ASSERT_EQ(a.pairs.size(), c.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        EXPECT_EQ(a.pairs[i].name, c.pairs[i].name);
        EXPECT_EQ(a.pairs[i].ok, c.pairs[i].ok);
    }
}

TEST(Split, CaseB2Witness) {
    Representation b = make_caseB2(Rational(2));
    SplitWitness w = split_isomorphism(mu, ParamRat(1) - mu, b.basis);
    EXPECT_EQ(w.alpha, ParamRat(1));
    EXPECT_EQ(w.beta, mu);
    EXPECT_EQ(w.alpha * w.beta, mu);
    EXPECT_EQ(w.alpha - w.beta, ParamRat(1) - mu);
    EXPECT_TRUE(w.commute);
    EXPECT_TRUE(w.ell_witt);
    EXPECT_TRUE(w.ell_bar_witt);
}

TEST(Split, KZero) {
    auto [a, b] = split_constants(ParamRat(0), -mu);
    EXPECT_TRUE(a.is_zero());
    EXPECT_EQ(b, mu);
    SplitWitness w = split_isomorphism(ParamRat(0), -mu, make_caseA(Rational(2)).basis);
    EXPECT_TRUE(w.ok());
}

TEST(Split, Example1) {
    Representation e = make_example1(Rational(2));
    SplitWitness w = split_isomorphism(k, (k - mu * mu) / mu, e.basis);
    EXPECT_EQ(w.alpha, k / mu);
    EXPECT_EQ(w.beta, mu);
    EXPECT_TRUE(w.ok());
}

TEST(Split, NoRationalWitnessFallsBackToNumbers) {
    // (k, q) = (k, 0) symbolically: q^2 + 4k = 4k is not a square
    EXPECT_THROW(split_constants(k, ParamRat(0)), DomainError);
    EXPECT_THROW(split_constants(ParamRat(-1), ParamRat(2)), DomainError);  // q^2 + 4k = 0

    // X_n = l_n + lb_n, Y_n = eps (l_n - lb_n) realises (k, q) = (eps^2, 0); at eps = sqrt 2 no rational pair exists
    std::array<VectorField, 6> basis;
    for (int n = -1; n <= 1; ++n) {
        const Expr l = -Expr::var(Var::t).pow(n + 1), lb = -Expr::var(Var::r).pow(n + 1);
        basis[static_cast<std::size_t>(n + 1)] = VectorField{l, lb, {}, {}};
        basis[static_cast<std::size_t>(n + 4)] = VectorField{Expr::param("eps") * l, -Expr::param("eps") * lb, {}, {}};
    }
    const std::vector<Point> pts = {{0.3, 0.7, 1.0}, {1.2, 0.4, 1.0}, {-0.8, 1.9, 1.0}};
    ParamValues good{{"eps", std::sqrt(2.0)}, {"k", 2.0}};
    NumericSplit s = split_isomorphism_numeric(k, ParamRat(0), basis, good, pts);
    EXPECT_TRUE(s.ok) << s.max_residual;
    EXPECT_NEAR(s.alpha, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s.beta, std::sqrt(2.0), 1e-15);

    ParamValues bad{{"eps", std::sqrt(2.0)}, {"k", 3.0}};
    EXPECT_FALSE(split_isomorphism_numeric(k, ParamRat(0), basis, bad, pts).ok);
}

TEST(NoGo, ObstructionVanishesAtZOne) {
    EXPECT_TRUE(nogo_obstruction(Rational(1)).is_zero());
    EXPECT_THROW(nogo_obstruction(Rational(0)), InvalidArgument);
}

TEST(NoGo, CandidateClosesWithTimeTranslation) {
    for (Rational z : {Rational(2), Rational(3), Rational(-1), Rational(1, 2)}) {
        Representation a = make_caseA(z);
        EXPECT_EQ(vf_bracket(nogo_x2(z), a.X(-1)), ParamRat(3) * a.X(1)) << z.str();
        EXPECT_EQ(vf_bracket(nogo_x2(z), a.X(0)), ParamRat(2) * nogo_x2(z)) << z.str();
    }
}

TEST(NoGo, HalvedVelocityTermBreaksTimeLowering) {
    // c2 = 3(1-z)/z (v t^2/2 - mu r t) is incompatible with [X[2], X[-1]] = 3 X[1]
    const Rational z(2);
    VectorField halved = nogo_x2(z);
    halved.dv = parse_expr("-3*(1-z)/z*(v*t^2/2 - mu*r*t)", z);
    Representation a = make_caseA(z);
    EXPECT_FALSE((vf_bracket(halved, a.X(-1)) - ParamRat(3) * a.X(1)).is_zero());
}

TEST(NoGo, TimeDependentRemainderCancelsForEveryZ) {
    // with the lowering-consistent candidate the t-dependent part of [X[2], Y[-1]] - 3 Y[1] is zero
    for (Rational z : {Rational(1), Rational(2), Rational(3), Rational(-1), Rational(1, 2)})
        EXPECT_TRUE(nogo_obstruction(z).is_zero()) << z.str() << ": " << print(nogo_obstruction(z));
}

TEST(NoGo, CompletedCandidateExtendsCaseA) {
    for (Rational z : {Rational(2), Rational(3), Rational(-1), Rational(1, 2)}) {
        Representation a = make_caseA(z);
        const VectorField X2 = nogo_completed_x2(z);
        EXPECT_EQ(vf_bracket(X2, a.X(-1)), ParamRat(3) * a.X(1)) << z.str();
        EXPECT_EQ(vf_bracket(X2, a.X(0)), ParamRat(2) * X2) << z.str();
        EXPECT_EQ(vf_bracket(X2, a.Y(-1)), ParamRat(3) * a.Y(1)) << z.str();
        const VectorField Y2 = Expr(Rational(1, 2)) * vf_bracket(X2, a.Y(0));
        EXPECT_TRUE(vf_bracket(X2, Y2).is_zero()) << z.str();
        EXPECT_EQ(vf_bracket(Y2, a.Y(-1)), ParamRat(3) * (-mu) * a.Y(1)) << z.str();
        auto s = symmetry_multiplier(a.boltzmann, X2);
        EXPECT_TRUE(s.ok) << z.str();
        EXPECT_EQ(s.lambda, Expr(-3) * Expr::var(Var::t).pow(2));
    }
}

TEST(Serialization, CatalogRoundTrip) {
    for (const char* name : kRepresentationNames) {
        Bindings params{{"mu", ParamRat(Rational(3, 2))}};
        if (std::string(name) == "caseB1") params["A110"] = ParamRat(Rational(-1, 3));
        Representation rep = make_representation(name, Rational(2), params);
        const std::string text = to_text(rep);
        Representation back = representation_from_text(text);
        EXPECT_EQ(back.name, rep.name);
        EXPECT_EQ(back.z, rep.z);
        for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(back.basis[i], rep.basis[i]) << name << " " << kGeneratorNames[i];
        EXPECT_EQ(back.boltzmann, rep.boltzmann) << name;
        EXPECT_EQ(to_text(back), text) << name;
    }
}

TEST(Serialization, SymbolicParametersStaySymbolic) {
    Representation rep = make_caseB2(Rational(3));
    Representation back = representation_from_text(to_text(rep));
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(back.basis[i], rep.basis[i]);
    EXPECT_TRUE(verify_table(back).ok());
}

TEST(Serialization, LocatedErrors) {
    const std::string good = to_text(make_caseA(Rational(2)));
    try {
        std::string bad = good;
        bad.replace(bad.find("X[0] = ") + 7, 0, "t^^");
        representation_from_text(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_GT(e.line, 1);
        EXPECT_GT(e.column, 7);
    }
    EXPECT_THROW(representation_from_text("name = caseA\nz = 2\n"), ParseError);
    EXPECT_THROW(representation_from_text("bogus = 1\n"), ParseError);
}
