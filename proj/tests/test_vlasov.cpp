#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vlasym/vlasov.hpp"

using namespace vlasym;

namespace {

const Rational kTwo(2);
const std::vector<double> kEps = {1e-2, 5e-3, 2.5e-3};
const ParamValues kParams{{"mu", 1.3}, {"x", 0.7}, {"k", 1.0}, {"A110", 0.4}};
constexpr double kMu = 1.3;

double gaussian(double a, double b) { return std::exp(-0.3 * (a - 1) * (a - 1) - 0.2 * (b - 0.5) * (b - 0.5)); }

} // namespace

TEST(Characteristics, FreeStreaming) {
    CharState e = integrate_characteristic(zero_force(), 1.0, {0, 1, 2}, 1.0, 1e-2);
    EXPECT_DOUBLE_EQ(e.t, 1.0);
    EXPECT_NEAR(e.r, 3.0, 1e-14);
    EXPECT_EQ(e.v, 2.0);
    CharState back = integrate_characteristic(zero_force(), 1.0, e, 0.0, 1e-2);
    EXPECT_NEAR(back.r, 1.0, 1e-14);
}

TEST(Characteristics, Example1ConservesU) {
    // u = r v is constant when F = -v^2 / r
    for (CharState s : {CharState{0, 1, 0.5}, CharState{0.2, 1.5, 1.2}, CharState{0, 0.8, 2.0}}) {
        std::vector<CharState> path;
        integrate_characteristic(example1_force(kTwo), 1.0, s, s.t + 1.0, 1e-4, &path);
        for (auto& p : path) EXPECT_NEAR(p.r * p.v, s.r * s.v, 1e-10);
    }
}

TEST(Characteristics, InverseSquareEnergyDrift) {
    // F = phi0 r^-3 conserves v^2 / 2 + phi0 / (2 r^2)
    ForceField F = general_phi_force(kTwo, ScalarFn::constant(1.0));
    auto energy = [](const CharState& s) { return s.v * s.v / 2 + 1.0 / (2 * s.r * s.r); };
    const CharState s{0, 1.0, 0.3};
    const CharState e = integrate_characteristic(F, 1.0, s, 2.0, 1e-3);
    EXPECT_LE(std::abs(energy(e) - energy(s)) / 2.0, 1e-8);
}

TEST(Characteristics, FourthOrderUnderHalving) {
    // example1 at z = 2: r^2 - 2 u t / mu and u are both invariant
    auto error = [](double h) {
        const CharState s{0, 1, 1};
        const CharState e = integrate_characteristic(example1_force(kTwo), 1.0, s, 1.0, h);
        const double u = e.r * e.v;
        return std::abs(e.r * e.r - 2 * u * e.t - 1.0) + std::abs(u - 1.0);
    };
    double prev = error(0.1);
    for (double h : {0.05, 0.025}) {
        const double cur = error(h);
        EXPECT_GE(prev / cur, 8.0) << h;
        prev = cur;
    }
}

TEST(Characteristics, AbortsWhenRLeavesTheDomain) {
    try {
        integrate_characteristic(zero_force(), 1.0, {0, 0.5, -1}, 1.0, 1e-2);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("r <= 0"), std::string::npos);
    }
    EXPECT_THROW(integrate_characteristic(zero_force(), 1.0, {0, 1, 1}, 1.0, 0.0), InvalidArgument);
}

TEST(ExactSolution, ZeroFamilyCharacteristicInvariant) {
    ExactSolution f = exact_solution(ForceFamily::zero, kTwo, kMu, [](double a, double) { return a; });
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> box(0.1, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = box(rng), r = box(rng), v = box(rng);
        EXPECT_DOUBLE_EQ(f(t, r, v), r - v * t / kMu);
        // f_t = -v / mu, f_r = 1
        EXPECT_LE(std::abs(kMu * (-v / kMu) + v * 1.0), 1e-12);
    }
}

TEST(ExactSolution, Example1Profiles) {
    ExactSolution f = exact_solution(ForceFamily::example1, kTwo, kMu, [](double, double b) { return b; });
    std::mt19937 rng(52);
    std::uniform_real_distribution<double> box(0.5, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double t = box(rng), r = box(rng), v = box(rng);
        EXPECT_NEAR(f(t, r, v), r * r - 2 * r * v * t / kMu, 1e-13);
        // hand derivatives of r^2 - 2 r v t / mu under mu Dt + v Dr - v^2 / r Dv
        const double ft = -2 * r * v / kMu, fr = 2 * r - 2 * v * t / kMu, fv = -2 * r * t / kMu;
        EXPECT_LE(std::abs(kMu * ft + v * fr - v * v / r * fv), 1e-12);
    }
    Representation e1 = make_example1(kTwo);
    ExactSolution g = exact_solution(ForceFamily::example1, kTwo, kMu, gaussian);
    EXPECT_LE(solution_residual(e1.boltzmann, g, kParams, point_cloud(200)), 1e-10);
    EXPECT_THROW(exact_solution(ForceFamily::general_phi, kTwo, kMu, gaussian), InvalidArgument);
}

TEST(ExactSolution, CharacteristicPullbackSolvesGeneralPhi) {
    ForceField F = general_phi_force(kTwo, ScalarFn::constant(1.0));
    ExactSolution f = characteristic_solution(F, kMu, gaussian, 0.0, 1e-3);
    Representation e2 = make_example2_z2();
    const ParamValues pv{{"mu", kMu}, {"phi0", 1.0}};
    EXPECT_LE(solution_residual(e2.boltzmann, f, pv, point_cloud(20)), 1e-8);
}

TEST(Constancy, ExactSolutionsAreTransported) {
    const std::vector<CharState> starts = {{0, 1, 1}, {0.1, 0.7, 1.5}, {0.5, 1.8, 0.6}};
    ExactSolution e1 = exact_solution(ForceFamily::example1, kTwo, kMu, gaussian);
    EXPECT_LE(constancy_along_characteristics(example1_force(kTwo), kMu, e1.f, starts, 1.5, 1e-3), 1e-9);
    ExactSolution z = exact_solution(ForceFamily::zero, kTwo, kMu, gaussian);
    EXPECT_LE(constancy_along_characteristics(zero_force(), kMu, z.f, starts, 1.5, 1e-2), 1e-11);
    auto time = [](double t, double, double) { return t; };
    EXPECT_NEAR(constancy_along_characteristics(zero_force(), kMu, time, {{0, 1, 1}}, 2.0, 1e-2), 2.0, 1e-12);
}

TEST(Constancy, TrajectoryCsv) {
    ExactSolution z = exact_solution(ForceFamily::zero, kTwo, 1.0, [](double a, double) { return a; });
    auto rows = trajectory_samples(zero_force(), 1.0, z.f, {0, 1, 2}, 1.0, 0.5);
    ASSERT_EQ(rows.size(), 3u);
    const std::string csv = to_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,r,v,f,residual");
    EXPECT_NEAR(rows.back().p.r, 3.0, 1e-14);
}

TEST(FirstOrder, CaseASpecialConformal) {
    Representation a = make_caseA(kTwo);
    ExactSolution f = exact_solution(ForceFamily::zero, kTwo, kMu, [](double p, double) { return p; });
    FirstOrderResult r = symmetry_firstorder_check(a, f, 2, kEps, kParams);
    EXPECT_FALSE(r.exact);
    EXPECT_NEAR(r.slope, 2.0, 0.1);
    EXPECT_EQ(r.discarded, 0u);
    EXPECT_EQ(r.samples.size(), r.used);
}

TEST(FirstOrder, Example1Dilation) {
    Representation e = make_example1(kTwo);
    ExactSolution f = exact_solution(ForceFamily::example1, kTwo, kMu, gaussian);
    FirstOrderResult r = symmetry_firstorder_check(e, f, 4, kEps, kParams);
    EXPECT_GE(r.slope, 1.9);
}

TEST(FirstOrder, EveryGeneratorIsSecondOrder) {
    struct Case {
        Representation rep;
        ForceFamily family;
    };
    const Case cases[] = {{make_caseA(kTwo), ForceFamily::zero},
                          {make_caseB1(kTwo), ForceFamily::zero},
                          {make_caseB2(kTwo), ForceFamily::zero},
                          {make_example1(kTwo), ForceFamily::example1}};
    for (const Case& c : cases) {
        ExactSolution f = exact_solution(c.family, kTwo, kMu, gaussian);
        for (std::size_t g = 0; g < 6; ++g) {
            FirstOrderResult r = symmetry_firstorder_check(c.rep, f, g, kEps, kParams);
            EXPECT_TRUE(r.second_order()) << c.rep.name << " " << kGeneratorNames[g] << " slope " << r.slope;
        }
    }
}

TEST(FirstOrder, CorruptedGeneratorIsFirstOrder) {
    for (auto [rep, family] : {std::pair{make_caseA(kTwo), ForceFamily::zero}, std::pair{make_example1(kTwo), ForceFamily::example1}}) {
        ExactSolution f = exact_solution(family, kTwo, kMu, gaussian);
        VectorField bad = rep.X(1);
        bad.dt = Expr(2) * bad.dt;
        FirstOrderResult r = symmetry_firstorder_check(rep.boltzmann, f, bad, kEps, kParams);
        EXPECT_FALSE(r.exact);
        EXPECT_LE(r.slope, 1.3) << rep.name;
    }
}

TEST(FirstOrder, DiscardsPointsOutsideTheDomain) {
    Representation e = make_example1(Rational(3, 2));
    ExactSolution f = exact_solution(ForceFamily::example1, Rational(3, 2), kMu, gaussian);
    std::vector<Point> cloud = point_cloud(10);
    cloud.push_back({0.5, -1.0, 1.0});
    FirstOrderResult r = symmetry_firstorder_check(e, f, 2, kEps, kParams, cloud);
    EXPECT_EQ(r.discarded, 1u);
    EXPECT_EQ(r.used, 10u);
    EXPECT_THROW(symmetry_firstorder_check(e, f, 6, kEps, kParams), InvalidArgument);
}
