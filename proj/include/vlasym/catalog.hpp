#pragma once

// Representations of the conformal algebra on (t, r, v), their structure
// tables, the isomorphism split, the no-go obstruction and the Example 1
// constraint system.

#include <array>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vlasym/error.hpp"
#include "vlasym/exprparse.hpp"
#include "vlasym/vectorfield.hpp"
#include "vlasym/ztemplate.hpp"

namespace vlasym {

inline constexpr std::array<const char*, 6> kGeneratorNames = {"X[-1]", "X[0]", "X[1]", "Y[-1]", "Y[0]", "Y[1]"};

/// Index of a generator name in basis order, or -1.
inline int generator_index(std::string_view name) {
    for (std::size_t i = 0; i < kGeneratorNames.size(); ++i)
        if (name == kGeneratorNames[i]) return static_cast<int>(i);
    return -1;
}

struct Representation {
    std::string name;
    std::optional<Rational> z;
    Bindings params;                      // assigned parameters; the rest stay symbolic
    std::vector<std::string> param_names; // parameters the representation depends on
    std::array<VectorField, 6> basis;     // X[-1], X[0], X[1], Y[-1], Y[0], Y[1]
    VectorField boltzmann;
    Expr force;
    // expected multipliers lambda in [B, G] = lambda B, where known
    std::array<std::optional<Expr>, 6> stated_lambda;

    const VectorField& X(int n) const { return basis[static_cast<std::size_t>(n + 1)]; }
    const VectorField& Y(int n) const { return basis[static_cast<std::size_t>(n + 4)]; }
};

namespace detail {

inline void require_mu(const Bindings& params) {
    auto it = params.find("mu");
    if (it != params.end() && it->second.is_zero()) throw InvalidArgument("mu = 0 is not supported (contraction limit)");
}

inline void require_z(const Rational& z, const char* rep) {
    if (z.is_zero()) throw InvalidArgument(std::string(rep) + ": z = 0 is not admissible");
}

inline Expr bind(Expr e, const Bindings& params) {
    for (auto& [name, value] : params) e = e.subst_param(name, value);
    return e;
}

inline VectorField bind(VectorField X, const Bindings& params) {
    for (auto& [name, value] : params) X = X.subst_param(name, value);
    return X;
}

inline Representation from_templates(std::string name, std::optional<Rational> z, const Bindings& params,
                                     std::vector<std::string> names, const std::array<const char*, 6>& gens,
                                     const char* boltzmann, const std::array<const char*, 6>& lambdas) {
    Representation rep;
    rep.name = std::move(name);
    rep.z = z;
    rep.params = params;
    rep.param_names = std::move(names);
    for (std::size_t i = 0; i < 6; ++i) rep.basis[i] = parse_vfield(gens[i], z, params);
    rep.boltzmann = parse_vfield(boltzmann, z, params);
    rep.force = rep.boltzmann.dv;
    for (std::size_t i = 0; i < 6; ++i)
        if (lambdas[i]) rep.stated_lambda[i] = parse_expr(lambdas[i], z, params);
    return rep;
}

} // namespace detail

// --- section 1: the standard representation -------------------------------

/// X_n, Y_n of the infinite family on (t, r); n >= -1 keeps everything polynomial.
inline std::pair<VectorField, VectorField> make_standard_n(int n, const Bindings& params = {}) {
    if (n < -1) throw InvalidArgument("make_standard_n: n <= -2 needs negative powers of (t + mu r)");
    detail::require_mu(params);
    const Expr t = Expr::var(Var::t), r = Expr::var(Var::r);
    const Expr mu = Expr::param("mu"), x = Expr::param("x"), gamma = Expr::param("gamma");
    const Expr w = t + mu * r;
    const Expr n1(n + 1);
    VectorField X, Y;
    X.dt = -t.pow(n + 1);
    X.dr = -(w.pow(n + 1) - t.pow(n + 1)) / mu;
    if (n != -1) {
        X.scalar = -n1 * x * t.pow(n) - n1 * gamma / mu * (w.pow(n) - t.pow(n));
        Y.scalar = -n1 * gamma * w.pow(n);
    }
    Y.dr = -w.pow(n + 1);
    return {detail::bind(X, params), detail::bind(Y, params)};
}

inline Representation make_standard(const Bindings& params = {}) {
    detail::require_mu(params);
    return detail::from_templates(
        "standard", std::nullopt, params, {"mu", "x", "gamma"},
        {"-Dt", "-t*Dt - r*Dr - x", "-t^2*Dt - 2*t*r*Dr - mu*r^2*Dr - 2*x*t - 2*gamma*r", "-Dr",
         "-t*Dr - mu*r*Dr - gamma", "-t^2*Dr - 2*mu*t*r*Dr - mu^2*r^2*Dr - 2*gamma*t - 2*gamma*mu*r"},
        "-mu*Dt + Dr", {"0", "-1", "-2*t", "0", "0", "0"});
}

// --- section 2: no force --------------------------------------------------

inline constexpr const char* kCaseAX0 = "-t*Dt - r/z*Dr - (1-z)/z*v*Dv - x/z";
inline constexpr const char* kCaseAX1 = "-t^2*Dt - (2/z*t*r + (z-2)/z*mu*r^2*v^(-1))*Dr"
                                        " - 2*(1-z)/z*(v*t - mu*r)*Dv - 2/z*x*t + 2/z*mu*x*r*v^(-1)";
inline constexpr const char* kCaseAY1 = "-(t^2*v - 2/z*mu*t*r - (z-2)/z*mu^2*r^2*v^(-1))*Dr"
                                        " - 2/z*(z-1)*mu*(v*t - mu*r)*Dv + 2/z*mu*x*t - 2/z*mu^2*x*r*v^(-1)";

inline Representation make_caseA(const Rational& z, const Bindings& params = {}) {
    detail::require_z(z, "caseA");
    detail::require_mu(params);
    return detail::from_templates("caseA", z, params, {"mu", "x"},
                                  {"-Dt", kCaseAX0, kCaseAX1, "-v*Dr",
                                   "-(t*v - mu/z*r)*Dr - (z-1)/z*mu*v*Dv + mu*x/z", kCaseAY1},
                                  "mu*Dt + v*Dr", {"0", "-1", "-2*t", "0", "0", "0"});
}

inline Representation make_caseB1(const Rational& z, const Bindings& params = {}) {
    detail::require_z(z, "caseB1");
    detail::require_mu(params);
    if (z.is_one()) {
        auto it = params.find("A110");
        if (it == params.end() || !it->second.is_zero()) throw DomainError("caseB1: set A110=0 before z->1");
        Representation rep = make_caseA(z, params);
        rep.name = "caseB1";
        rep.param_names.push_back("A110");
        return rep;
    }
    return detail::from_templates(
        "caseB1", z, params, {"mu", "x", "A110"},
        {"-Dt", kCaseAX0,
         "-(t^2 + A110*r*v^((2*z-1)/(1-z)) + A110^2/(4*mu^2)*v^(2*z/(1-z)))*Dt"
         " - (2/z*t*r + (z-2)/z*mu*r^2*v^(-1) + A110/mu*r*v^(z/(1-z)) + A110^2/(4*mu^3)*v^((z+1)/(1-z)))*Dr"
         " - 2*(1-z)/z*(v*t - mu*r)*Dv - 2/z*x*t + 2/z*mu*x*r*v^(-1)",
         "-v*Dr",
         "-A110/2*v^(z/(1-z))*Dt - (t*v - mu/z*r + A110/(2*mu)*v^(1/(1-z)))*Dr - (z-1)/z*mu*v*Dv + mu*x/z",
         "-A110*(t*v^(z/(1-z)) - mu*r*v^((2*z-1)/(1-z)))*Dt"
         " - (t^2*v - 2/z*mu*t*r - (z-2)/z*mu^2*r^2*v^(-1) + A110/mu*(t*v^(1/(1-z)) - mu*r*v^(z/(1-z))))*Dr"
         " - 2/z*(z-1)*mu*(v*t - mu*r)*Dv + 2/z*mu*x*t - 2/z*mu^2*x*r*v^(-1)"},
        "mu*Dt + v*Dr", {"0", "-1", "-(2*t + A110/mu*v^(z/(1-z)))", "0", "0", "0"});
}

/// Y[1] is [X[1], Y[0]]: the t r term of its Dr component enters with a plus sign.
/// The X[1] and Y[1] multipliers are the ones forced by the Dt components.
inline Representation make_caseB2(const Rational& z, const Bindings& params = {}) {
    detail::require_z(z, "caseB2");
    detail::require_mu(params);
    return detail::from_templates(
        "caseB2", z, params, {"mu", "x"},
        {"-Dt", kCaseAX0,
         "-(t^2 + mu*r^2*v^(-2))*Dt - (2/z*t*r + (z + mu*(z-2))/z*r^2*v^(-1))*Dr"
         " - 2*(1-z)/z*(v*t - mu*r)*Dv - 2/z*x*t + 2/z*mu*x*r*v^(-1)",
         "-v*Dr", "-mu*r*v^(-1)*Dt - (t*v - (mu/z - 1)*r)*Dr - (z-1)/z*mu*v*Dv + mu*x/z",
         "-mu*(2*t*r*v^(-1) + (1-mu)*r^2*v^(-2))*Dt"
         " - (t^2*v + 2/z*(z-mu)*t*r + (z*(1-mu) - (z-2)*mu^2)/z*r^2*v^(-1))*Dr"
         " - 2/z*(z-1)*mu*(v*t - mu*r)*Dv + 2/z*mu*x*t - 2/z*mu^2*x*r*v^(-1)"},
        "mu*Dt + v*Dr", {"0", "-1", "-2*(t + r*v^(-1))", "0", "-1", "-2*(t + r*v^(-1))"});
}

// --- section 3: with a force ------------------------------------------------

inline Representation make_example1(const Rational& z, const Bindings& params = {}) {
    detail::require_z(z, "example1");
    detail::require_mu(params);
    return detail::from_templates(
        "example1", z, params, {"mu", "x", "k"},
        {"-Dt", kCaseAX0,
         "-(t^2 + k/z^2*r^2*v^(-2))*Dt - (2/z*t*r + (k-mu^2)/(z^2*mu)*r^2*v^(-1))*Dr"
         " - (1-z)*(2/z*t*v + (k-mu^2)/(z^2*mu)*r)*Dv - 2/z*x*t + 2*mu*x/z^2*r*v^(-1)",
         "-v*Dr - (1-z)*r^(-1)*v^2*Dv",
         "-k/z*r*v^(-1)*Dt - (t*v + (k-mu^2)/(z*mu)*r)*Dr - (1-z)*(t*r^(-1)*v^2 + (k-mu^2)/(z*mu)*v)*Dv + mu*x/z",
         "-(2*k/z*t*r*v^(-1) + k*(k-mu^2)/(z^2*mu)*r^2*v^(-2))*Dt"
         " - (t^2*v + 2*(k-mu^2)/(z*mu)*t*r + (k*(k-mu^2) + mu^4)/(z^2*mu^2)*r^2*v^(-1))*Dr"
         " - (1-z)*(t^2*r^(-1)*v^2 + 2*(k-mu^2)/(z*mu)*t*v + (k*(k-mu^2) + mu^4)/(z^2*mu^2)*r)*Dv"
         " + 2/z*mu*x*t - 2*mu^2*x/z^2*r*v^(-1)"},
        "mu*Dt + v*Dr + (1-z)*r^(-1)*v^2*Dv",
        {"0", "-1", "-2*(t + k/(z*mu)*r*v^(-1))", "0", "-k/mu", "-2*(k/mu*t + k^2/(z*mu^2)*r*v^(-1))"});
}

/// Functions of u = r^(z-1) v that enter the Example 2 generators.
struct Example2Data {
    Expr u, phi, Phi, b12, d12, c12;
};

/// u-derivative of a function of u written in (t, r, v): d/du = r^(1-z) d/dv.
inline Expr du(const Expr& f, const Rational& z) { return f.diff(Var::v) * Expr::var(Var::r, Rational(1) - z); }

/// Example 2 generators for a given force profile phi(u) and solutions b12, d12.
inline Representation make_example2(const Rational& z, const Expr& phi, const Expr& b12, const Expr& d12,
                                    const Bindings& params = {}) {
    detail::require_z(z, "example2");
    detail::require_mu(params);
    const Expr t = Expr::var(Var::t), r = Expr::var(Var::r), v = Expr::var(Var::v);
    const Expr Z(z), mu = Expr::param("mu"), x = Expr::param("x");
    const Expr u = Expr::var(Var::r, z - Rational(1)) * v;
    const Expr Phi = Expr(z - Rational(1)) * u.pow(2) + phi;
    const Expr c12 = Expr(2) * Z * u * b12 + Phi * du(b12, z) + Expr(2) * mu / Z;
    const Expr rz = Expr::var(Var::r, z), rz1 = Expr::var(Var::r, z + Rational(1));
    const Expr r12z = Expr::var(Var::r, Rational(1) - Rational(2) * z);
    const Expr two_over_z = Expr(2) / Z;

    Representation rep;
    rep.name = "example2";
    rep.z = z;
    rep.params = params;
    rep.param_names = {"mu", "x", "phi0", "b120", "b121"};
    VectorField& Xm = rep.basis[0];
    VectorField& X0 = rep.basis[1];
    VectorField& X1 = rep.basis[2];
    VectorField& Ym = rep.basis[3];
    VectorField& Y0 = rep.basis[4];
    VectorField& Y1 = rep.basis[5];
    Xm.dt = Expr(-1);
    X0 = parse_vfield(kCaseAX0, z);
    X1.dt = -t.pow(2);
    X1.dr = -(two_over_z * t * r + rz1 * b12);
    X1.dv = -(Expr(1) - Z) * (two_over_z * t * v + rz * v * b12) - r * c12;
    X1.scalar = -two_over_z * x * t - rz * d12;
    Ym.dr = -v;
    Ym.dv = -r12z * phi;
    Y0.dr = -(t * v - mu / Z * r);
    Y0.dv = -r12z * phi * t + (Expr(1) - Z) * mu / Z * v;
    Y0.scalar = mu * x / Z;
    Y1.dr = -(t.pow(2) * v - two_over_z * mu * t * r - mu * rz1 * b12);
    Y1.dv = -t.pow(2) * r12z * phi + (Expr(1) - Z) * (two_over_z * mu * t * v + mu * rz * v * b12) + mu * r * c12;
    Y1.scalar = two_over_z * mu * x * t + mu * rz * d12;
    for (auto& G : rep.basis) G = detail::bind(G, params);
    rep.force = detail::bind(r12z * phi, params);
    rep.boltzmann = VectorField{mu, v, rep.force, {}};
    rep.boltzmann = detail::bind(rep.boltzmann, params);
    const char* lambdas[] = {"0", "-1", "-2*t", "0", "0", "0"};
    for (std::size_t i = 0; i < 6; ++i) rep.stated_lambda[i] = parse_expr(lambdas[i]);
    return rep;
}

inline Example2Data example2_z2_data(const Bindings& params = {}) {
    const Expr u = Expr::var(Var::r) * Expr::var(Var::v);
    const Expr phi0 = Expr::param("phi0");
    const Expr Phi = u.pow(2) + phi0;
    Example2Data d;
    d.u = u;
    d.phi = phi0;
    d.Phi = Phi;
    d.b12 = (Expr::param("b120") * u + Expr::param("b121") * (u.pow(2) - phi0)) / Phi.pow(2);
    d.d12 = -Expr::param("mu") * Expr::param("x") * u / Phi;
    d.c12 = Expr(4) * u * d.b12 + Phi * du(d.b12, Rational(2)) + Expr::param("mu");
    d.u = detail::bind(d.u, params);
    d.phi = detail::bind(d.phi, params);
    d.Phi = detail::bind(d.Phi, params);
    d.b12 = detail::bind(d.b12, params);
    d.d12 = detail::bind(d.d12, params);
    d.c12 = detail::bind(d.c12, params);
    return d;
}

/// Example 2 at z = 2 with constant phi = phi0 and the elementary b12, d12.
inline Representation make_example2_z2(const Bindings& params = {}) {
    detail::require_mu(params);
    const Example2Data d = example2_z2_data();
    Representation rep = make_example2(Rational(2), d.phi, d.b12, d.d12, params);
    rep.name = "example2_z2";
    return rep;
}

/// Residuals of the two reduced ODEs (constant phi) for the z = 2 closed forms.
struct Example2OdeResiduals {
    Expr b12_equation;
    Expr d12_equation;
};

inline Example2OdeResiduals example2_z2_ode_residuals(const Bindings& params = {}) {
    const Rational z(2);
    const Example2Data d = example2_z2_data(params);
    const Expr Z(z), mu = detail::bind(Expr::param("mu"), params), x = detail::bind(Expr::param("x"), params);
    const Expr b1 = du(d.b12, z), b2 = du(b1, z);
    Example2OdeResiduals out;
    out.b12_equation = d.Phi.pow(2) * b2 + Expr(3) * Z * d.u * d.Phi * b1 +
                       Z * ((Z + Expr(1)) * d.u.pow(2) + Expr(3) * d.phi) * d.b12 +
                       Expr(2) * mu * (Expr(2) - Z) / Z * d.u;
    out.d12_equation = Z * d.u * d.d12 + d.Phi * du(d.d12, z) + Expr(2) * mu * x / Z;
    return out;
}

// --- structure tables -------------------------------------------------------

struct PairCheck {
    std::size_t i = 0, j = 0;
    std::string name;          // e.g. "[X[1],Y[-1]]"
    VectorField computed;
    VectorField expected;
    VectorField difference;    // computed - expected
    bool ok = false;
};

struct StructureTable {
    std::optional<ParamRat> k, q;  // empty when [Y0, Y-1] is outside the span
    VectorField inference_remainder;
    std::vector<PairCheck> pairs;  // 15 pairs, i < j, in basis order

    bool ok() const {
        if (!k || !q) return false;
        for (auto& p : pairs)
            if (!p.ok) return false;
        return true;
    }
    std::size_t passed() const {
        std::size_t n = 0;
        for (auto& p : pairs) n += p.ok;
        return n;
    }
};

namespace detail {

inline VectorField expected_bracket(const std::array<VectorField, 6>& b, std::size_t i, std::size_t j,
                                    const ParamRat& k, const ParamRat& q) {
    const int n = static_cast<int>(i % 3) - 1, m = static_cast<int>(j % 3) - 1;
    const bool yi = i >= 3, yj = j >= 3;
    if (n == m || std::abs(n + m) > 1) return {};
    const ParamRat w(n - m);
    const std::size_t s = static_cast<std::size_t>(n + m + 1);
    if (!yi && !yj) return w * b[s];
    if (yi != yj) return w * b[s + 3];
    return (w * k) * b[s] + (w * q) * b[s + 3];
}

} // namespace detail

/// Infers (k, q) from [Y0, Y-1] = k X[-1] + q Y[-1] and checks all 15 brackets.
inline StructureTable verify_table(const std::array<VectorField, 6>& basis, bool parallel = true) {
    StructureTable table;
    const BasisExpansion ex = expand_in_basis(vf_bracket(basis[4], basis[3]), basis);
    table.inference_remainder = ex.remainder;
    const bool spanned = ex.in_span();
    for (std::size_t c : {1, 2, 4, 5})
        if (!ex.coefficients[c].is_zero()) {
            // [Y0, Y-1] must be a combination of X[-1] and Y[-1] only
            table.inference_remainder = table.inference_remainder + ex.coefficients[c] * basis[c];
        }
    if (spanned && table.inference_remainder.is_zero()) {
        table.k = ex.coefficients[0];
        table.q = ex.coefficients[3];
    }
    const ParamRat k = table.k.value_or(ParamRat(0)), q = table.q.value_or(ParamRat(0));

    auto check = [&basis, &k, &q](std::size_t i, std::size_t j) {
        PairCheck p;
        p.i = i;
        p.j = j;
        p.name = std::string("[") + kGeneratorNames[i] + "," + kGeneratorNames[j] + "]";
        p.computed = vf_bracket(basis[i], basis[j]);
        p.expected = detail::expected_bracket(basis, i, j, k, q);
        p.difference = p.computed - p.expected;
        p.ok = p.difference.is_zero();
        return p;
    };
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) idx.emplace_back(i, j);
    if (parallel) {
        std::vector<std::future<PairCheck>> jobs;
        for (auto [i, j] : idx) jobs.push_back(std::async(std::launch::async, check, i, j));
        for (auto& f : jobs) table.pairs.push_back(f.get());
    } else {
        for (auto [i, j] : idx) table.pairs.push_back(check(i, j));
    }
    return table;
}

inline StructureTable verify_table(const Representation& rep, bool parallel = true) {
    return verify_table(rep.basis, parallel);
}

struct SymmetryCheck {
    std::string generator;
    SymmetryReport report;
    bool rho_zero = false;
    std::optional<bool> matches_stated;  // empty when no multiplier is stated
    bool ok() const { return report.ok && rho_zero; }
};

/// symmetry_multiplier against the representation's Boltzmann operator for all six generators.
inline std::vector<SymmetryCheck> verify_symmetries(const Representation& rep) {
    std::vector<SymmetryCheck> out;
    for (std::size_t i = 0; i < 6; ++i) {
        SymmetryCheck c;
        c.generator = kGeneratorNames[i];
        c.report = symmetry_multiplier(rep.boltzmann, rep.basis[i]);
        c.rho_zero = c.report.rho && c.report.rho->is_zero();
        if (rep.stated_lambda[i]) c.matches_stated = c.report.lambda == *rep.stated_lambda[i];
        out.push_back(std::move(c));
    }
    return out;
}

// --- isomorphism split --------------------------------------------------------

struct SplitWitness {
    ParamRat alpha, beta;
    std::array<VectorField, 3> ell, ell_bar;  // n = -1, 0, 1
    bool commute = false;                     // [ell_n, ell_bar_m] = 0
    bool ell_witt = false;                    // [ell_n, ell_m] = (n - m) ell_{n+m}
    bool ell_bar_witt = false;
    bool ok() const { return commute && ell_witt && ell_bar_witt; }
};

/// Solves alpha beta = k, alpha - beta = q exactly.
inline std::pair<ParamRat, ParamRat> split_constants(const ParamRat& k, const ParamRat& q) {
    const ParamRat disc = q * q + ParamRat(4) * k;
    if (disc.is_zero()) throw DomainError("degenerate split: q^2 + 4k = 0");
    auto s = disc.exact_sqrt();
    if (!s) throw DomainError("no rational witness: q^2 + 4k is not a perfect square");
    ParamRat root = *s;
    if (root.num().leading().second.sign() * root.den().leading().second.sign() < 0) root = -root;
    const ParamRat alpha = (q + root) / ParamRat(2);
    return {alpha, alpha - q};
}

namespace detail {

inline bool witt_family(const std::array<VectorField, 3>& f) {
    for (int n = -1; n <= 1; ++n)
        for (int m = n + 1; m <= 1; ++m) {
            VectorField expected;
            if (std::abs(n + m) <= 1) expected = ParamRat(n - m) * f[static_cast<std::size_t>(n + m + 1)];
            if (!(vf_bracket(f[static_cast<std::size_t>(n + 1)], f[static_cast<std::size_t>(m + 1)]) - expected).is_zero())
                return false;
        }
    return true;
}

} // namespace detail

inline SplitWitness split_isomorphism(const ParamRat& k, const ParamRat& q, const std::array<VectorField, 6>& basis) {
    SplitWitness w;
    std::tie(w.alpha, w.beta) = split_constants(k, q);
    const ParamRat sum = w.alpha + w.beta;
    for (std::size_t n = 0; n < 3; ++n) {
        w.ell[n] = (w.beta / sum) * basis[n] + (ParamRat(1) / sum) * basis[n + 3];
        w.ell_bar[n] = (w.alpha / sum) * basis[n] - (ParamRat(1) / sum) * basis[n + 3];
    }
    w.commute = true;
    for (auto& a : w.ell)
        for (auto& b : w.ell_bar)
            if (!vf_bracket(a, b).is_zero()) w.commute = false;
    w.ell_witt = detail::witt_family(w.ell);
    w.ell_bar_witt = detail::witt_family(w.ell_bar);
    return w;
}

struct NumericSplit {
    double alpha = 0.0, beta = 0.0;
    double max_residual = 0.0;  // over all split relations and sample points
    bool ok = false;
};

/// Floating-point split for (k, q) without a rational witness; brackets stay
/// exact, only alpha and beta are rounded.
inline NumericSplit split_isomorphism_numeric(const ParamRat& k, const ParamRat& q, const std::array<VectorField, 6>& basis,
                                              const ParamValues& values, const std::vector<Point>& points,
                                              double tol = 1e-12) {
    NumericSplit s;
    const double kv = k.eval(values), qv = q.eval(values);
    const double disc = qv * qv + 4 * kv;
    if (disc <= 0) throw DomainError("no real split: q^2 + 4k <= 0");
    s.alpha = (qv + std::sqrt(disc)) / 2;
    s.beta = s.alpha - qv;
    const double a = s.alpha, b = s.beta, sum = a + b;

    std::array<std::array<VectorField, 6>, 6> br;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) br[i][j] = i == j ? VectorField{} : i > j ? -br[j][i] : vf_bracket(basis[i], basis[j]);
    auto eval_vf = [&](const VectorField& X, const Point& p) {
        return std::array<double, 4>{X.dt.eval(p, values), X.dr.eval(p, values), X.dv.eval(p, values),
                                     X.scalar.eval(p, values)};
    };
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::array<double, 4>>> cache;
    auto bracket_at = [&](std::size_t i, std::size_t j, std::size_t pi) {
        auto key = std::make_pair(i, j);
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::vector<std::array<double, 4>> vals;
            for (auto& p : points) vals.push_back(eval_vf(br[i][j], p));
            it = cache.emplace(key, std::move(vals)).first;
        }
        return it->second[pi];
    };
    auto basis_at = [&](std::size_t i, std::size_t pi) { return eval_vf(basis[i], points[pi]); };
    // ell_n = (b X_n + Y_n)/sum, ell_bar_n = (a X_n - Y_n)/sum
    const std::array<double, 2> ell_c{b / sum, 1 / sum}, bar_c{a / sum, -1 / sum};
    auto combo_bracket = [&](const std::array<double, 2>& c1, std::size_t n, const std::array<double, 2>& c2, std::size_t m,
                             std::size_t pi) {
        std::array<double, 4> out{};
        const std::size_t ii[2] = {n, n + 3}, jj[2] = {m, m + 3};
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                auto v = bracket_at(ii[x], jj[y], pi);
                for (int c = 0; c < 4; ++c) out[c] += c1[x] * c2[y] * v[c];
            }
        return out;
    };
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (std::size_t n = 0; n < 3; ++n)
            for (std::size_t m = 0; m < 3; ++m) {
                auto c = combo_bracket(ell_c, n, bar_c, m, pi);
                for (double v : c) s.max_residual = std::max(s.max_residual, std::abs(v));
                for (const auto* coeffs : {&ell_c, &bar_c}) {
                    auto got = combo_bracket(*coeffs, n, *coeffs, m, pi);
                    const int nn = static_cast<int>(n) - 1, mm = static_cast<int>(m) - 1;
                    std::array<double, 4> want{};
                    if (nn != mm && std::abs(nn + mm) <= 1) {
                        const std::size_t s_idx = static_cast<std::size_t>(nn + mm + 1);
                        auto xs = basis_at(s_idx, pi), ys = basis_at(s_idx + 3, pi);
                        for (int c = 0; c < 4; ++c) want[c] = (nn - mm) * ((*coeffs)[0] * xs[c] + (*coeffs)[1] * ys[c]);
                    }
                    for (int c = 0; c < 4; ++c)
                        s.max_residual = std::max(s.max_residual, std::abs(got[c] - want[c]) / std::max(1.0, std::abs(want[c])));
                }
            }
    }
    s.ok = s.max_residual <= tol;
    return s;
}

// --- no-go obstruction ----------------------------------------------------------

/// Case A candidate for X[2] with the t-dependence fixed by [X[2], X[-1]] = 3 X[1];
/// the t-independent tails are set to zero.
inline VectorField nogo_x2(const Rational& z, const Bindings& params = {}) {
    detail::require_z(z, "nogo");
    return parse_vfield("-t^3*Dt - (3/z*t^2*r + 3*(z-2)/z*mu*t*r^2*v^(-1))*Dr"
                        " - 3*(1-z)/z*(v*t^2 - 2*mu*r*t)*Dv - 3/z*x*t^2 + 6/z*mu*x*t*r*v^(-1)",
                        z, params);
}

namespace detail {

inline Expr time_dependent_part(const Expr& e) {
    if (!e.is_polynomial())
        throw InvalidArgument("time_dependent_part: expected a generalized polynomial");
    GPoly out;
    for (auto& [m, c] : e.num().terms())
        if (m[Var::t] >= Rational(1)) out.add_term(m, c);
    return Expr(out);
}

} // namespace detail

/// Projection of [X[2], Y[-1]] - 3 Y[1] onto terms with t-exponent >= 1.
inline VectorField nogo_obstruction(const Rational& z, const Bindings& params = {}) {
    const VectorField X2 = nogo_x2(z, params);
    const VectorField Ym = parse_vfield("-v*Dr", z, params);
    const VectorField Y1 = parse_vfield(kCaseAY1, z, params);
    const VectorField R = vf_bracket(X2, Ym) - ParamRat(3) * Y1;
    return {detail::time_dependent_part(R.dt), detail::time_dependent_part(R.dr), detail::time_dependent_part(R.dv),
            detail::time_dependent_part(R.scalar)};
}

namespace detail {

// Antiderivative in r of a t-independent generalized polynomial; r^-1 terms have none.
inline Expr integrate_r(const Expr& e) {
    if (e.is_zero()) return e;
    if (!e.is_polynomial()) throw InvalidArgument("integrate_r: expected a generalized polynomial");
    GPoly out;
    for (auto& [m, c] : e.num().terms()) {
        if (!m[Var::t].is_zero()) throw DomainError("integrate_r: time-dependent term");
        if (m[Var::r] == Rational(-1)) throw DomainError("integrate_r: logarithmic term in r");
        BaseMonomial n = m;
        n[Var::r] = m[Var::r] + Rational(1);
        out.add_term(n, c / ParamRat(n[Var::r]));
    }
    return Expr(out);
}

} // namespace detail

/// nogo_x2 plus time-independent tails T solving [T, Y[-1]] = 3 Y[1] - [X[2], Y[-1]] with zero
/// integration constants. Throws DomainError when the remainder is time-dependent or needs a log.
inline VectorField nogo_completed_x2(const Rational& z, const Bindings& params = {}) {
    const VectorField X2 = nogo_x2(z, params);
    const VectorField R = vf_bracket(X2, parse_vfield("-v*Dr", z, params)) - ParamRat(3) * parse_vfield(kCaseAY1, z, params);
    // [T, -v Dr] = v a_r Dt + (v b_r - c) Dr + v c_r Dv + v d_r
    const Expr v = Expr::var(Var::v), minus_one(-1);
    VectorField T;
    T.dt = detail::integrate_r(minus_one * R.dt / v);
    T.dv = detail::integrate_r(minus_one * R.dv / v);
    T.dr = detail::integrate_r((T.dv - R.dr) / v);
    T.scalar = detail::integrate_r(minus_one * R.scalar / v);
    return X2 + T;
}

// --- Example 1 constraint system -----------------------------------------------

/// Closed forms of the Example 1 (Phi = 0) unknowns as Laurent monomials in u.
/// The functions depend on u alone, so u is carried by the v slot and d/du is d/dv.
struct Example1Forms {
    Expr a0, b0, c0, d0, a12, b12, c12, d12;
    Expr A, B, C, D;          // from the Y[1] relations
    Expr A_stated, B_stated, C_stated, D_stated;
};

inline Example1Forms example1_forms(const Rational& z, const Bindings& params = {}) {
    const Expr u = Expr::var(Var::v), Z(z);
    const Expr mu = Expr::param("mu"), x = Expr::param("x"), k = Expr::param("k");
    auto d = [](const Expr& e) { return e.diff(Var::v); };
    Example1Forms f;
    f.a0 = k / Z * u.pow(-1);
    f.b0 = k / (Z * mu) - mu / Z;
    f.c0 = Expr(0);
    f.d0 = -mu * x / Z;
    f.a12 = k / Z.pow(2) * u.pow(-2);
    f.b12 = (k - mu.pow(2)) / (mu * Z.pow(2)) * u.pow(-1);
    f.c12 = Expr(0);
    f.d12 = -Expr(2) * mu * x / Z.pow(2) * u.pow(-1);
    const Expr Phi(0);
    f.A = Expr(2) * Z * f.b0 * f.a12 + f.c0 * d(f.a12) - Z * f.a0 * f.b12 - d(f.a0) * f.c12;
    f.B = Expr(2) / Z * f.a0 + Z * f.b0 * f.b12 + f.c0 * d(f.b12) - u * f.a12 - d(f.b0) * f.c12;
    f.C = Z * f.b0 * f.c12 + f.c0 * d(f.c12) - d(f.c0) * f.c12 - f.a12 * Phi;
    f.D = Expr(2) / Z * x * f.a0 + Z * f.b0 * f.d12 + f.c0 * d(f.d12);
    f.A_stated = k / (mu * Z.pow(2)) * (k - mu.pow(2)) * u.pow(-2);
    f.B_stated = (k * (k - mu.pow(2)) + mu.pow(4)) / (mu.pow(2) * Z.pow(2)) * u.pow(-1);
    f.C_stated = Expr(0);
    f.D_stated = Expr(2) * mu.pow(2) * x / Z.pow(2) * u.pow(-1);
    for (Expr* e : {&f.a0, &f.b0, &f.c0, &f.d0, &f.a12, &f.b12, &f.c12, &f.d12, &f.A, &f.B, &f.C, &f.D, &f.A_stated,
                    &f.B_stated, &f.C_stated, &f.D_stated})
        *e = detail::bind(*e, params);
    return f;
}

struct SystemResidual {
    std::string equation;
    Expr residual;
    bool ok() const { return residual.is_zero(); }
};

/// Substitutes the Example 1 closed forms into the determining system with Phi = 0
/// and q = (k - mu^2)/mu. Returns one residual per equation, in order.
inline std::vector<SystemResidual> verify_example1_system(const Rational& z, const Bindings& params = {}) {
    if (z.is_zero() || z.is_one()) throw InvalidArgument("verify_example1_system: z must differ from 0 and 1");
    detail::require_mu(params);
    const Example1Forms f = example1_forms(z, params);
    const Expr u = Expr::var(Var::v), Z(z), Phi(0), dPhi(0);
    const Expr mu = detail::bind(Expr::param("mu"), params), x = detail::bind(Expr::param("x"), params),
               k = detail::bind(Expr::param("k"), params);
    const Expr q = (k - mu.pow(2)) / mu;
    auto d = [](const Expr& e) { return e.diff(Var::v); };
    const Expr &a0 = f.a0, &b0 = f.b0, &c0 = f.c0, &d0 = f.d0, &a12 = f.a12, &b12 = f.b12, &c12 = f.c12, &d12 = f.d12;
    const Expr &A = f.A, &B = f.B, &C = f.C, &D = f.D;
    const Expr two(2), three(3);

    std::vector<SystemResidual> out;
    auto add = [&out](const char* name, Expr r) { out.push_back({name, std::move(r)}); };
    add("eq1", Z * u * a0 + Phi * d(a0) - k);
    add("eq2", Z * u * b0 + Phi * d(b0) - c0 - q * u);
    add("eq3", dPhi * c0 - Phi * d(c0) + (q - Z * b0) * Phi);
    add("eq3bis", Phi * d(d0));
    add("eq4", c12 - (two / Z * mu - u / mu * (two * Z * u * a12 + Phi * d(a12)) + (two * Z * u * b12 + Phi * d(b12))));
    add("eq5", Z * u * c12 + Phi * d(c12) - c12 * dPhi + Z * b12 * Phi - two * c0);
    add("eq6", Z * u * d12 + Phi * d(d12) + two / Z * mu * x);
    add("eq7", Phi.pow(2) * d(d(b12)) + three * Z * u * Phi * d(b12) +
                   Z * (two * Z * u.pow(2) + three * Phi - two * u * dPhi) * b12 - u / mu * Phi.pow(2) * d(d(a12)) -
                   (three * Z * u.pow(2) + two * Phi) * (Phi / mu) * d(a12) -
                   (Z * u.pow(2) + three * Phi - u * dPhi) * (two * Z * u / mu) * a12 + two * mu / Z * (Z * u - dPhi));
    add("eq8", two * Z * u * a12 + Phi * d(a12) - two * a0);
    add("eq9", two * Z * u * b12 + Phi * d(b12) - c12 - two * b0);
    add("eq10", b0 - (u / mu * a0 - mu / Z));
    add("eq11", c0 - Phi / mu * a0);
    add("eq12", d0 + mu * x / Z);
    add("eq13", two * Z * u * A + Phi * d(A) - two * q * a0);
    add("eq14", two * Z * u * B + Phi * d(B) - C - two * (k / Z + q * b0));
    add("eq15", Z * u * C + Phi * d(C) - dPhi * C + Z * Phi * B - two * q * c0);
    add("eq16", Z * u * D + Phi * d(D) - two * x / Z * (k - mu * q));
    {
        // [Y1, Y0] = K X1 + Q Y1 on the generators themselves
        const Representation rep = make_example1(z, params);
        const BasisExpansion ex = expand_in_basis(vf_bracket(rep.Y(1), rep.Y(0)), rep.basis);
        Expr K(ex.coefficients[2]), Q(ex.coefficients[5]);
        if (!ex.in_span()) K = K + Expr::var(Var::t);  // flags a non-closing bracket
        add("eq16bis:K", K - k);
        add("eq16bis:Q", Q - q);
    }
    add("eq17", (q - two * Z * b0) * A - c0 * d(A) + Z * a0 * B + d(a0) * C + k * a12 - two * a0.pow(2));
    add("eq18", (q - Z * b0) * B - c0 * d(B) + u * A + d(b0) * C + k * b12 - two * a0 * b0);
    add("eq19", (q - Z * b0 + d(c0)) * C - c0 * d(C) + Phi * A + k * c12 - two * a0 * c0);
    add("eq20", (q - Z * b0) * D - c0 * d(D) + k * d12 + two * a0 * mu * x / Z);
    add("eq21", two * Z * (b12 * A - a12 * B) + c12 * d(A) - d(a12) * C + two * a0 * a12);
    add("eq22", two / Z * A - c12 * d(B) + d(b12) * C - two * b0 * a12);
    add("eq23", (Z * b12 - d(c12)) * C + c12 * d(C) - Z * c12 * B + two * c0 * a12);
    add("eq24", two * x / Z * (mu * a12 + A) + Z * d12 * B + d(d12) * C - Z * b12 * D - c12 * d(D));
    add("A(u)", A - f.A_stated);
    add("B(u)", B - f.B_stated);
    add("C(u)", C - f.C_stated);
    add("D(u)", D - f.D_stated);
    return out;
}

// --- serialization ------------------------------------------------------------

/// Text form: `key = value` header lines, then `X[n] = <field>`, `Y[n] = <field>`, `B = <operator>`.
inline std::string to_text(const Representation& rep) {
    std::ostringstream os;
    os << "# representation\n";
    os << "name = " << rep.name << "\n";
    if (rep.z) os << "z = " << rep.z->str() << "\n";
    for (auto& p : rep.param_names) {
        auto it = rep.params.find(p);
        os << p << " = " << (it == rep.params.end() ? std::string("symbolic") : print(it->second)) << "\n";
    }
    for (std::size_t i = 0; i < 6; ++i) os << kGeneratorNames[i] << " = " << print(rep.basis[i]) << "\n";
    os << "B = " << print(rep.boltzmann) << "\n";
    return os.str();
}

inline Representation representation_from_text(std::string_view text) {
    Representation rep;
    std::array<bool, 6> seen{};
    bool have_b = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, 1);
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const int value_col = static_cast<int>(line.find_first_not_of(" \t", eq + 1)) + 1;
        auto relocate = [&](const ParseError& e) {
            return ParseError(e.message, line_no, e.line == 1 ? e.column + value_col - 1 : e.column);
        };
        try {
            if (key == "name") {
                rep.name = value;
            } else if (key == "z") {
                rep.z = Rational::parse(value);
            } else if (int gi = generator_index(key); gi >= 0) {
                rep.basis[static_cast<std::size_t>(gi)] = parse_vfield(value, rep.z, rep.params);
                seen[static_cast<std::size_t>(gi)] = true;
            } else if (key == "B") {
                rep.boltzmann = parse_vfield(value, rep.z, rep.params);
                rep.force = rep.boltzmann.dv;
                have_b = true;
            } else if (param_index(key)) {
                rep.param_names.push_back(key);
                if (value != "symbolic") {
                    const Expr e = parse_expr(value, rep.z, rep.params);
                    auto c = e.as_param_constant();
                    if (!c) throw ParseError("parameter value must be a constant", line_no, value_col);
                    rep.params[key] = *c;
                }
            } else {
                throw ParseError("unknown key '" + key + "'", line_no, 1);
            }
        } catch (const ParseError& e) {
            if (e.line != line_no) throw relocate(e);
            throw;
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), line_no, value_col);
        }
    }
    for (std::size_t i = 0; i < 6; ++i)
        if (!seen[i]) throw ParseError(std::string("missing generator ") + kGeneratorNames[i], line_no, 1);
    if (!have_b) throw ParseError("missing Boltzmann operator 'B'", line_no, 1);
    return rep;
}

/// Catalog lookup by name; `z` is ignored for the standard representation.
inline Representation make_representation(std::string_view name, const std::optional<Rational>& z, const Bindings& params) {
    auto need_z = [&]() -> Rational {
        if (!z) throw InvalidArgument(std::string(name) + " needs a value for z");
        return *z;
    };
    if (name == "standard") return make_standard(params);
    if (name == "caseA") return make_caseA(need_z(), params);
    if (name == "caseB1") return make_caseB1(need_z(), params);
    if (name == "caseB2") return make_caseB2(need_z(), params);
    if (name == "example1") return make_example1(need_z(), params);
    if (name == "example2_z2") {
        if (z && *z != Rational(2)) throw InvalidArgument("example2_z2 is defined at z = 2 only");
        return make_example2_z2(params);
    }
    throw InvalidArgument("unknown representation '" + std::string(name) + "'");
}

inline constexpr std::array<const char*, 6> kRepresentationNames = {"standard", "caseA",    "caseB1",
                                                                    "caseB2",   "example1", "example2_z2"};

} // namespace vlasym
