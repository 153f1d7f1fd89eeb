#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlasym/catalog.hpp"
#include "vlasym/coeffode.hpp"
#include "vlasym/exprparse.hpp"
#include "vlasym/vlasov.hpp"

namespace vlasym {

struct RunConfig {
    std::string command;              // verify | bracket | nogo | ode | pde
    std::string mode;                 // ode: d12 | b12 | b0 | quad; pde: symcheck | transport
    std::string rep;
    std::map<std::string, std::string> params;  // name -> rational, decimal or "symbolic"
    std::vector<std::string> z;
    // bracket
    std::string a, b;
    // ode
    double lo = 0.5, hi = 4.0, step = 1e-3;
    std::optional<double> anchor, base, s;
    std::vector<double> init;
    bool compare_closed = false;
    double residual_tol = 1e-8;
    double closed_tol = 1e-8;
    // pde
    std::string gen, corrupt;
    std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
    std::size_t points = 64;
    double min_slope = 1.9;
    bool complete = false;  // nogo: also build the tail-completed X[2]
    std::string csv;
};

struct Record {
    std::string name;
    bool ok = false;
    std::string summary;
    std::optional<double> value;
    double elapsed_ms = 0.0;
};

struct Report {
    std::string command;
    std::vector<Record> records;

    bool ok() const {
        return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.ok; });
    }

    void sort() {
        std::stable_sort(records.begin(), records.end(), [](const Record& x, const Record& y) { return x.name < y.name; });
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["ok"] = ok();
        std::size_t passed = 0;
        for (auto& r : records) passed += r.ok;
        j["passed"] = passed;
        j["total"] = records.size();
        j["records"] = nlohmann::ordered_json::array();
        for (auto& r : records) {
            nlohmann::ordered_json e;
            e["name"] = r.name;
            e["ok"] = r.ok;
            e["summary"] = r.summary;
            if (r.value) e["value"] = *r.value;
            e["elapsed_ms"] = r.elapsed_ms;
            j["records"].push_back(std::move(e));
        }
        return j;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << command << '\n';
        std::size_t passed = 0;
        for (auto& r : records) {
            passed += r.ok;
            os << (r.ok ? "  PASS  " : "  FAIL  ") << r.name;
            if (!r.summary.empty()) os << "  " << r.summary;
            os << '\n';
        }
        os << (ok() ? "PASS" : "FAIL") << " (" << passed << "/" << records.size() << ")\n";
        return os.str();
    }
};

namespace cli_detail {

class Stopwatch {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline const std::vector<std::string> kDefaultZ = {"2", "3", "-1", "1/2"};

// "3", "-2/5", "0.25", "1e-3"
inline Rational parse_number(const std::string& text) {
    try {
        return Rational::parse(text);
    } catch (const Error&) {
    }
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("not a number: '" + text + "'");
    }
    if (used != text.size()) throw InvalidArgument("not a number: '" + text + "'");
    mpq_class q(d);
    return Rational::parse(q.get_str());
}

inline Bindings bindings(const RunConfig& c) {
    Bindings b;
    for (auto& [name, value] : c.params) {
        if (!param_index(name)) throw InvalidArgument("unknown parameter '" + name + "'");
        if (value == "symbolic") continue;
        b[name] = ParamRat(parse_number(value));
    }
    return b;
}

inline double numeric(const RunConfig& c, const std::string& name, double fallback) {
    auto it = c.params.find(name);
    if (it == c.params.end()) return fallback;
    if (it->second == "symbolic") throw InvalidArgument("parameter '" + name + "' needs a numeric value for this command");
    return parse_number(it->second).to_double();
}

inline ParamValues numeric_values(const RunConfig& c) {
    ParamValues pv;
    for (std::string_view name : kParamNames) pv.set(name, numeric(c, std::string(name), 1.0));
    return pv;
}

inline std::vector<std::optional<Rational>> z_values(const RunConfig& c) {
    if (c.rep == "standard") return {std::nullopt};
    if (c.rep == "example2_z2" && c.z.empty()) return {Rational(2)};
    std::vector<std::optional<Rational>> out;
    for (auto& s : c.z.empty() ? kDefaultZ : c.z) out.emplace_back(parse_number(s));
    return out;
}

inline Rational single_z(const RunConfig& c, const Rational& fallback) {
    if (c.z.size() > 1) throw InvalidArgument("this command takes a single --z");
    return c.z.empty() ? fallback : parse_number(c.z.front());
}

inline std::string prefix(const std::optional<Rational>& z) { return z ? "z=" + z->str() + " " : ""; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << text;
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

inline std::string expansion_text(const BasisExpansion& ex) {
    std::string out;
    for (std::size_t i = 0; i < ex.coefficients.size(); ++i) {
        if (ex.coefficients[i].is_zero()) continue;
        if (!out.empty()) out += " + ";
        out += "(" + print(ex.coefficients[i]) + ")*" + kGeneratorNames[i];
    }
    return out.empty() ? "0" : out;
}

// "Y0", "Y[0]", "X-1", "X[-1]"
inline int generator_from_flag(const std::string& g) {
    if (int i = generator_index(g); i >= 0) return i;
    if (g.size() >= 2 && (g[0] == 'X' || g[0] == 'Y')) {
        const int i = generator_index(std::string(1, g[0]) + "[" + g.substr(1) + "]");
        if (i >= 0) return i;
    }
    throw InvalidArgument("unknown generator '" + g + "'");
}

} // namespace cli_detail

/// Structure table, symmetry multipliers and (where defined) the constraint system of a representation.
inline Report cmd_verify(const RunConfig& c) {
    using namespace cli_detail;
    Report rep{"verify " + c.rep, {}};
    const Bindings params = bindings(c);
    for (const auto& z : z_values(c)) {
        Stopwatch build;
        const Representation R = make_representation(c.rep, z, params);
        const std::string pre = prefix(z);

        Stopwatch tw;
        const StructureTable t = verify_table(R);
        std::string summary = std::to_string(t.passed()) + "/" + std::to_string(t.pairs.size()) + " pairs";
        if (t.k && t.q) summary += ", k = " + print(*t.k) + ", q = " + print(*t.q);
        else summary += ", (k, q) not inferable";
        for (auto& p : t.pairs)
            if (!p.ok) summary += "; " + p.name + " off by " + print(p.difference);
        rep.records.push_back({pre + "table", t.ok(), summary, std::nullopt, tw.ms() + build.ms()});

        for (auto& s : verify_symmetries(R)) {
            Stopwatch sw;
            const bool affine_ok = R.name == "standard" && s.report.ok;
            bool ok = s.ok() || affine_ok;
            std::string sum = "lambda = " + print(s.report.lambda);
            if (s.report.rho) sum += ", rho = " + print(*s.report.rho);
            if (s.matches_stated) {
                sum += *s.matches_stated ? ", matches stated multiplier" : ", differs from stated multiplier";
                ok = ok && *s.matches_stated;
            }
            rep.records.push_back({pre + "symmetry " + s.generator, ok, sum, std::nullopt, sw.ms()});
        }

        if (c.rep == "example1") {
            Stopwatch sw;
            const auto res = verify_example1_system(*z, params);
            std::size_t zero = 0;
            std::string bad;
            for (auto& r : res) {
                if (r.ok()) ++zero;
                else bad += " " + r.equation;
            }
            rep.records.push_back({pre + "constraint system", zero == res.size(),
                                   std::to_string(zero) + "/" + std::to_string(res.size()) + " residuals zero" +
                                       (bad.empty() ? "" : "; nonzero:" + bad),
                                   std::nullopt, sw.ms()});
        }
        if (c.rep == "example2_z2") {
            Stopwatch sw;
            const auto res = example2_z2_ode_residuals(params);
            rep.records.push_back({pre + "closed forms solve the b12 equation", res.b12_equation.is_zero(),
                                   "residual = " + print(res.b12_equation), std::nullopt, sw.ms()});
            rep.records.push_back({pre + "closed forms solve the d12 equation", res.d12_equation.is_zero(),
                                   "residual = " + print(res.d12_equation), std::nullopt, 0.0});
        }
    }
    rep.sort();
    return rep;
}

/// Bracket of two fields given as files, inline text or generator names of --rep.
inline Report cmd_bracket(const RunConfig& c) {
    using namespace cli_detail;
    Report rep{"bracket", {}};
    const Bindings params = bindings(c);
    std::optional<Rational> z;
    if (!c.z.empty()) z = single_z(c, Rational(0));
    std::optional<Representation> R;
    if (!c.rep.empty()) R = make_representation(c.rep, z, params);
    auto load = [&](const std::string& what) -> VectorField {
        if (R) {
            try {
                return R->basis[static_cast<std::size_t>(generator_from_flag(what))];
            } catch (const InvalidArgument&) {
            }
        }
        std::ifstream probe(what);
        const std::string text = probe ? read_file(what) : what;
        return parse_vfield(text, z, params);
    };
    Stopwatch sw;
    const VectorField A = load(c.a), B = load(c.b);
    const VectorField C = vf_bracket(A, B);
    rep.records.push_back({"bracket", true, print(C), std::nullopt, sw.ms()});
    if (R) {
        Stopwatch ew;
        const BasisExpansion ex = expand_in_basis(C, R->basis);
        rep.records.push_back({"expansion", ex.in_span(),
                               ex.in_span() ? expansion_text(ex) : "outside the span; remainder " + print(ex.remainder),
                               std::nullopt, ew.ms()});
    }
    rep.sort();
    return rep;
}

/// Time-dependent remainder of [X[2], Y[-1]] - 3 Y[1] for case A; the record passes when it is zero
/// exactly at z = 1.
inline Report cmd_nogo(const RunConfig& c) {
    using namespace cli_detail;
    Report rep{"nogo", {}};
    const Bindings params = bindings(c);
    const std::vector<std::string> zs = c.z.empty() ? std::vector<std::string>{"1", "2", "3", "-1", "1/2"} : c.z;
    for (auto& zs_text : zs) {
        const Rational z = parse_number(zs_text);
        Stopwatch sw;
        const VectorField o = nogo_obstruction(z, params);
        const bool expected_zero = z == Rational(1);
        rep.records.push_back({"z=" + z.str() + " obstruction", o.is_zero() == expected_zero,
                               o.is_zero() ? "zero" : "nonzero: " + print(o), std::nullopt, sw.ms()});
        if (c.complete) {
            Stopwatch cw;
            const Representation A = make_caseA(z, params);
            std::string sum;
            bool ok = false;
            try {
                const VectorField X2 = nogo_completed_x2(z, params);
                const bool lowers = vf_bracket(X2, A.X(-1)) == ParamRat(3) * A.X(1);
                const bool scales = vf_bracket(X2, A.X(0)) == ParamRat(2) * X2;
                const bool closes = vf_bracket(X2, A.Y(-1)) == ParamRat(3) * A.Y(1);
                const bool symmetric = symmetry_multiplier(A.boltzmann, X2).ok;
                ok = lowers && scales && closes && symmetric;
                sum = std::string("X[2] = ") + print(X2) + (ok ? "" : " (relations fail)");
            } catch (const Error& e) {
                sum = e.what();
            }
            rep.records.push_back({"z=" + z.str() + " completed X[2]", ok, sum, std::nullopt, cw.ms()});
        }
    }
    rep.sort();
    return rep;
}

/// Coefficient ODE solves: d12, b12, b0, quad.
inline Report cmd_ode(const RunConfig& c) {
    using namespace cli_detail;
    Report rep{"ode " + c.mode, {}};
    const Rational z = single_z(c, Rational(2));
    const double phi0 = numeric(c, "phi0", 1.0), mu = numeric(c, "mu", 1.0), x = numeric(c, "x", 1.0);
    const Grid grid{c.lo, c.hi, c.step};
    const ScalarFn phi = ScalarFn::constant(phi0);
    auto residual_record = [&](const std::string& name, const NumericFn1D& fn, double ms) {
        rep.records.push_back({name, fn.residual_max() <= c.residual_tol, "max residual " + fmt(fn.residual_max()),
                               fn.residual_max(), ms});
    };
    const bool z2 = z == Rational(2);
    if (c.mode == "d12") {
        Stopwatch sw;
        const ScalarFn closed = closed_d12_z2(mu, x, phi0);
        const double anchor = c.anchor ? *c.anchor : (z2 ? closed(c.lo) : 0.0);
        const NumericFn1D fn = solve_d12(z, phi, mu, x, grid, anchor);
        residual_record("residual", fn, sw.ms());
        if (c.compare_closed) {
            if (!z2) throw InvalidArgument("--compare-closed needs z = 2");
            double err = 0;
            for (double u : fn.grid()) err = std::max(err, std::abs(fn(u) - closed(u)));
            rep.records.push_back({"closed form", err <= c.closed_tol, "max |diff| " + fmt(err), err, 0.0});
        }
        if (!c.csv.empty()) write_file(c.csv, fn.to_csv());
    } else if (c.mode == "b12") {
        Stopwatch sw;
        const double b120 = numeric(c, "b120", 1.0), b121 = numeric(c, "b121", 0.0);
        auto closed = [&](double u) {
            const double d = u * u + phi0;
            return (b120 * u + b121 * (u * u - phi0)) / (d * d);
        };
        auto closed_slope = [&](double u) {
            const double d = u * u + phi0;
            return (b120 * (phi0 - 3 * u * u) + b121 * (6 * phi0 * u - 2 * u * u * u)) / (d * d * d);
        };
        std::array<double, 2> init{0, 0};
        if (c.init.size() == 2) init = {c.init[0], c.init[1]};
        else if (!c.init.empty()) throw InvalidArgument("--init takes two values b, b'");
        else if (z2) init = {closed(c.lo), closed_slope(c.lo)};
        const NumericFn1D fn = solve_b12(z, phi, mu, grid, init);
        residual_record("residual", fn, sw.ms());
        if (c.compare_closed) {
            if (!z2) throw InvalidArgument("--compare-closed needs z = 2");
            double err = 0, scale = 0;
            for (double u : fn.grid()) {
                err = std::max(err, std::abs(fn(u) - closed(u)));
                scale = std::max(scale, std::abs(closed(u)));
            }
            const double rel = scale > 0 ? err / scale : err;
            rep.records.push_back({"closed form", rel <= 1e-7, "max relative |diff| " + fmt(rel), rel, 0.0});
        }
        if (!c.csv.empty()) write_file(c.csv, fn.to_csv());
    } else if (c.mode == "b0") {
        Stopwatch sw;
        const B0Solutions s = solve_b0(z, phi, c.s.value_or(1.0), grid);
        residual_record("first solution residual", s.first, sw.ms());
        residual_record("second solution residual", s.second, 0.0);
        double wmin = std::numeric_limits<double>::infinity();
        for (double w : s.wronskian.values()) wmin = std::min(wmin, std::abs(w));
        rep.records.push_back({"wronskian", !s.dependent, "min |W| " + fmt(wmin), wmin, 0.0});
        if (!c.csv.empty()) {
            write_file(c.csv, s.first.to_csv());
            write_file(c.csv + ".second.csv", s.second.to_csv());
            write_file(c.csv + ".wronskian.csv", s.wronskian.to_csv());
        }
    } else if (c.mode == "quad") {
        Stopwatch sw;
        const double delta0 = numeric(c, "delta0", 2 * mu * x / z.to_double());
        const double base = c.base.value_or(c.lo);
        const NumericFn1D q = quadrature_d12(z, phi0, delta0, base, grid);
        residual_record("residual", q, sw.ms());
        // the d12 equation with the x that makes 2 mu x / z equal to delta0
        const NumericFn1D d = solve_d12(z, phi, mu, delta0 * z.to_double() / (2 * mu), grid, q.values().front());
        double err = 0;
        for (std::size_t i = 0; i < q.grid().size(); ++i) err = std::max(err, std::abs(q.values()[i] - d.values()[i]));
        rep.records.push_back({"agreement with d12 solve", err <= 1e-7, "max |diff| " + fmt(err), err, 0.0});
        if (!c.csv.empty()) write_file(c.csv, q.to_csv());
    } else {
        throw InvalidArgument("unknown ode '" + c.mode + "' (expected d12, b12, b0 or quad)");
    }
    rep.sort();
    return rep;
}

namespace cli_detail {

inline ExactSolution pde_solution(const Representation& R, const Rational& z, double mu, double phi0) {
    const Profile g = [](double a, double b) { return std::exp(-0.3 * (a - 1) * (a - 1) - 0.2 * (b - 0.5) * (b - 0.5)); };
    if (R.name == "caseA" || R.name == "caseB1" || R.name == "caseB2") return exact_solution(ForceFamily::zero, z, mu, g);
    if (R.name == "example1") return exact_solution(ForceFamily::example1, z, mu, g);
    if (R.name == "example2_z2")
        return characteristic_solution(general_phi_force(z, ScalarFn::constant(phi0)), mu, g, 0.0, 1e-3);
    throw InvalidArgument("no solution family for '" + R.name + "'");
}

inline ForceField pde_force(const Representation& R, const Rational& z, double phi0) {
    if (R.name == "example1") return example1_force(z);
    if (R.name == "example2_z2") return general_phi_force(z, ScalarFn::constant(phi0));
    return zero_force();
}

} // namespace cli_detail

/// First-order symmetry check on exact solutions, or transport of a solution along characteristics.
inline Report cmd_pde(const RunConfig& c) {
    using namespace cli_detail;
    Report rep{"pde " + c.mode, {}};
    const Rational z = single_z(c, Rational(2));
    const ParamValues pv = numeric_values(c);
    const double mu = numeric(c, "mu", 1.0), phi0 = numeric(c, "phi0", 1.0);
    const std::string name = c.rep.empty() ? "example1" : c.rep;
    // numeric runs bind every parameter so generators evaluate
    const Representation R = make_representation(name, name == "standard" ? std::nullopt : std::optional<Rational>(z), {});
    const ExactSolution f = pde_solution(R, z, mu, phi0);
    if (c.mode == "symcheck") {
        const std::vector<Point> cloud = point_cloud(c.points);
        std::vector<CloudSample> last;
        auto run = [&](const std::string& label, const VectorField& G) {
            Stopwatch sw;
            const FirstOrderResult r = symmetry_firstorder_check(R.boltzmann, f, G, c.eps, pv, cloud);
            std::string sum = r.exact ? "residual at noise floor (" + fmt(r.residual.back()) + ")" : "slope " + fmt(r.slope);
            sum += ", " + std::to_string(r.used) + " points";
            if (r.discarded) sum += ", " + std::to_string(r.discarded) + " discarded";
            rep.records.push_back({label, r.second_order(c.min_slope), sum,
                                   r.exact ? std::optional<double>() : std::optional<double>(r.slope), sw.ms()});
            last = r.samples;
        };
        if (!c.corrupt.empty()) {
            const int i = generator_from_flag(c.corrupt);
            VectorField bad = R.basis[static_cast<std::size_t>(i)];
            if (!bad.dt.is_zero()) bad.dt = Expr(2) * bad.dt;
            else bad.dr = Expr(2) * bad.dr;
            run(std::string("corrupted ") + kGeneratorNames[static_cast<std::size_t>(i)], bad);
        } else if (!c.gen.empty()) {
            const int i = generator_from_flag(c.gen);
            run(kGeneratorNames[static_cast<std::size_t>(i)], R.basis[static_cast<std::size_t>(i)]);
        } else {
            for (std::size_t i = 0; i < 6; ++i) run(kGeneratorNames[i], R.basis[i]);
        }
        if (!c.csv.empty()) write_file(c.csv, to_csv(last));
    } else if (c.mode == "transport") {
        Stopwatch sw;
        const ForceField F = pde_force(R, z, phi0);
        std::vector<CharState> starts;
        for (const Point& p : point_cloud(c.points)) starts.push_back({p.t, p.r, p.v});
        const double drift = constancy_along_characteristics(F, mu, f.f, starts, 1.5, c.step);
        rep.records.push_back({"constancy along characteristics", drift <= 1e-9, "max drift " + fmt(drift), drift, sw.ms()});
        if (!c.csv.empty()) write_file(c.csv, to_csv(trajectory_samples(F, mu, f.f, starts.front(), 1.5, c.step)));
    } else {
        throw InvalidArgument("unknown pde mode '" + c.mode + "' (expected symcheck or transport)");
    }
    rep.sort();
    return rep;
}

inline Report run_command(const RunConfig& c) {
    if (c.command == "verify") return cmd_verify(c);
    if (c.command == "bracket") return cmd_bracket(c);
    if (c.command == "nogo") return cmd_nogo(c);
    if (c.command == "ode") return cmd_ode(c);
    if (c.command == "pde") return cmd_pde(c);
    throw InvalidArgument("unknown command '" + c.command + "'");
}

} // namespace vlasym
