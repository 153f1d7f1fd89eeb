#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vlasym/catalog.hpp"
#include "vlasym/coeffode.hpp"

namespace vlasym {

enum class ForceFamily { zero, example1, general_phi };

/// Force F(t, r, v) in B = mu Dt + v Dr + F Dv.
struct ForceField {
    ForceFamily family = ForceFamily::zero;
    Rational z{1};
    ScalarFn phi;  // general_phi only

    double operator()(double /*t*/, double r, double v) const {
        switch (family) {
        case ForceFamily::zero: return 0.0;
        case ForceFamily::example1: return (1 - z.to_double()) * v * v / r;
        case ForceFamily::general_phi:
            return real_power(r, Rational(1) - Rational(2) * z) * phi(real_power(r, z - Rational(1)) * v);
        }
        return 0.0;
    }
};

inline ForceField zero_force() { return {}; }
inline ForceField example1_force(const Rational& z) { return {ForceFamily::example1, z, {}}; }
inline ForceField general_phi_force(const Rational& z, ScalarFn phi) { return {ForceFamily::general_phi, z, std::move(phi)}; }

struct CharState {
    double t = 0.0;
    double r = 0.0;
    double v = 0.0;
};

namespace detail {

inline std::array<double, 2> char_rhs(const ForceField& F, double mu, double t, double r, double v) {
    if (!(r > 0)) {
        std::ostringstream os;
        os << "characteristic reached r <= 0 at (t, r, v) = (" << t << ", " << r << ", " << v << ")";
        throw DomainError(os.str());
    }
    return {v / mu, F(t, r, v) / mu};
}

} // namespace detail

/// RK4 along dr/dt = v / mu, dv/dt = F / mu from `start` to t_end (either direction).
/// Uses ceil(|t_end - t| / step) equal steps.
inline CharState integrate_characteristic(const ForceField& F, double mu, CharState start, double t_end, double step,
                                          std::vector<CharState>* path = nullptr) {
    if (!(step > 0)) throw InvalidArgument("integrate_characteristic: step must be positive");
    if (mu == 0) throw InvalidArgument("integrate_characteristic: mu = 0");
    const double span = t_end - start.t;
    const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / step - 1e-9));
    if (path) path->assign(1, start);
    if (n == 0) return start;
    const double h = span / static_cast<double>(n);
    CharState s = start;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k1 = detail::char_rhs(F, mu, s.t, s.r, s.v);
        const auto k2 = detail::char_rhs(F, mu, s.t + h / 2, s.r + h / 2 * k1[0], s.v + h / 2 * k1[1]);
        const auto k3 = detail::char_rhs(F, mu, s.t + h / 2, s.r + h / 2 * k2[0], s.v + h / 2 * k2[1]);
        const auto k4 = detail::char_rhs(F, mu, s.t + h, s.r + h * k3[0], s.v + h * k3[1]);
        s.r += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        s.v += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        s.t = i + 1 == n ? t_end : start.t + h * static_cast<double>(i + 1);
        if (!(s.r > 0)) detail::char_rhs(F, mu, s.t, s.r, s.v);
        if (path) path->push_back(s);
    }
    return s;
}

using Profile = std::function<double(double, double)>;

/// A solution of B f = 0 for a force family.
struct ExactSolution {
    ForceFamily family = ForceFamily::zero;
    std::function<double(double, double, double)> f;
    double operator()(double t, double r, double v) const { return f(t, r, v); }
    double operator()(const Point& p) const { return f(p.t, p.r, p.v); }
};

/// zero: g(r - v t / mu, v); example1: g(u, r^z - z u t / mu) with u = r^(z-1) v.
inline ExactSolution exact_solution(ForceFamily family, const Rational& z, double mu, Profile g) {
    if (mu == 0) throw InvalidArgument("exact_solution: mu = 0");
    switch (family) {
    case ForceFamily::zero:
        return {family, [=](double t, double r, double v) { return g(r - v * t / mu, v); }};
    case ForceFamily::example1: {
        if (z.is_zero()) throw InvalidArgument("exact_solution: z = 0");
        const double zd = z.to_double();
        return {family, [=](double t, double r, double v) {
                    const double u = real_power(r, z - Rational(1)) * v;
                    return g(u, real_power(r, z) - zd * u * t / mu);
                }};
    }
    case ForceFamily::general_phi:
        throw InvalidArgument("exact_solution: no closed invariants for a general phi; use characteristic_solution");
    }
    return {};
}

/// f(t, r, v) = g(r0, v0), (r0, v0) the characteristic through (t, r, v) followed back to t0.
inline ExactSolution characteristic_solution(const ForceField& F, double mu, Profile g, double t0 = 0.0,
                                             double step = 1e-3) {
    return {F.family, [=](double t, double r, double v) {
                const CharState s = integrate_characteristic(F, mu, {t, r, v}, t0, step);
                return g(s.r, s.v);
            }};
}

/// Max |f(end) - f(start)| over trajectories started at `starts` and run to t_end.
inline double constancy_along_characteristics(const ForceField& F, double mu, const std::function<double(double, double, double)>& f,
                                              const std::vector<CharState>& starts, double t_end, double step) {
    std::vector<std::future<double>> jobs;
    jobs.reserve(starts.size());
    for (const CharState& s : starts)
        jobs.push_back(std::async(std::launch::async, [&, s] {
            const CharState e = integrate_characteristic(F, mu, s, t_end, step);
            return std::abs(f(e.t, e.r, e.v) - f(s.t, s.r, s.v));
        }));
    double drift = 0;
    for (auto& j : jobs) drift = std::max(drift, j.get());
    return drift;
}

struct CloudSample {
    Point p;
    double f = 0.0;
    double residual = 0.0;
};

inline std::string to_csv(const std::vector<CloudSample>& samples) {
    std::ostringstream os;
    os.precision(17);
    os << "t,r,v,f,residual\n";
    for (auto& s : samples) os << s.p.t << ',' << s.p.r << ',' << s.p.v << ',' << s.f << ',' << s.residual << '\n';
    return os.str();
}

/// Trajectory dump; residual is f(state) - f(start).
inline std::vector<CloudSample> trajectory_samples(const ForceField& F, double mu,
                                                   const std::function<double(double, double, double)>& f, CharState start,
                                                   double t_end, double step) {
    std::vector<CharState> path;
    integrate_characteristic(F, mu, start, t_end, step, &path);
    const double f0 = f(start.t, start.r, start.v);
    std::vector<CloudSample> out;
    out.reserve(path.size());
    for (auto& s : path) {
        const double fv = f(s.t, s.r, s.v);
        out.push_back({{s.t, s.r, s.v}, fv, fv - f0});
    }
    return out;
}

/// Fixed-seed points in t in [0.1, 1], r in [0.5, 2], v in [0.5, 2].
inline std::vector<Point> point_cloud(std::size_t n, std::uint32_t seed = 2024) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> t(0.1, 1.0), rv(0.5, 2.0);
    std::vector<Point> out(n);
    for (auto& p : out) {
        p.t = t(rng);
        p.r = rv(rng);
        p.v = rv(rng);
    }
    return out;
}

struct FirstOrderResult {
    std::vector<double> eps;
    std::vector<double> residual;  // max |B f_eps| over the cloud, per eps
    double slope = 0.0;            // least-squares slope of log residual vs log eps
    std::size_t used = 0;
    std::size_t discarded = 0;     // points where evaluation hit r <= 0, a pole or a branch cut
    std::vector<CloudSample> samples;  // smallest eps
    bool exact = false;            // every residual at or below the difference noise floor

    /// Residual is O(eps^2): either at the noise floor or with fitted slope >= min_slope.
    bool second_order(double min_slope = 1.9) const { return exact || slope >= min_slope; }
};

inline constexpr double kResidualNoiseFloor = 1e-9;

namespace detail {

// five-point central difference
inline double fd(const std::function<double(const Point&)>& g, const Point& p, Var x, double h) {
    auto at = [&](double s) {
        Point q = p;
        if (x == Var::t) q.t += s;
        if (x == Var::r) q.r += s;
        if (x == Var::v) q.v += s;
        return g(q);
    };
    return (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
}

inline double apply_numeric(const VectorField& X, const ParamValues& pv, const std::function<double(const Point&)>& g,
                            const Point& p, double h) {
    return X.dt.eval(p, pv) * fd(g, p, Var::t, h) + X.dr.eval(p, pv) * fd(g, p, Var::r, h) +
           X.dv.eval(p, pv) * fd(g, p, Var::v, h) + X.scalar.eval(p, pv) * g(p);
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

} // namespace detail

/// Residual order of the transformed solution f_eps(p) = exp(-eps A0(p)) f(p - eps A(p)), G = A.grad + A0,
/// which agrees with f - eps G f at first order. Slope ~2 when G is a symmetry of B with zero remainder, ~1 otherwise.
inline FirstOrderResult symmetry_firstorder_check(const VectorField& boltzmann, const ExactSolution& f, const VectorField& G,
                                                  const std::vector<double>& eps_list, const ParamValues& pv,
                                                  const std::vector<Point>& cloud = point_cloud(64), double h = 1e-5) {
    if (eps_list.size() < 2) throw InvalidArgument("symmetry_firstorder_check: need at least two eps values");
    FirstOrderResult out;
    out.eps = eps_list;
    // keep points usable for every eps
    std::vector<Point> pts;
    for (const Point& p : cloud) {
        try {
            for (double e : eps_list) {
                auto fe = [&](const Point& q) {
                    const Point m{q.t - e * G.dt.eval(q, pv), q.r - e * G.dr.eval(q, pv), q.v - e * G.dv.eval(q, pv)};
                    return std::exp(-e * G.scalar.eval(q, pv)) * f(m);
                };
                const double b = detail::apply_numeric(boltzmann, pv, fe, p, h);
                if (!std::isfinite(b)) throw DomainError("non-finite residual");
            }
            pts.push_back(p);
        } catch (const Error&) {
            ++out.discarded;
        }
    }
    out.used = pts.size();
    if (pts.empty()) throw DomainError("symmetry_firstorder_check: every point was discarded");
    std::size_t smallest = 0;
    for (std::size_t k = 0; k < eps_list.size(); ++k)
        if (eps_list[k] < eps_list[smallest]) smallest = k;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const double e = eps_list[k];
        auto fe = [&](const Point& q) {
            const Point m{q.t - e * G.dt.eval(q, pv), q.r - e * G.dr.eval(q, pv), q.v - e * G.dv.eval(q, pv)};
            return std::exp(-e * G.scalar.eval(q, pv)) * f(m);
        };
        double worst = 0;
        for (const Point& p : pts) {
            const double b = detail::apply_numeric(boltzmann, pv, fe, p, h);
            worst = std::max(worst, std::abs(b));
            if (k == smallest) out.samples.push_back({p, fe(p), b});
        }
        out.residual.push_back(worst);
    }
    out.exact = *std::max_element(out.residual.begin(), out.residual.end()) <= kResidualNoiseFloor;
    out.slope = out.exact ? std::numeric_limits<double>::quiet_NaN() : detail::fit_slope(out.eps, out.residual);
    return out;
}

inline FirstOrderResult symmetry_firstorder_check(const Representation& rep, const ExactSolution& f, std::size_t generator,
                                                  const std::vector<double>& eps_list, const ParamValues& pv,
                                                  const std::vector<Point>& cloud = point_cloud(64)) {
    if (generator >= rep.basis.size()) throw InvalidArgument("symmetry_firstorder_check: generator index out of range");
    return symmetry_firstorder_check(rep.boltzmann, f, rep.basis[generator], eps_list, pv, cloud);
}

/// Residual max |B f| of a candidate solution over a cloud, with centred differences.
inline double solution_residual(const VectorField& boltzmann, const ExactSolution& f, const ParamValues& pv,
                                const std::vector<Point>& cloud, double h = 1e-5) {
    double worst = 0;
    for (const Point& p : cloud)
        worst = std::max(worst, std::abs(detail::apply_numeric(boltzmann, pv, [&](const Point& q) { return f(q); }, p, h)));
    return worst;
}

} // namespace vlasym
