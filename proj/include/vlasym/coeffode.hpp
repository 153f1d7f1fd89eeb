#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vlasym/error.hpp"
#include "vlasym/rational.hpp"

namespace vlasym {

/// Real function of u on [lo, hi] with an optional exact derivative.
struct ScalarFn {
    std::function<double(double)> f;
    std::function<double(double)> df;  // empty: centred difference
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static ScalarFn constant(double c) {
        return {[c](double) { return c; }, [](double) { return 0.0; }};
    }

    double operator()(double u) const {
        if (u < lo || u > hi) throw DomainError("ScalarFn evaluated outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return f(u);
    }
    double derivative(double u) const {
        if (df) return df(u);
        const double h = 1e-5 * std::max(1.0, std::abs(u));
        return (f(u + h) - f(u - h)) / (2 * h);
    }
};

/// Uniform grid lo, lo + step, ..., hi; `step` is rounded so the grid ends exactly at hi.
struct Grid {
    double lo = 0.0;
    double hi = 1.0;
    double step = 1e-3;

    std::size_t intervals() const {
        if (!(hi > lo) || !(step > 0)) throw InvalidArgument("grid needs lo < hi and step > 0");
        return static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / step - 1e-9)));
    }
    std::vector<double> nodes() const {
        const std::size_t n = intervals();
        std::vector<double> u(n + 1);
        for (std::size_t i = 0; i <= n; ++i) u[i] = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        return u;
    }
};

/// Tabulated solution with value, first and (for second-order ODEs) second derivative at each node.
/// residuals[i] is the ODE residual at the midpoint of [u_i, u_{i+1}] (the last entry repeats).
class NumericFn1D {
public:
    NumericFn1D() = default;
    NumericFn1D(std::vector<double> grid, std::vector<double> values, std::vector<double> derivatives,
                std::vector<double> second = {})
        : grid_(std::move(grid)), values_(std::move(values)), derivs_(std::move(derivatives)), second_(std::move(second)) {
        if (grid_.size() < 2 || values_.size() != grid_.size() || derivs_.size() != grid_.size() ||
            (!second_.empty() && second_.size() != grid_.size()))
            throw InvalidArgument("NumericFn1D: inconsistent table sizes");
        for (std::size_t i = 1; i < grid_.size(); ++i)
            if (!(grid_[i] > grid_[i - 1])) throw InvalidArgument("NumericFn1D: grid not strictly increasing");
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& derivatives() const { return derivs_; }
    const std::vector<double>& residuals() const { return residuals_; }
    double residual_max() const { return residual_max_; }
    double lo() const { return grid_.front(); }
    double hi() const { return grid_.back(); }

    double operator()(double u) const { return hermite(u, values_, derivs_, false); }
    double derivative(double u) const {
        if (!second_.empty()) return hermite(u, derivs_, second_, false);
        return hermite(u, values_, derivs_, true);
    }
    double second_derivative(double u) const {
        if (second_.empty()) throw InvalidArgument("NumericFn1D: no second derivative table");
        return hermite(u, derivs_, second_, true);
    }

    void set_residuals(std::vector<double> r) {
        residuals_ = std::move(r);
        residual_max_ = 0.0;
        for (double x : residuals_) residual_max_ = std::max(residual_max_, std::abs(x));
    }

    std::string to_csv() const {
        std::ostringstream os;
        os.precision(17);
        os << "u,value,derivative,residual\n";
        for (std::size_t i = 0; i < grid_.size(); ++i)
            os << grid_[i] << ',' << values_[i] << ',' << derivs_[i] << ',' << (i < residuals_.size() ? residuals_[i] : 0.0)
               << '\n';
        return os.str();
    }

private:
    // Cubic Hermite through (y, dy) on the enclosing interval; `slope` returns the interpolant's derivative.
    double hermite(double u, const std::vector<double>& y, const std::vector<double>& dy, bool slope) const {
        if (u < grid_.front() || u > grid_.back())
            throw DomainError("NumericFn1D evaluated outside [" + std::to_string(grid_.front()) + ", " +
                              std::to_string(grid_.back()) + "] at u = " + std::to_string(u));
        auto it = std::upper_bound(grid_.begin(), grid_.end(), u);
        std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
        if (i + 1 >= grid_.size()) i = grid_.size() - 2;
        const double h = grid_[i + 1] - grid_[i], s = (u - grid_[i]) / h;
        const double y0 = y[i], y1 = y[i + 1], m0 = dy[i] * h, m1 = dy[i + 1] * h;
        if (!slope) {
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
        }
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1) / h;
    }

    std::vector<double> grid_, values_, derivs_, second_, residuals_;
    double residual_max_ = 0.0;
};

namespace detail {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N, class F>
State<N> rk4_step(const F& rhs, double u, const State<N>& y, double h) {
    auto axpy = [](const State<N>& a, double c, const State<N>& b) {
        State<N> out;
        for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + c * b[i];
        return out;
    };
    const State<N> k1 = rhs(u, y);
    const State<N> k2 = rhs(u + h / 2, axpy(y, h / 2, k1));
    const State<N> k3 = rhs(u + h / 2, axpy(y, h / 2, k2));
    const State<N> k4 = rhs(u + h, axpy(y, h, k3));
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return out;
}

template <std::size_t N, class F>
std::vector<State<N>> rk4_on_grid(const F& rhs, const std::vector<double>& u, State<N> y0) {
    std::vector<State<N>> out;
    out.reserve(u.size());
    out.push_back(y0);
    for (std::size_t i = 1; i < u.size(); ++i) out.push_back(rk4_step<N>(rhs, u[i - 1], out.back(), u[i] - u[i - 1]));
    return out;
}

// Phi(u) = (z - 1) u^2 + phi(u) and its derivative.
struct LeadingCoefficient {
    double zm1;
    const ScalarFn* phi;
    double operator()(double u) const { return zm1 * u * u + (*phi)(u); }
    double derivative(double u) const { return 2 * zm1 * u + phi->derivative(u); }
};

inline void require_regular(const LeadingCoefficient& Phi, const std::vector<double>& u) {
    double prev = Phi(u.front());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double here = Phi(u[i]);
        const double mid = i + 1 < u.size() ? Phi((u[i] + u[i + 1]) / 2) : here;
        if (here == 0.0 || std::signbit(here) != std::signbit(prev) || std::signbit(mid) != std::signbit(here) ||
            std::abs(here) < 1e-12)
            throw SingularPoint("leading coefficient (z-1)u^2 + phi(u) vanishes near u = " + std::to_string(u[i]), u[i]);
        prev = mid;
    }
}

inline double zvalue(const Rational& z) { return z.to_double(); }

} // namespace detail

/// RK4 for z u d + Phi d' + 2 mu x / z = 0 from d(grid.lo) = anchor.
inline NumericFn1D solve_d12(const Rational& z, const ScalarFn& phi, double mu, double x, const Grid& grid, double anchor) {
    if (z.is_zero()) throw InvalidArgument("solve_d12: z = 0");
    const double zd = detail::zvalue(z);
    const detail::LeadingCoefficient Phi{zd - 1, &phi};
    const std::vector<double> u = grid.nodes();
    detail::require_regular(Phi, u);
    const double source = 2 * mu * x / zd;
    auto slope = [&](double s, double d) { return -(zd * s * d + source) / Phi(s); };
    auto rhs = [&](double s, const detail::State<1>& y) { return detail::State<1>{slope(s, y[0])}; };
    const auto sol = detail::rk4_on_grid<1>(rhs, u, {anchor});
    std::vector<double> val(u.size()), der(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        val[i] = sol[i][0];
        der[i] = slope(u[i], val[i]);
    }
    NumericFn1D fn(u, val, der);
    std::vector<double> res(u.size());
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double m = (u[i] + u[i + 1]) / 2;
        res[i] = zd * m * fn(m) + Phi(m) * fn.derivative(m) + source;
    }
    res.back() = res[res.size() - 2];
    fn.set_residuals(std::move(res));
    return fn;
}

/// -mu x u / (u^2 + phi0), the z = 2 solution with constant phi.
inline ScalarFn closed_d12_z2(double mu, double x, double phi0) {
    ScalarFn fn;
    fn.f = [=](double u) { return -mu * x * u / (u * u + phi0); };
    fn.df = [=](double u) {
        const double d = u * u + phi0;
        return -mu * x * (phi0 - u * u) / (d * d);
    };
    if (phi0 < 0) fn.lo = std::sqrt(-phi0) * (1 + 1e-12);  // right of the pole
    return fn;
}

namespace detail {

// b'' for the full b12 equation, divided through by Phi^2.
struct B12Rhs {
    double z, mu;
    LeadingCoefficient Phi;
    const ScalarFn* phi;

    double second(double u, double b, double db) const {
        const double P = Phi(u), dphi = phi->derivative(u);
        const double lower = 3 * z * u * P * db + z * ((z + 1) * u * u - 2 * u * dphi + 3 * (*phi)(u)) * b +
                             ((2 - z) * u - dphi) * 2 * mu / z;
        return -lower / (P * P);
    }
    double residual(double u, double b, double db, double d2b) const {
        const double P = Phi(u), dphi = phi->derivative(u);
        return P * P * d2b + 3 * z * u * P * db + z * ((z + 1) * u * u - 2 * u * dphi + 3 * (*phi)(u)) * b +
               ((2 - z) * u - dphi) * 2 * mu / z;
    }
};

template <class Second, class Residual>
NumericFn1D solve_second_order(const std::vector<double>& u, double b0, double db0, const Second& second,
                               const Residual& residual) {
    auto rhs = [&](double s, const State<2>& y) { return State<2>{y[1], second(s, y[0], y[1])}; };
    const auto sol = rk4_on_grid<2>(rhs, u, {b0, db0});
    std::vector<double> val(u.size()), der(u.size()), sec(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        val[i] = sol[i][0];
        der[i] = sol[i][1];
        sec[i] = second(u[i], val[i], der[i]);
    }
    NumericFn1D fn(u, val, der, sec);
    std::vector<double> res(u.size());
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double m = (u[i] + u[i + 1]) / 2;
        res[i] = residual(m, fn(m), fn.derivative(m), fn.second_derivative(m));
    }
    res.back() = res[res.size() - 2];
    fn.set_residuals(std::move(res));
    return fn;
}

} // namespace detail

/// RK4 on (b, b') for the b12 equation with general phi; `init` is (b, b') at grid.lo.
inline NumericFn1D solve_b12(const Rational& z, const ScalarFn& phi, double mu, const Grid& grid,
                             std::array<double, 2> init) {
    if (z.is_zero()) throw InvalidArgument("solve_b12: z = 0");
    const double zd = detail::zvalue(z);
    const detail::B12Rhs eq{zd, mu, {zd - 1, &phi}, &phi};
    const std::vector<double> u = grid.nodes();
    detail::require_regular(eq.Phi, u);
    return detail::solve_second_order(
        u, init[0], init[1], [&](double s, double b, double db) { return eq.second(s, b, db); },
        [&](double s, double b, double db, double d2b) { return eq.residual(s, b, db, d2b); });
}

/// c12 = 2 z u b12 + Phi b12' + 2 mu / z from a tabulated b12, using its stored derivative.
inline NumericFn1D c12_from_b12(const Rational& z, const ScalarFn& phi, double mu, const NumericFn1D& b12) {
    const double zd = detail::zvalue(z);
    const detail::LeadingCoefficient Phi{zd - 1, &phi};
    const auto& u = b12.grid();
    std::vector<double> val(u.size()), der(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        val[i] = 2 * zd * u[i] * b12.values()[i] + Phi(u[i]) * b12.derivatives()[i] + 2 * mu / zd;
        der[i] = 2 * zd * b12.values()[i] + 2 * zd * u[i] * b12.derivatives()[i] +
                 Phi.derivative(u[i]) * b12.derivatives()[i] + Phi(u[i]) * b12.second_derivative(u[i]);
    }
    return NumericFn1D(u, val, der);
}

struct B0Solutions {
    NumericFn1D first;      // b(lo) = 1, b'(lo) = 0
    NumericFn1D second;     // b(lo) = 0, b'(lo) = 1
    NumericFn1D wronskian;  // of the homogeneous pair with the same data
    bool dependent = false; // |W| < 1e-10 somewhere on the grid
};

/// Single solution of Phi^2 b'' + z u Phi b' + (2 z Phi - z u Phi') b - 2 s Phi = 0.
inline NumericFn1D solve_b0_ivp(const Rational& z, const ScalarFn& phi, double s, const Grid& grid,
                                std::array<double, 2> init) {
    if (z.is_zero()) throw InvalidArgument("solve_b0: z = 0");
    const double zd = detail::zvalue(z);
    const detail::LeadingCoefficient Phi{zd - 1, &phi};
    const std::vector<double> u = grid.nodes();
    detail::require_regular(Phi, u);
    auto second = [&](double w, double b, double db) {
        const double P = Phi(w);
        return -(zd * w * P * db + (2 * zd * P - zd * w * Phi.derivative(w)) * b - 2 * s * P) / (P * P);
    };
    auto residual = [&](double w, double b, double db, double d2b) {
        const double P = Phi(w);
        return P * P * d2b + zd * w * P * db + (2 * zd * P - zd * w * Phi.derivative(w)) * b - 2 * s * P;
    };
    return detail::solve_second_order(u, init[0], init[1], second, residual);
}

inline B0Solutions solve_b0(const Rational& z, const ScalarFn& phi, double s, const Grid& grid) {
    B0Solutions out{solve_b0_ivp(z, phi, s, grid, {1, 0}), solve_b0_ivp(z, phi, s, grid, {0, 1}), {}, false};
    const NumericFn1D h1 = s == 0.0 ? out.first : solve_b0_ivp(z, phi, 0.0, grid, {1, 0});
    const NumericFn1D h2 = s == 0.0 ? out.second : solve_b0_ivp(z, phi, 0.0, grid, {0, 1});
    const auto& u = h1.grid();
    std::vector<double> w(u.size()), dw(u.size());
    const double zd = detail::zvalue(z);
    const detail::LeadingCoefficient Phi{zd - 1, &phi};
    for (std::size_t i = 0; i < u.size(); ++i) {
        w[i] = h1.values()[i] * h2.derivatives()[i] - h1.derivatives()[i] * h2.values()[i];
        dw[i] = -zd * u[i] / Phi(u[i]) * w[i];  // Abel
        if (std::abs(w[i]) < 1e-10) out.dependent = true;
    }
    out.wronskian = NumericFn1D(u, w, dw);
    return out;
}

/// d12 = -delta0 Phi^(z/(2(1-z))) * int_{base}^{u} Phi^((z-2)/(2(1-z))), Phi = (z-1)u^2 + phi0.
/// Composite Simpson on each grid interval; `panels` subdivides the stretch from base to grid.lo.
inline NumericFn1D quadrature_d12(const Rational& z, double phi0, double delta0, double base, const Grid& grid,
                                  std::size_t panels = 2048) {
    if (z.is_zero() || z == Rational(1)) throw InvalidArgument("quadrature_d12: z must not be 0 or 1");
    const double zd = detail::zvalue(z);
    const double pre_exp = zd / (2 * (1 - zd)), int_exp = (zd - 2) / (2 * (1 - zd));
    auto Phi = [&](double u) {
        const double p = (zd - 1) * u * u + phi0;
        if (!(p > 0)) throw SingularPoint("quadrature_d12: (z-1)u^2 + phi0 <= 0 at u = " + std::to_string(u), u);
        return p;
    };
    auto integrand = [&](double u) { return std::pow(Phi(u), int_exp); };
    auto simpson = [&](double a, double b, std::size_t n) {
        if (a == b) return 0.0;
        const double h = (b - a) / static_cast<double>(2 * n);
        double acc = integrand(a) + integrand(b);
        for (std::size_t k = 1; k < 2 * n; ++k) acc += (k % 2 ? 4.0 : 2.0) * integrand(a + h * static_cast<double>(k));
        return acc * h / 3;
    };
    const std::vector<double> u = grid.nodes();
    std::vector<double> I(u.size());
    I[0] = simpson(base, u[0], panels);
    for (std::size_t i = 1; i < u.size(); ++i) I[i] = I[i - 1] + simpson(u[i - 1], u[i], 4);
    std::vector<double> val(u.size()), der(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double P = Phi(u[i]), pre = std::pow(P, pre_exp);
        val[i] = -delta0 * pre * I[i];
        // product rule: d/du [Phi^a] = a Phi^(a-1) Phi'
        der[i] = -delta0 * (pre_exp * pre / P * 2 * (zd - 1) * u[i] * I[i] + pre * integrand(u[i]));
    }
    NumericFn1D fn(u, val, der);
    // residual of z u d + Phi d' + delta0 = 0 between nodes
    std::vector<double> res(u.size());
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double m = (u[i] + u[i + 1]) / 2;
        res[i] = zd * m * fn(m) + Phi(m) * fn.derivative(m) + delta0;
    }
    res.back() = res[res.size() - 2];
    fn.set_residuals(std::move(res));
    return fn;
}

} // namespace vlasym
