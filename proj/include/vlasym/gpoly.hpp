#pragma once

#include <array>
#include <compare>
#include <cmath>
#include <map>
#include <utility>

#include "vlasym/error.hpp"
#include "vlasym/param.hpp"
#include "vlasym/rational.hpp"

namespace vlasym {

enum class Var { t = 0, r = 1, v = 2 };
inline constexpr std::array<Var, 3> kVars = {Var::t, Var::r, Var::v};
inline constexpr std::array<const char*, 3> kVarNames = {"t", "r", "v"};

/// Generalized monomial t^a r^b v^c with rational exponents.
struct BaseMonomial {
    std::array<Rational, 3> e{};

    BaseMonomial() = default;
    BaseMonomial(Rational et, Rational er, Rational ev) : e{std::move(et), std::move(er), std::move(ev)} {}

    const Rational& operator[](Var x) const { return e[static_cast<std::size_t>(x)]; }
    Rational& operator[](Var x) { return e[static_cast<std::size_t>(x)]; }

    bool is_one() const { return e[0].is_zero() && e[1].is_zero() && e[2].is_zero(); }

    friend BaseMonomial operator*(const BaseMonomial& a, const BaseMonomial& b) {
        return {a.e[0] + b.e[0], a.e[1] + b.e[1], a.e[2] + b.e[2]};
    }
    friend BaseMonomial operator/(const BaseMonomial& a, const BaseMonomial& b) {
        return {a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2]};
    }
    BaseMonomial pow(const Rational& p) const { return {e[0] * p, e[1] * p, e[2] * p}; }

    friend bool operator==(const BaseMonomial&, const BaseMonomial&) = default;
    friend std::strong_ordering operator<=>(const BaseMonomial& a, const BaseMonomial& b) {
        for (std::size_t i = 0; i < 3; ++i)
            if (auto c = a.e[i] <=> b.e[i]; c != 0) return c;
        return std::strong_ordering::equal;
    }

    static BaseMonomial of(Var x, Rational p = 1) {
        BaseMonomial m;
        m[x] = std::move(p);
        return m;
    }
};

/// Point in (t, r, v) for numeric evaluation.
struct Point {
    double t = 0.0;
    double r = 0.0;
    double v = 0.0;
    double operator[](Var x) const { return x == Var::t ? t : x == Var::r ? r : v; }
};

/// x^p on the positive real branch; throws on poles and negative bases with fractional p.
inline double real_power(double x, const Rational& p) {
    if (p.is_zero()) return 1.0;
    if (p.fits_long()) {
        const long n = p.to_long();
        if (x == 0.0 && n < 0) throw PoleError("pole: zero raised to a negative power");
        return std::pow(x, static_cast<double>(n));
    }
    if (x < 0.0) throw DomainError("negative base raised to a non-integer power " + p.str());
    if (x == 0.0) {
        if (p.sign() < 0) throw PoleError("pole: zero raised to a negative power");
        return 0.0;
    }
    return std::pow(x, p.to_double());
}

/// Sparse sum of generalized monomials with ParamRat coefficients.
class GPoly {
public:
    using Terms = std::map<BaseMonomial, ParamRat>;

    GPoly() = default;
    GPoly(const ParamRat& c) {  // NOLINT(google-explicit-constructor)
        if (!c.is_zero()) terms_.emplace(BaseMonomial{}, c);
    }
    static GPoly term(const BaseMonomial& m, const ParamRat& c) {
        GPoly p;
        if (!c.is_zero()) p.terms_.emplace(m, c);
        return p;
    }
    static GPoly var(Var x, Rational p = 1) { return term(BaseMonomial::of(x, std::move(p)), ParamRat(1)); }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_single_term() const { return terms_.size() == 1; }
    std::size_t size() const { return terms_.size(); }
    const std::pair<const BaseMonomial, ParamRat>& leading() const { return *terms_.rbegin(); }
    const std::pair<const BaseMonomial, ParamRat>& trailing() const { return *terms_.begin(); }

    bool depends_on(Var x) const {
        for (auto& [m, c] : terms_)
            if (!m[x].is_zero()) return true;
        return false;
    }
    /// True if the only monomial present is 1.
    bool is_param_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
    ParamRat constant_coefficient() const {
        auto it = terms_.find(BaseMonomial{});
        return it == terms_.end() ? ParamRat() : it->second;
    }

    GPoly operator-() const {
        GPoly r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    GPoly& operator+=(const GPoly& o) {
        for (auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    GPoly& operator-=(const GPoly& o) {
        for (auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend GPoly operator+(GPoly a, const GPoly& b) { return a += b; }
    friend GPoly operator-(GPoly a, const GPoly& b) { return a -= b; }
    friend GPoly operator*(const GPoly& a, const GPoly& b) {
        GPoly r;
        for (auto& [ma, ca] : a.terms_)
            for (auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }
    GPoly& operator*=(const GPoly& o) { return *this = *this * o; }

    GPoly scaled(const ParamRat& c) const {
        if (c.is_zero()) return {};
        if (c.is_one()) return *this;
        GPoly r;
        for (auto& [m, v] : terms_) r.add_term(m, v * c);
        return r;
    }
    GPoly times_term(const BaseMonomial& mono, const ParamRat& c) const {
        if (c.is_zero()) return {};
        GPoly r;
        for (auto& [m, v] : terms_) r.terms_.emplace(m * mono, v * c);
        return r;
    }

    GPoly pow(unsigned e) const {
        GPoly r(ParamRat(1)), base = *this;
        while (e) {
            if (e & 1u) r *= base;
            e >>= 1u;
            if (e) base *= base;
        }
        return r;
    }

    GPoly diff(Var x) const {
        GPoly r;
        for (auto& [m, c] : terms_) {
            const Rational& p = m[x];
            if (p.is_zero()) continue;
            BaseMonomial dm = m;
            dm[x] = p - Rational(1);
            r.add_term(dm, c * ParamRat(p));
        }
        return r;
    }

    /// Exact division in the Laurent-Puiseux ring; false if d does not divide.
    bool divide_exact(const GPoly& d, GPoly& quotient) const {
        if (d.is_zero()) throw DivisionByZero("division by the zero polynomial");
        if (is_zero()) { quotient = {}; return true; }
        if (d.is_single_term()) {
            const auto& [dm, dc] = d.leading();
            GPoly q;
            const ParamRat inv = ParamRat(1) / dc;
            for (auto& [m, c] : terms_) q.terms_.emplace(m / dm, c * inv);
            quotient = std::move(q);
            return true;
        }
        // per-variable exponent box that every quotient monomial must lie in
        std::array<Rational, 3> lo, hi;
        for (std::size_t i = 0; i < 3; ++i) {
            auto [alo, ahi] = exponent_range(static_cast<Var>(i));
            auto [dlo, dhi] = d.exponent_range(static_cast<Var>(i));
            lo[i] = alo - dlo;
            hi[i] = ahi - dhi;
            if (lo[i] > hi[i]) return false;
        }
        const auto& [dm, dc] = d.leading();
        const ParamRat inv = ParamRat(1) / dc;
        GPoly rem = *this;
        GPoly q;
        std::size_t guard = 0;
        const std::size_t limit = 64 * (terms_.size() + 1) * (d.size() + 1);
        while (!rem.is_zero()) {
            if (++guard > limit) return false;
            const auto [rm, rc] = rem.leading();
            BaseMonomial tm = rm / dm;
            for (std::size_t i = 0; i < 3; ++i)
                if (tm.e[i] < lo[i] || tm.e[i] > hi[i]) return false;
            const ParamRat tc = rc * inv;
            q.add_term(tm, tc);
            rem -= d.times_term(tm, tc);
        }
        quotient = std::move(q);
        return true;
    }

    std::pair<Rational, Rational> exponent_range(Var x) const {
        Rational lo = terms_.begin()->first[x], hi = lo;
        for (auto& [m, c] : terms_) {
            if (m[x] < lo) lo = m[x];
            if (m[x] > hi) hi = m[x];
        }
        return {lo, hi};
    }

    double eval(const Point& p, const ParamValues& values) const {
        double sum = 0.0;
        for (auto& [m, c] : terms_) {
            double term = c.eval(values);
            for (Var x : kVars) term *= real_power(p[x], m[x]);
            sum += term;
        }
        return sum;
    }

    GPoly subst_param_polypart(std::size_t idx, const ParamRat& value) const {
        GPoly r;
        for (auto& [m, c] : terms_) r.add_term(m, c.subst(idx, value));
        return r;
    }

    friend bool operator==(const GPoly& a, const GPoly& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        auto ib = b.terms_.begin();
        for (auto ia = a.terms_.begin(); ia != a.terms_.end(); ++ia, ++ib)
            if (!(ia->first == ib->first) || !(ia->second == ib->second)) return false;
        return true;
    }

    /// Structural ordering; canonical containers only.
    friend bool structural_less(const GPoly& a, const GPoly& b) {
        if (a.terms_.size() != b.terms_.size()) return a.terms_.size() < b.terms_.size();
        auto ib = b.terms_.begin();
        for (auto ia = a.terms_.begin(); ia != a.terms_.end(); ++ia, ++ib) {
            if (auto c = ia->first <=> ib->first; c != 0) return c < 0;
            if (structural_less(ia->second, ib->second)) return true;
            if (structural_less(ib->second, ia->second)) return false;
        }
        return false;
    }

    void add_term(const BaseMonomial& m, const ParamRat& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

private:
    Terms terms_;
};

} // namespace vlasym
