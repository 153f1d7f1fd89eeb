#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "vlasym/error.hpp"
#include "vlasym/rational.hpp"

namespace vlasym {

// Parameter symbols. Order fixes the printing order and the monomial order.
inline constexpr std::array<std::string_view, 18> kParamNames = {
    "mu", "x", "gamma", "k", "q", "A12", "A110", "A100", "B110",
    "B100", "D0", "phi0", "b120", "b121", "delta0", "alpha", "beta", "eps"};
inline constexpr std::size_t kNumParams = kParamNames.size();

inline std::optional<int> param_index(std::string_view name) {
    for (std::size_t i = 0; i < kNumParams; ++i)
        if (kParamNames[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

/// Numeric values for parameter symbols; NaN marks "unassigned".
class ParamValues {
public:
    ParamValues() { values_.fill(std::nan("")); }
    ParamValues(std::initializer_list<std::pair<std::string_view, double>> init) : ParamValues() {
        for (auto& [name, value] : init) set(name, value);
    }
    ParamValues& set(std::string_view name, double value) {
        auto i = param_index(name);
        if (!i) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
        values_[static_cast<std::size_t>(*i)] = value;
        return *this;
    }
    double get(std::size_t i) const {
        if (std::isnan(values_[i]))
            throw InvalidArgument("parameter '" + std::string(kParamNames[i]) + "' has no numeric value");
        return values_[i];
    }
    bool has(std::size_t i) const { return !std::isnan(values_[i]); }

private:
    std::array<double, kNumParams> values_{};
};

class ParamRat;

/// Sparse polynomial in the parameter symbols with rational coefficients.
class ParamPoly {
public:
    using Mono = std::array<std::uint16_t, kNumParams>;
    using Terms = std::map<Mono, Rational>;

    ParamPoly() = default;
    ParamPoly(const Rational& c) {  // NOLINT(google-explicit-constructor)
        if (!c.is_zero()) terms_.emplace(Mono{}, c);
    }
    ParamPoly(long c) : ParamPoly(Rational(c)) {}  // NOLINT(google-explicit-constructor)

    static ParamPoly symbol(std::size_t idx) {
        ParamPoly p;
        Mono m{};
        m[idx] = 1;
        p.terms_.emplace(m, Rational(1));
        return p;
    }
    static ParamPoly term(const Mono& m, const Rational& c) {
        ParamPoly p;
        if (!c.is_zero()) p.terms_.emplace(m, c);
        return p;
    }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_monomial() const { return terms_.size() == 1; }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Mono{});
    }
    Rational constant_value() const {
        if (terms_.empty()) return Rational(0);
        if (!is_constant()) throw InvalidArgument("parameter polynomial is not constant");
        return terms_.begin()->second;
    }
    const std::pair<const Mono, Rational>& leading() const { return *terms_.rbegin(); }
    bool uses(std::size_t idx) const {
        return std::any_of(terms_.begin(), terms_.end(), [idx](auto& t) { return t.first[idx] != 0; });
    }

    ParamPoly operator-() const {
        ParamPoly r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    ParamPoly& operator+=(const ParamPoly& o) {
        for (auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    ParamPoly& operator-=(const ParamPoly& o) {
        for (auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend ParamPoly operator+(ParamPoly a, const ParamPoly& b) { return a += b; }
    friend ParamPoly operator-(ParamPoly a, const ParamPoly& b) { return a -= b; }
    friend ParamPoly operator*(const ParamPoly& a, const ParamPoly& b) {
        ParamPoly r;
        for (auto& [ma, ca] : a.terms_)
            for (auto& [mb, cb] : b.terms_) r.add_term(mono_mul(ma, mb), ca * cb);
        return r;
    }
    ParamPoly& operator*=(const ParamPoly& o) { return *this = *this * o; }

    ParamPoly scaled(const Rational& c) const {
        if (c.is_zero()) return {};
        ParamPoly r = *this;
        for (auto& [m, v] : r.terms_) v *= c;
        return r;
    }

    ParamPoly pow(unsigned e) const {
        ParamPoly r(1), base = *this;
        while (e) {
            if (e & 1u) r *= base;
            e >>= 1u;
            if (e) base *= base;
        }
        return r;
    }

    /// Divides by a monomial known to divide every term.
    ParamPoly divided_by_mono(const Mono& m) const {
        ParamPoly r;
        for (auto& [tm, c] : terms_) {
            Mono q = tm;
            for (std::size_t i = 0; i < kNumParams; ++i) q[i] = static_cast<std::uint16_t>(q[i] - m[i]);
            r.terms_.emplace(q, c);
        }
        return r;
    }

    /// Elementwise-minimum monomial over all terms (zero for the zero polynomial).
    Mono monomial_content() const {
        if (terms_.empty()) return Mono{};
        Mono g = terms_.begin()->first;
        for (auto& [m, c] : terms_)
            for (std::size_t i = 0; i < kNumParams; ++i) g[i] = std::min(g[i], m[i]);
        return g;
    }

    /// Exact multivariate division under lex order; false if d does not divide.
    bool divide_exact(const ParamPoly& d, ParamPoly& quotient) const {
        if (d.is_zero()) throw DivisionByZero("parameter polynomial division by zero");
        ParamPoly rem = *this;
        ParamPoly q;
        const auto& [dm, dc] = d.leading();
        while (!rem.is_zero()) {
            const auto [rm, rc] = rem.leading();
            Mono tm{};
            for (std::size_t i = 0; i < kNumParams; ++i) {
                if (rm[i] < dm[i]) return false;
                tm[i] = static_cast<std::uint16_t>(rm[i] - dm[i]);
            }
            ParamPoly t = term(tm, rc / dc);
            q += t;
            rem -= t * d;
        }
        quotient = std::move(q);
        return true;
    }

    /// Exact square root when this polynomial is a perfect square.
    bool exact_sqrt(ParamPoly& out) const {
        if (is_zero()) { out = {}; return true; }
        const auto& [lm, lc] = leading();
        Rational rc;
        if (!lc.exact_sqrt(rc)) return false;
        Mono sm{};
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (lm[i] % 2) return false;
            sm[i] = static_cast<std::uint16_t>(lm[i] / 2);
        }
        ParamPoly s = term(sm, rc);
        const Rational two_lead = rc * Rational(2);
        ParamPoly rem = *this - s * s;
        for (std::size_t guard = 0; !rem.is_zero(); ++guard) {
            if (guard > 4 * terms_.size() + 16) return false;
            const auto [rm, rcoef] = rem.leading();
            Mono tm{};
            for (std::size_t i = 0; i < kNumParams; ++i) {
                if (rm[i] < sm[i]) return false;
                tm[i] = static_cast<std::uint16_t>(rm[i] - sm[i]);
            }
            if (!(tm < sm)) return false;
            s += term(tm, rcoef / two_lead);
            rem = *this - s * s;
        }
        out = std::move(s);
        return true;
    }

    double eval(const ParamValues& values) const {
        double sum = 0.0;
        for (auto& [m, c] : terms_) {
            double t = c.to_double();
            for (std::size_t i = 0; i < kNumParams; ++i)
                if (m[i]) t *= std::pow(values.get(i), m[i]);
            sum += t;
        }
        return sum;
    }

    ParamRat subst(std::size_t idx, const ParamRat& value) const;

    friend bool operator==(const ParamPoly& a, const ParamPoly& b) { return a.terms_ == b.terms_; }
    friend bool operator<(const ParamPoly& a, const ParamPoly& b) { return a.terms_ < b.terms_; }

    static Mono mono_mul(const Mono& a, const Mono& b) {
        Mono r{};
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const unsigned d = unsigned(a[i]) + unsigned(b[i]);
            if (d > 0xFFFFu) throw DomainError("parameter degree overflow");
            r[i] = static_cast<std::uint16_t>(d);
        }
        return r;
    }

private:
    void add_term(const Mono& m, const Rational& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    Terms terms_;
};

/// Element of the fraction field of ParamPoly.
///
/// Normal form: monomial content shared by numerator and denominator is
/// removed, the denominator is monic (leading coefficient 1 in lex order),
/// and an exact polynomial quotient in either direction is taken when one
/// exists. Equality is decided by cross-multiplication.
class ParamRat {
public:
    ParamRat() : den_(1) {}
    ParamRat(const Rational& c) : num_(c), den_(1) {}  // NOLINT(google-explicit-constructor)
    ParamRat(long c) : num_(c), den_(1) {}             // NOLINT(google-explicit-constructor)
    ParamRat(ParamPoly n) : num_(std::move(n)), den_(1) {}  // NOLINT(google-explicit-constructor)
    ParamRat(ParamPoly n, ParamPoly d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

    static ParamRat symbol(std::size_t idx) { return ParamRat(ParamPoly::symbol(idx)); }
    static ParamRat symbol(std::string_view name) {
        auto i = param_index(name);
        if (!i) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
        return symbol(static_cast<std::size_t>(*i));
    }

    const ParamPoly& num() const { return num_; }
    const ParamPoly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_ == den_; }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }
    bool uses(std::size_t idx) const { return num_.uses(idx) || den_.uses(idx); }

    ParamRat operator-() const { return ParamRat(-num_, den_, Raw{}); }
    friend ParamRat operator+(const ParamRat& a, const ParamRat& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return ParamRat(a.num_ + b.num_, a.den_);
        if (a.den_.is_monomial() && b.den_.is_monomial()) {
            // lcm of monic monomials
            const auto& ma = a.den_.leading().first;
            const auto& mb = b.den_.leading().first;
            ParamPoly::Mono l{};
            for (std::size_t i = 0; i < kNumParams; ++i) l[i] = std::max(ma[i], mb[i]);
            ParamPoly fa = ParamPoly::term(l, 1).divided_by_mono(ma);
            ParamPoly fb = ParamPoly::term(l, 1).divided_by_mono(mb);
            return ParamRat(a.num_ * fa + b.num_ * fb, ParamPoly::term(l, 1));
        }
        return ParamRat(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend ParamRat operator-(const ParamRat& a, const ParamRat& b) { return a + (-b); }
    friend ParamRat operator*(const ParamRat& a, const ParamRat& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.den_.is_constant() && b.den_.is_constant()) return ParamRat(a.num_ * b.num_);
        return ParamRat(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend ParamRat operator/(const ParamRat& a, const ParamRat& b) {
        if (b.is_zero()) throw DivisionByZero("division by a zero parameter expression");
        return ParamRat(a.num_ * b.den_, a.den_ * b.num_);
    }
    ParamRat& operator+=(const ParamRat& o) { return *this = *this + o; }
    ParamRat& operator-=(const ParamRat& o) { return *this = *this - o; }
    ParamRat& operator*=(const ParamRat& o) { return *this = *this * o; }
    ParamRat& operator/=(const ParamRat& o) { return *this = *this / o; }

    ParamRat pow(long e) const {
        if (e < 0) return ParamRat(1) / pow(-e);
        return ParamRat(num_.pow(static_cast<unsigned>(e)), den_.pow(static_cast<unsigned>(e)));
    }

    /// Exact square root within the fraction field, if one exists.
    std::optional<ParamRat> exact_sqrt() const {
        ParamPoly sn, sd;
        if (num_.exact_sqrt(sn) && den_.exact_sqrt(sd)) return ParamRat(sn, sd);
        ParamPoly prod = num_ * den_;
        if (prod.exact_sqrt(sn)) return ParamRat(sn, den_);
        return std::nullopt;
    }

    double eval(const ParamValues& values) const {
        const double d = den_.eval(values);
        if (d == 0.0) throw PoleError("parameter denominator vanishes at the given values");
        return num_.eval(values) / d;
    }

    ParamRat subst(std::size_t idx, const ParamRat& value) const {
        return num_.subst(idx, value) / den_.subst(idx, value);
    }

    friend bool operator==(const ParamRat& a, const ParamRat& b) {
        if (a.den_ == b.den_) return a.num_ == b.num_;
        return a.num_ * b.den_ == b.num_ * a.den_;
    }

    /// Structural (not numeric) ordering; used only for canonical containers.
    friend bool structural_less(const ParamRat& a, const ParamRat& b) {
        if (a.num_ == b.num_) return a.den_ < b.den_;
        return a.num_ < b.num_;
    }

private:
    struct Raw {};
    ParamRat(ParamPoly n, ParamPoly d, Raw) : num_(std::move(n)), den_(std::move(d)) {}

    void normalize() {
        if (den_.is_zero()) throw DivisionByZero("parameter expression with zero denominator");
        if (num_.is_zero()) { den_ = ParamPoly(1); return; }
        // shared monomial content
        auto gn = num_.monomial_content();
        auto gd = den_.monomial_content();
        ParamPoly::Mono g{};
        bool any = false;
        for (std::size_t i = 0; i < kNumParams; ++i) {
            g[i] = std::min(gn[i], gd[i]);
            any = any || g[i] != 0;
        }
        if (any) {
            num_ = num_.divided_by_mono(g);
            den_ = den_.divided_by_mono(g);
        }
        const Rational lc = den_.leading().second;
        if (!lc.is_one()) {
            const Rational inv = Rational(1) / lc;
            num_ = num_.scaled(inv);
            den_ = den_.scaled(inv);
        }
        if (den_.is_constant()) return;
        ParamPoly q;
        if (num_.divide_exact(den_, q)) {
            num_ = std::move(q);
            den_ = ParamPoly(1);
            return;
        }
        if (!num_.is_monomial() && den_.divide_exact(num_, q)) {
            // num/den = 1/q; renormalize so the new denominator is monic
            const Rational c = q.leading().second;
            num_ = ParamPoly(Rational(1) / c);
            den_ = q.scaled(Rational(1) / c);
        }
    }

    ParamPoly num_;
    ParamPoly den_;
};

inline ParamRat ParamPoly::subst(std::size_t idx, const ParamRat& value) const {
    ParamRat result;
    for (auto& [m, c] : terms_) {
        Mono rest = m;
        const auto e = rest[idx];
        rest[idx] = 0;
        ParamRat t = ParamRat(term(rest, c));
        if (e) t *= value.pow(e);
        result += t;
    }
    return result;
}

inline ParamRat sym(std::string_view name) { return ParamRat::symbol(name); }

} // namespace vlasym
