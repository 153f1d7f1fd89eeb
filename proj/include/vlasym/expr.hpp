#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "vlasym/error.hpp"
#include "vlasym/gpoly.hpp"
#include "vlasym/param.hpp"

namespace vlasym {

/// Exact symbolic function of (t, r, v): a GPoly numerator over a factored
/// denominator.
///
/// The denominator is kept as a product of powers of normalized factors
/// (leading monomial 1, leading coefficient 1, at least two terms). Units
/// (single-term polynomials) are always folded into the numerator. Adding
/// two fractions uses the least common multiple of the factor lists, and
/// after every operation the numerator is tested for exact divisibility by
/// each factor. No GCDs are computed: two Exprs are equal iff their
/// difference has an empty numerator, which is sound because the ring of
/// generalized polynomials is an integral domain.
class Expr {
public:
    struct Factor {
        GPoly poly;
        int power = 0;
    };

    Expr() = default;
    Expr(const ParamRat& c) : num_(c) {}  // NOLINT(google-explicit-constructor)
    Expr(const Rational& c) : num_(ParamRat(c)) {}  // NOLINT(google-explicit-constructor)
    Expr(long c) : num_(ParamRat(c)) {}  // NOLINT(google-explicit-constructor)
    Expr(int c) : num_(ParamRat(static_cast<long>(c))) {}  // NOLINT(google-explicit-constructor)
    explicit Expr(GPoly num) : num_(std::move(num)) {}

    static Expr var(Var x, Rational p = 1) { return Expr(GPoly::var(x, std::move(p))); }
    static Expr param(std::string_view name) { return Expr(ParamRat::symbol(name)); }
    static Expr monomial(const ParamRat& c, Rational et, Rational er, Rational ev) {
        return Expr(GPoly::term(BaseMonomial(std::move(et), std::move(er), std::move(ev)), c));
    }

    const GPoly& num() const { return num_; }
    const std::vector<Factor>& factors() const { return factors_; }
    GPoly den() const {
        GPoly d(ParamRat(1));
        for (auto& f : factors_) d *= f.poly.pow(static_cast<unsigned>(f.power));
        return d;
    }

    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return factors_.empty(); }
    bool depends_on(Var x) const {
        if (num_.depends_on(x)) return true;
        return std::any_of(factors_.begin(), factors_.end(), [x](const Factor& f) { return f.poly.depends_on(x); });
    }
    /// The value as a parameter expression if it does not depend on (t, r, v).
    std::optional<ParamRat> as_param_constant() const {
        if (!factors_.empty() || !num_.is_param_constant()) return std::nullopt;
        return num_.constant_coefficient();
    }

    Expr operator-() const {
        Expr r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend Expr operator+(const Expr& a, const Expr& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.factors_.empty() && b.factors_.empty()) return Expr(a.num_ + b.num_);
        std::vector<Factor> lcm = a.factors_;
        for (auto& f : b.factors_) {
            auto* slot = find(lcm, f.poly);
            if (slot) slot->power = std::max(slot->power, f.power);
            else lcm.push_back(f);
        }
        Expr r;
        r.num_ = a.num_ * cofactor(lcm, a.factors_) + b.num_ * cofactor(lcm, b.factors_);
        r.factors_ = std::move(lcm);
        r.cancel();
        return r;
    }
    friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

    friend Expr operator*(const Expr& a, const Expr& b) {
        if (a.is_zero() || b.is_zero()) return {};
        Expr r;
        r.num_ = a.num_ * b.num_;
        r.factors_ = a.factors_;
        for (auto& f : b.factors_) r.add_factor_power(f.poly, f.power);
        r.cancel();
        return r;
    }

    friend Expr operator/(const Expr& a, const Expr& b) {
        if (b.is_zero()) throw DivisionByZero("division by the zero expression");
        Expr r;
        r.num_ = a.num_;
        r.factors_ = a.factors_;
        for (auto& f : b.factors_) r.add_factor_power(f.poly, -f.power);
        const auto& [lm, lc] = b.num_.leading();
        r.num_ = r.num_.times_term(BaseMonomial{} / lm, ParamRat(1) / lc);
        if (!b.num_.is_single_term()) {
            GPoly unit_free = b.num_.times_term(BaseMonomial{} / lm, ParamRat(1) / lc);
            r.add_factor_power(unit_free, 1);
        }
        r.cancel();
        return r;
    }

    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }
    Expr& operator/=(const Expr& o) { return *this = *this / o; }

    Expr pow(long n) const {
        if (n < 0) return Expr(1) / pow(-n);
        Expr r;
        r.num_ = num_.pow(static_cast<unsigned>(n));
        for (auto& f : factors_) r.factors_.push_back({f.poly, f.power * static_cast<int>(n)});
        if (n == 0) r.factors_.clear();
        return r;
    }

    Expr diff(Var x) const {
        if (factors_.empty()) return Expr(num_.diff(x));
        // d(N / prod f_i^p_i) = (N' prod_S f_i - N sum_S p_i f_i' prod_{S\i} f_j) / prod f_i^(p_i + [i in S])
        std::vector<std::size_t> moving;
        std::vector<GPoly> dfs(factors_.size());
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            dfs[i] = factors_[i].poly.diff(x);
            if (!dfs[i].is_zero()) moving.push_back(i);
        }
        GPoly prod_all(ParamRat(1));
        for (auto i : moving) prod_all *= factors_[i].poly;
        GPoly top = num_.diff(x) * prod_all;
        for (auto i : moving) {
            GPoly others(ParamRat(1));
            for (auto j : moving)
                if (j != i) others *= factors_[j].poly;
            top -= (num_ * dfs[i] * others).scaled(ParamRat(static_cast<long>(factors_[i].power)));
        }
        Expr r;
        r.num_ = std::move(top);
        r.factors_ = factors_;
        for (auto i : moving) r.factors_[i].power += 1;
        r.cancel();
        return r;
    }

    double eval(const Point& p, const ParamValues& values) const {
        double d = 1.0;
        for (auto& f : factors_) d *= std::pow(f.poly.eval(p, values), f.power);
        if (d == 0.0) throw PoleError("pole: denominator vanishes at the evaluation point");
        return num_.eval(p, values) / d;
    }

    Expr subst_param(std::size_t idx, const ParamRat& value) const {
        Expr r(num_.subst_param_polypart(idx, value));
        for (auto& f : factors_) r /= Expr(f.poly.subst_param_polypart(idx, value)).pow(f.power);
        return r;
    }
    Expr subst_param(std::string_view name, const ParamRat& value) const {
        auto i = param_index(name);
        if (!i) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
        return subst_param(static_cast<std::size_t>(*i), value);
    }

    friend bool operator==(const Expr& a, const Expr& b) { return (a - b).is_zero(); }

private:
    static Factor* find(std::vector<Factor>& fs, const GPoly& p) {
        for (auto& f : fs)
            if (f.poly == p) return &f;
        return nullptr;
    }
    static const Factor* find(const std::vector<Factor>& fs, const GPoly& p) {
        for (auto& f : fs)
            if (f.poly == p) return &f;
        return nullptr;
    }
    static GPoly cofactor(const std::vector<Factor>& full, const std::vector<Factor>& part) {
        GPoly m(ParamRat(1));
        for (auto& f : full) {
            const Factor* have = find(part, f.poly);
            const int missing = f.power - (have ? have->power : 0);
            if (missing > 0) m *= f.poly.pow(static_cast<unsigned>(missing));
        }
        return m;
    }

    /// Adds `power` to the exponent of factor p; a negative net power moves into the numerator.
    void add_factor_power(const GPoly& p, int power) {
        if (Factor* slot = find(factors_, p)) {
            slot->power += power;
            if (slot->power < 0) {
                num_ *= p.pow(static_cast<unsigned>(-slot->power));
                slot->power = 0;
            }
        } else if (power > 0) {
            factors_.push_back({p, power});
        } else if (power < 0) {
            num_ *= p.pow(static_cast<unsigned>(-power));
        }
    }

    void cancel() {
        if (num_.is_zero()) { factors_.clear(); return; }
        for (auto& f : factors_) {
            while (f.power > 0) {
                GPoly q;
                if (!num_.divide_exact(f.poly, q)) break;
                num_ = std::move(q);
                --f.power;
            }
        }
        factors_.erase(std::remove_if(factors_.begin(), factors_.end(), [](const Factor& f) { return f.power == 0; }),
                       factors_.end());
        std::sort(factors_.begin(), factors_.end(),
                  [](const Factor& a, const Factor& b) { return structural_less(a.poly, b.poly); });
    }

    GPoly num_;
    std::vector<Factor> factors_;
};

inline Expr operator*(const ParamRat& c, const Expr& e) { return Expr(c) * e; }

inline Expr t_() { return Expr::var(Var::t); }
inline Expr r_() { return Expr::var(Var::r); }
inline Expr v_() { return Expr::var(Var::v); }

} // namespace vlasym
