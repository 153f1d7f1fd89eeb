#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vlasym/error.hpp"
#include "vlasym/expr.hpp"

namespace vlasym {

/// X = A_t Dt + A_r Dr + A_v Dv + A_0.
///
/// The paper-style notation X = -a Dt - b Dr - c Dv - d corresponds to
/// dt = -a, dr = -b, dv = -c, scalar = -d.
struct VectorField {
    Expr dt, dr, dv, scalar;

    const Expr& operator[](Var x) const { return x == Var::t ? dt : x == Var::r ? dr : dv; }
    Expr& operator[](Var x) { return x == Var::t ? dt : x == Var::r ? dr : dv; }

    bool is_zero() const { return dt.is_zero() && dr.is_zero() && dv.is_zero() && scalar.is_zero(); }

    VectorField operator-() const { return {-dt, -dr, -dv, -scalar}; }
    friend VectorField operator+(const VectorField& a, const VectorField& b) {
        return {a.dt + b.dt, a.dr + b.dr, a.dv + b.dv, a.scalar + b.scalar};
    }
    friend VectorField operator-(const VectorField& a, const VectorField& b) {
        return {a.dt - b.dt, a.dr - b.dr, a.dv - b.dv, a.scalar - b.scalar};
    }
    friend VectorField operator*(const Expr& c, const VectorField& a) {
        return {c * a.dt, c * a.dr, c * a.dv, c * a.scalar};
    }
    friend VectorField operator*(const ParamRat& c, const VectorField& a) { return Expr(c) * a; }

    friend bool operator==(const VectorField& a, const VectorField& b) { return (a - b).is_zero(); }

    VectorField subst_param(std::string_view name, const ParamRat& value) const {
        return {dt.subst_param(name, value), dr.subst_param(name, value), dv.subst_param(name, value),
                scalar.subst_param(name, value)};
    }

    /// Derivation part applied to f (no scalar multiplication).
    Expr derive(const Expr& f) const {
        Expr out;
        for (Var x : kVars) {
            const Expr& a = (*this)[x];
            if (!a.is_zero()) out += a * f.diff(x);
        }
        return out;
    }
};

/// Operator action: A_t f_t + A_r f_r + A_v f_v + A_0 f.
inline Expr vf_apply(const VectorField& X, const Expr& f) { return X.derive(f) + X.scalar * f; }

/// Commutator [X, Y] of two first-order operators with multiplication parts.
inline VectorField vf_bracket(const VectorField& X, const VectorField& Y) {
    VectorField out;
    for (Var x : kVars) out[x] = X.derive(Y[x]) - Y.derive(X[x]);
    out.scalar = X.derive(Y.scalar) - Y.derive(X.scalar);
    return out;
}

/// Result of testing [L, X] = lambda L + rho.
struct SymmetryReport {
    Expr lambda;
    std::optional<ParamRat> rho;  // empty when the scalar part depends on (t, r, v)
    Expr residual_r;
    Expr residual_v;
    Expr residual_scalar;
    bool ok = false;
};

/// Extracts the multiplier of a dynamical symmetry.
///
/// Requires L to have zero scalar part and a nonzero constant Dt
/// coefficient; lambda is read off the Dt component.
inline SymmetryReport symmetry_multiplier(const VectorField& L, const VectorField& X) {
    auto lt = L.dt.as_param_constant();
    if (!lt || lt->is_zero()) throw InvalidArgument("operator must have a nonzero constant Dt coefficient");
    if (!L.scalar.is_zero()) throw InvalidArgument("operator must have zero scalar part");
    const VectorField C = vf_bracket(L, X);
    SymmetryReport rep;
    rep.lambda = C.dt / Expr(*lt);
    rep.residual_r = C.dr - rep.lambda * L.dr;
    rep.residual_v = C.dv - rep.lambda * L.dv;
    rep.residual_scalar = C.scalar;
    rep.rho = C.scalar.as_param_constant();
    rep.ok = rep.residual_r.is_zero() && rep.residual_v.is_zero() && rep.rho.has_value();
    return rep;
}

/// W = sum_i coefficients[i] * basis[i] + remainder.
struct BasisExpansion {
    std::vector<ParamRat> coefficients;
    VectorField remainder;
    bool in_span() const { return remainder.is_zero(); }
};

namespace detail {

/// Linear system over ParamRat built by matching monomials after clearing denominators.
class SpanSolver {
public:
    explicit SpanSolver(std::size_t unknowns) : n_(unknowns) {}

    void add_component(const Expr& w, const std::vector<Expr>& cols) {
        // common denominator of w and all basis entries of this component
        std::vector<Expr::Factor> lcm;
        auto merge = [&](const Expr& e) {
            for (auto& f : e.factors()) {
                bool found = false;
                for (auto& g : lcm)
                    if (g.poly == f.poly) {
                        g.power = std::max(g.power, f.power);
                        found = true;
                    }
                if (!found) lcm.push_back(f);
            }
        };
        merge(w);
        for (auto& c : cols) merge(c);
        Expr scale(1);
        for (auto& f : lcm) scale *= Expr(f.poly).pow(f.power);

        const GPoly wn = (w * scale).num();
        std::vector<GPoly> cn;
        cn.reserve(cols.size());
        for (auto& c : cols) {
            Expr prod = c * scale;
            if (!prod.is_polynomial()) throw InvalidArgument("failed to clear denominators");
            cn.push_back(prod.num());
        }
        std::map<BaseMonomial, std::vector<ParamRat>> rows;
        auto row_for = [&](const BaseMonomial& m) -> std::vector<ParamRat>& {
            auto it = rows.find(m);
            if (it == rows.end()) it = rows.emplace(m, std::vector<ParamRat>(n_ + 1)).first;
            return it->second;
        };
        for (std::size_t j = 0; j < cn.size(); ++j)
            for (auto& [m, c] : cn[j].terms()) row_for(m)[j] = c;
        for (auto& [m, c] : wn.terms()) row_for(m)[n_] = c;
        for (auto& [m, row] : rows) insert(std::move(row));
    }

    std::size_t rank() const { return pivots_.size(); }

    /// Back-substitution; free unknowns are set to zero.
    std::vector<ParamRat> solve() const {
        std::vector<ParamRat> x(n_);
        for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
            const auto& [col, row] = *it;
            ParamRat acc = row[n_];
            for (std::size_t j = col + 1; j < n_; ++j)
                if (!row[j].is_zero() && !x[j].is_zero()) acc -= row[j] * x[j];
            x[col] = acc / row[col];
        }
        return x;
    }

private:
    void insert(std::vector<ParamRat> row) {
        for (auto& [col, prow] : pivots_) {
            if (row[col].is_zero()) continue;
            const ParamRat f = row[col] / prow[col];
            for (std::size_t j = col; j <= n_; ++j)
                if (!prow[j].is_zero()) row[j] -= f * prow[j];
        }
        for (std::size_t j = 0; j < n_; ++j) {
            if (!row[j].is_zero()) {
                pivots_.emplace(j, std::move(row));
                return;
            }
        }
        // inconsistent or trivial row; the remainder will report inconsistency
    }

    std::size_t n_;
    std::map<std::size_t, std::vector<ParamRat>> pivots_;
};

} // namespace detail

/// Expands W in a linearly independent basis with ParamRat coefficients.
inline BasisExpansion expand_in_basis(const VectorField& W, std::span<const VectorField> basis) {
    detail::SpanSolver solver(basis.size());
    auto column = [&](auto get) {
        std::vector<Expr> cols;
        cols.reserve(basis.size());
        for (auto& b : basis) cols.push_back(get(b));
        return cols;
    };
    solver.add_component(W.dt, column([](const VectorField& b) { return b.dt; }));
    solver.add_component(W.dr, column([](const VectorField& b) { return b.dr; }));
    solver.add_component(W.dv, column([](const VectorField& b) { return b.dv; }));
    solver.add_component(W.scalar, column([](const VectorField& b) { return b.scalar; }));
    if (solver.rank() < basis.size()) throw InvalidArgument("degenerate basis: fields are linearly dependent");
    BasisExpansion out;
    out.coefficients = solver.solve();
    VectorField span_part;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (!out.coefficients[i].is_zero()) span_part = span_part + out.coefficients[i] * basis[i];
    out.remainder = W - span_part;
    return out;
}

} // namespace vlasym
