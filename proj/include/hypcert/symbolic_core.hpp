#pragma once

// Poisson calculus on polynomial symbols.
//
// Sign convention: {f, g} = sum_k f_{zeta_k} g_{y_k} - f_{y_k} g_{zeta_k}, where
// y = (t, x) and zeta = (tau, xi). Hence {xi_1, x_1} = +1 and
// H_f = (f_tau, f_xi, -f_t, -f_x), so that H_{t - phi} = (0, -phi_xi, -1, phi_x).
// Many texts use the opposite sign.

#include <optional>
#include <string>
#include <vector>

#include "hypcert/poly_symbol.hpp"
#include "hypcert/rational_matrix.hpp"

namespace hypcert {

inline PolySymbol poisson_bracket(const PolySymbol& f, const PolySymbol& g)
{
    f.check_dim(g);
    const Layout lay = f.layout();
    PolySymbol r(f.dim());
    for (int k = 0; k < lay.half(); ++k) {
        const int y = k;
        const int zeta = lay.partner(k);
        r += f.derivative(zeta) * g.derivative(y);
        r -= f.derivative(y) * g.derivative(zeta);
    }
    return r;
}

/// H_f at a point, coordinates ordered (t, x, tau, xi).
inline std::vector<Rational> hamilton_field(const PolySymbol& f, const PhasePoint& at)
{
    f.check_point(at);
    const Layout lay = f.layout();
    std::vector<Rational> h(lay.nvars());
    for (int k = 0; k < lay.half(); ++k) {
        const int zeta = lay.partner(k);
        h[k] = f.derivative(zeta).evaluate(at);
        h[zeta] = -f.derivative(k).evaluate(at);
    }
    return h;
}

/// Degree of a term in the fiber variables (tau, xi).
inline int fiber_degree(const Layout& lay, const Exponent& e)
{
    int deg = 0;
    for (int i = lay.tau(); i < lay.nvars(); ++i) deg += e[i];
    return deg;
}

struct HomogeneityResult {
    bool homogeneous = false;
    /// Euler defect sum_j zeta_j d f/d zeta_j - m f.
    PolySymbol residual;
};

/// Euler test for positive homogeneity of degree m in the fiber variables.
///
/// The symbols a, phi, q_i, r_i never contain tau, so this coincides with the
/// xi-degree test on them; including tau keeps p = -tau^2 + a homogeneous.
inline HomogeneityResult homogeneity_check(const PolySymbol& f, int m)
{
    const Layout lay = f.layout();
    HomogeneityResult res{true, PolySymbol(f.dim())};
    for (const auto& [e, c] : f.terms()) {
        int defect = fiber_degree(lay, e) - m;
        if (defect != 0) {
            res.homogeneous = false;
            res.residual.add_term(e, c * defect);
        }
    }
    return res;
}

/// Degree <= 2 Taylor data of a symbol at a base point.
///
/// The quadratic form is Q(v) = v^T M v in the shifted variables v = w - base,
/// so M is half the Hessian.
struct QuadraticJet {
    int d = 1;
    RationalMatrix form;          // symmetric, size 2(d+1)
    std::vector<int> block_a;     // optional partition; complement is block B
    PhasePoint base;

    int size() const { return form.rows(); }

    Rational evaluate(std::span<const Rational> v) const
    {
        Rational s = 0;
        for (int i = 0; i < size(); ++i)
            for (int j = 0; j < size(); ++j)
                if (form(i, j) != 0) s += form(i, j) * v[i] * v[j];
        return s;
    }

    /// The form as a polynomial in the shifted variables.
    PolySymbol as_polynomial() const
    {
        PolySymbol r(d);
        const Layout lay{d};
        for (int i = 0; i < size(); ++i)
            for (int j = 0; j < size(); ++j) {
                if (form(i, j) == 0) continue;
                Exponent e(lay.nvars(), 0);
                ++e[i];
                ++e[j];
                r.add_term(std::move(e), form(i, j));
            }
        return r;
    }

    /// Builds the jet of a polynomial that is already a quadratic form in v.
    static QuadraticJet from_quadratic(const PolySymbol& q)
    {
        QuadraticJet j;
        j.d = q.dim();
        const int n = q.layout().nvars();
        j.form = RationalMatrix(n, n);
        j.base = PhasePoint::base(q.dim());
        for (const auto& [e, c] : q.terms()) {
            std::vector<int> idx;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < e[i]; ++k) idx.push_back(i);
            if (idx.size() != 2) throw InvariantViolation("quadratic form", "term of degree " + std::to_string(idx.size()));
            if (idx[0] == idx[1]) {
                j.form(idx[0], idx[0]) += c;
            } else {
                j.form(idx[0], idx[1]) += c / 2;
                j.form(idx[1], idx[0]) += c / 2;
            }
        }
        return j;
    }
};

struct TaylorData {
    Rational value;
    std::vector<Rational> gradient;
};

inline TaylorData first_order_data(const PolySymbol& p, const PhasePoint& at)
{
    p.check_point(at);
    TaylorData td{p.evaluate(at), {}};
    for (int i = 0; i < p.layout().nvars(); ++i) td.gradient.push_back(p.derivative(i).evaluate(at));
    return td;
}

/// Exact quadratic part of p at a double characteristic.
/// Throws NotSingular naming the first nonvanishing derivative.
inline QuadraticJet quadratic_jet(const PolySymbol& p, const PhasePoint& at)
{
    const Layout lay = p.layout();
    TaylorData td = first_order_data(p, at);
    if (td.value != 0) throw NotSingular("", format_rational(td.value));
    for (int i = 0; i < lay.nvars(); ++i)
        if (td.gradient[i] != 0) throw NotSingular(lay.name(i), format_rational(td.gradient[i]));

    QuadraticJet j;
    j.d = p.dim();
    j.base = at;
    const int n = lay.nvars();
    j.form = RationalMatrix(n, n);
    for (int i = 0; i < n; ++i) {
        PolySymbol di = p.derivative(i);
        for (int k = i; k < n; ++k) {
            Rational h = di.derivative(k).evaluate(at) / 2;
            j.form(i, k) = h;
            j.form(k, i) = h;
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// Symplectic frames

struct FramePair {
    PolySymbol X;
    PolySymbol Xi;
};

/// Candidate coordinates {X_j, Xi_j}, j = first_index..d, around a base point.
struct CandidateFrame {
    int first_index = 1;
    std::vector<FramePair> pairs;
    PhasePoint base;

    int last_index() const { return first_index + static_cast<int>(pairs.size()) - 1; }
};

struct FrameReport {
    bool ok = true;
    std::vector<std::string> failures;

    void fail(std::string msg)
    {
        ok = false;
        failures.push_back(std::move(msg));
    }
};

/// Verifies canonical bracket relations exactly and the base-point conditions
/// X_j = 0 (all j), Xi_j = 0 (j < d), Xi_d != 0.
inline FrameReport check_frame(const CandidateFrame& frame)
{
    FrameReport rep;
    const int n = static_cast<int>(frame.pairs.size());
    auto label = [&](const char* what, int i) { return std::string(what) + "_" + std::to_string(frame.first_index + i); };

    for (int i = 0; i < n; ++i) {
        const auto& [Xi_, Xii] = frame.pairs[i];
        if (!homogeneity_check(Xi_, 0).homogeneous) rep.fail(label("X", i) + " is not homogeneous of degree 0");
        if (!homogeneity_check(Xii, 1).homogeneous) rep.fail(label("Xi", i) + " is not homogeneous of degree 1");
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i < j) {
                PolySymbol xx = poisson_bracket(frame.pairs[i].X, frame.pairs[j].X);
                if (!xx.is_zero()) rep.fail("{" + label("X", i) + ", " + label("X", j) + "} = " + xx.to_string() + " != 0");
                PolySymbol ss = poisson_bracket(frame.pairs[i].Xi, frame.pairs[j].Xi);
                if (!ss.is_zero()) rep.fail("{" + label("Xi", i) + ", " + label("Xi", j) + "} = " + ss.to_string() + " != 0");
            }
            PolySymbol sx = poisson_bracket(frame.pairs[i].Xi, frame.pairs[j].X);
            PolySymbol want = PolySymbol::constant(sx.dim(), i == j ? 1 : 0);
            if (!(sx == want))
                rep.fail("{" + label("Xi", i) + ", " + label("X", j) + "} = " + sx.to_string() + " != " + (i == j ? "1" : "0"));
        }
    }
    for (int i = 0; i < n; ++i) {
        Rational xv = frame.pairs[i].X.evaluate(frame.base);
        if (xv != 0) rep.fail(label("X", i) + "(base) = " + format_rational(xv) + " != 0");
        Rational sv = frame.pairs[i].Xi.evaluate(frame.base);
        bool last = i == n - 1;
        if (!last && sv != 0) rep.fail(label("Xi", i) + "(base) = " + format_rational(sv) + " != 0");
        if (last && sv == 0) rep.fail(label("Xi", i) + "(base) = 0, must be nonzero");
    }
    return rep;
}

} // namespace hypcert
