#pragma once

// Symbols presented in one of the two normal forms near a double characteristic
// at (t, x, xi) = (0, 0, e_d), their side conditions, and the cutoff-extended
// quadratic functional Q(w, theta) whose minimum drives the lower bounds.
//
// Form1 (0 <= p <= d-1), x_0 = t:
//   a = sum_{i<=p} (x_{i-1} - x_i)^2 q_i + sum_{i<=p} xi_i^2 r_i + ((x_p - phi_p)^2 + psi_p) q_{p+1}
// Form2 (1 <= p <= d-1):
//   a = sum_{i<=p} (x_{i-1} - x_i)^2 q_i + sum_{i<=p} xi_i^2 r_i + g_p r_p

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "hypcert/error.hpp"
#include "hypcert/jet.hpp"
#include "hypcert/poly_symbol.hpp"
#include "hypcert/symbolic_core.hpp"

namespace hypcert {

enum class NormalFormVariant { Form1, Form2 };

inline std::string to_string(NormalFormVariant v) { return v == NormalFormVariant::Form1 ? "form1" : "form2"; }

struct NormalFormSpec {
    NormalFormVariant variant = NormalFormVariant::Form1;
    int d = 1;
    int p = 0;
    /// q_1..q_p, plus q_{p+1} for Form1.
    std::vector<PolySymbol> q;
    /// r_1..r_p.
    std::vector<PolySymbol> r;
    /// Form1 only.
    PolySymbol phi;
    PolySymbol psi;
    /// Form2 only.
    PolySymbol g;
    /// Composite symbol the user claims this spec assembles to, if any.
    std::optional<PolySymbol> composite;

    std::size_t q_count() const { return variant == NormalFormVariant::Form1 ? p + 1 : p; }
};

namespace detail {

inline PolySymbol assemble(const NormalFormSpec& s)
{
    const int d = s.d;
    PolySymbol a(d);
    auto xk = [&](int k) { return k == 0 ? PolySymbol::t(d) : PolySymbol::x(d, k); };
    for (int i = 1; i <= s.p; ++i) {
        PolySymbol diff = xk(i - 1) - xk(i);
        a += diff * diff * s.q[i - 1];
        a += PolySymbol::xi(d, i).pow(2) * s.r[i - 1];
    }
    if (s.variant == NormalFormVariant::Form1) {
        PolySymbol lift = xk(s.p) - s.phi;
        a += (lift * lift + s.psi) * s.q[s.p];
    } else {
        a += s.g * s.r[s.p - 1];
    }
    return a;
}

/// Throws InvariantViolation(field) unless f only involves the allowed variables.
inline void require_vars(const PolySymbol& f, const std::vector<bool>& allowed, const std::string& field)
{
    const Layout lay = f.layout();
    for (int i = 0; i < lay.nvars(); ++i)
        if (!allowed[i] && f.depends_on(i)) throw InvariantViolation(field, "must not depend on " + lay.name(i));
}

inline void require_fiber_degree(const PolySymbol& f, int m, const std::string& field)
{
    if (!homogeneity_check(f, m).homogeneous)
        throw InvariantViolation(field, "must be homogeneous of degree " + std::to_string(m) + " in xi");
}

} // namespace detail

/// Checks every structural invariant of the spec; throws InvariantViolation naming the field.
inline void validate(const NormalFormSpec& s)
{
    const bool f1 = s.variant == NormalFormVariant::Form1;
    if (s.d < 2 && !f1) throw InvariantViolation("p", "Form2 needs d >= 2");
    if (f1 ? (s.p < 0 || s.p > s.d - 1) : (s.p < 1 || s.p > s.d - 1))
        throw InvariantViolation("p", "index " + std::to_string(s.p) + " out of range for d = " + std::to_string(s.d));
    if (s.q.size() != s.q_count()) throw InvariantViolation("q", "expected " + std::to_string(s.q_count()) + " factors");
    if (static_cast<int>(s.r.size()) != s.p) throw InvariantViolation("r", "expected " + std::to_string(s.p) + " factors");

    const Layout lay{s.d};
    const PhasePoint base = PhasePoint::base(s.d);
    std::vector<bool> no_tau(lay.nvars(), true);
    no_tau[lay.tau()] = false;

    auto check_dim = [&](const PolySymbol& f, const std::string& field) {
        if (f.dim() != s.d) throw InvariantViolation(field, "dimension " + std::to_string(f.dim()) + " != " + std::to_string(s.d));
    };
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        const std::string field = "q" + std::to_string(i + 1);
        check_dim(s.q[i], field);
        detail::require_vars(s.q[i], no_tau, field);
        detail::require_fiber_degree(s.q[i], 2, field);
        if (s.q[i].evaluate(base) <= 0) throw InvariantViolation(field, "not positive at the base point");
    }
    for (std::size_t i = 0; i < s.r.size(); ++i) {
        const std::string field = "r" + std::to_string(i + 1);
        check_dim(s.r[i], field);
        detail::require_vars(s.r[i], no_tau, field);
        detail::require_fiber_degree(s.r[i], 0, field);
        if (s.r[i].evaluate(base) <= 0) throw InvariantViolation(field, "not positive at the base point");
    }

    // Remainders live in (x_{p+1}.., xi_{p+1}..); g_p may also involve x_p.
    std::vector<bool> tail(lay.nvars(), false);
    for (int j = s.p + 1; j <= s.d; ++j) tail[lay.x(j)] = tail[lay.xi(j)] = true;
    if (f1) {
        for (const auto& [f, field, deg] : {std::tuple{&s.phi, "phi", 0}, std::tuple{&s.psi, "psi", 0}}) {
            check_dim(*f, field);
            detail::require_vars(*f, tail, field);
            detail::require_fiber_degree(*f, deg, field);
            if (f->evaluate(base) != 0) throw InvariantViolation(field, "must vanish at the base point");
        }
    } else {
        tail[lay.x(s.p)] = true;
        check_dim(s.g, "g");
        detail::require_vars(s.g, tail, "g");
        detail::require_fiber_degree(s.g, 2, "g");
        if (s.g.evaluate(base) != 0) throw InvariantViolation("g", "must vanish at the base point");
    }

    if (s.composite) {
        check_dim(*s.composite, "symbol");
        if (!(detail::assemble(s) == *s.composite))
            throw InvariantViolation("symbol", "does not match the assembled normal form");
    }
}

inline PolySymbol build_normal_form(const NormalFormSpec& spec)
{
    validate(spec);
    return detail::assemble(spec);
}

// ---------------------------------------------------------------------------
// Side conditions

struct SideGrid {
    double x_half = 0.1;
    double xi_half = 0.1;
    int count = 21;
};

struct OneSidedCheck {
    bool pass = true;
    double worst = 0.0;
    /// Full phase coordinates of the worst sample.
    std::vector<double> witness;
    std::size_t samples = 0;
    /// Human-readable description of the grid.
    std::string grid;
};

struct SideConditionReport {
    NormalFormVariant variant = NormalFormVariant::Form1;
    /// {phi_p,{phi_p,psi_p}} (Form1) or {xi_p,{xi_p,g_p}} (Form2) at the base point.
    Rational double_bracket = 0;
    bool double_bracket_ok = false;
    /// sum 1/r_i(base), Form2 only.
    std::optional<Rational> inverse_r_sum;
    bool bbis_ok = true;
    bool positivity_ok = true;
    OneSidedCheck one_sided;
    std::vector<std::string> messages;

    bool ok() const { return double_bracket_ok && bbis_ok && positivity_ok && one_sided.pass; }
};

namespace detail {

/// Samples f over a tensor grid on the variables it (or guard) depends on; other
/// coordinates sit at the base point. Points where guard < 0 are skipped; the
/// coordinate `half_line` (if >= 0) is restricted to [0, x_half].
inline OneSidedCheck sample_nonnegative(const PolySymbol& f, const PolySymbol* guard, int half_line, const SideGrid& grid)
{
    const Layout lay = f.layout();
    const int d = f.dim();
    std::vector<int> vars;
    for (int i = 0; i < lay.nvars(); ++i)
        if (f.depends_on(i) || (guard && guard->depends_on(i)) || i == half_line) vars.push_back(i);

    OneSidedCheck out;
    int count = std::max(grid.count, 3);
    // Keep the tensor grid under ~4M samples.
    while (vars.size() > 1 && std::pow(double(count), double(vars.size())) > 4e6 && count > 3) count = std::max(3, count / 2);
    out.grid = std::to_string(count) + " points per axis over {";
    for (std::size_t k = 0; k < vars.size(); ++k) out.grid += (k ? "," : "") + lay.name(vars[k]);
    out.grid += "}, |x| <= " + std::to_string(grid.x_half) + ", |xi - e_d| <= " + std::to_string(grid.xi_half);

    std::vector<double> lo(vars.size()), hi(vars.size());
    for (std::size_t k = 0; k < vars.size(); ++k) {
        const int v = vars[k];
        double h = lay.is_dual(v) ? grid.xi_half : grid.x_half;
        double c = v == lay.xi(d) ? 1.0 : 0.0;
        lo[k] = v == half_line ? 0.0 : c - h;
        hi[k] = c + h;
    }

    const CompiledPoly cf(f);
    const CompiledPoly cg = guard ? CompiledPoly(*guard) : CompiledPoly();
    std::vector<double> scratch(std::max(cf.scratch_size(), cg.scratch_size()) + 1);
    std::vector<double> pt(lay.nvars(), 0.0);
    pt[lay.xi(d)] = 1.0;
    std::vector<int> idx(vars.size(), 0);
    bool first = true;
    while (true) {
        for (std::size_t k = 0; k < vars.size(); ++k)
            pt[vars[k]] = lo[k] + (hi[k] - lo[k]) * idx[k] / double(count - 1);
        if (!guard || cg(pt.data(), scratch.data()) >= 0) {
            double v = cf(pt.data(), scratch.data());
            ++out.samples;
            if (first || v < out.worst) {
                out.worst = v;
                out.witness = pt;
                first = false;
            }
        }
        std::size_t k = 0;
        while (k < vars.size() && ++idx[k] == count) idx[k++] = 0;
        if (k == vars.size()) break;
    }
    out.pass = out.worst >= -1e-12;
    return out;
}

} // namespace detail

/// Exact side-condition checks plus grid-sampled one-sided signs. Never throws on
/// a failed condition; dimension or arity errors still throw.
inline SideConditionReport check_side_conditions(const NormalFormSpec& s, const SideGrid& grid = {})
{
    if (s.q.size() != s.q_count() || static_cast<int>(s.r.size()) != s.p)
        throw InvariantViolation("q/r", "factor count does not match p");
    SideConditionReport rep;
    rep.variant = s.variant;
    const PhasePoint base = PhasePoint::base(s.d);
    const Layout lay{s.d};

    for (std::size_t i = 0; i < s.q.size(); ++i)
        if (s.q[i].evaluate(base) <= 0) {
            rep.positivity_ok = false;
            rep.messages.push_back("q" + std::to_string(i + 1) + " is not positive at the base point");
        }
    for (std::size_t i = 0; i < s.r.size(); ++i)
        if (s.r[i].evaluate(base) <= 0) {
            rep.positivity_ok = false;
            rep.messages.push_back("r" + std::to_string(i + 1) + " is not positive at the base point");
        }

    if (s.variant == NormalFormVariant::Form1) {
        rep.double_bracket = poisson_bracket(s.phi, poisson_bracket(s.phi, s.psi)).evaluate(base);
        rep.double_bracket_ok = rep.double_bracket == 0;
        if (!rep.double_bracket_ok) rep.messages.push_back("{phi,{phi,psi}} does not vanish at the base point");
        rep.one_sided = detail::sample_nonnegative(s.psi, &s.phi, -1, grid);
        if (!rep.one_sided.pass) rep.messages.push_back("psi takes negative values where phi >= 0");
    } else {
        const PolySymbol xp = PolySymbol::xi(s.d, s.p);
        rep.double_bracket = poisson_bracket(xp, poisson_bracket(xp, s.g)).evaluate(base);
        rep.double_bracket_ok = rep.double_bracket == 0;
        if (!rep.double_bracket_ok) rep.messages.push_back("{xi_p,{xi_p,g}} does not vanish at the base point");
        if (rep.positivity_ok) {
            Rational sum = 0;
            for (const auto& ri : s.r) sum += 1 / ri.evaluate(base);
            rep.inverse_r_sum = sum;
            rep.bbis_ok = sum > 1;
            if (!rep.bbis_ok) rep.messages.push_back("sum of 1/r_i <= 1: not effectively hyperbolic by psi(0) criterion");
        } else {
            rep.bbis_ok = false;
        }
        rep.one_sided = detail::sample_nonnegative(s.g, nullptr, lay.x(s.p), grid);
        if (!rep.one_sided.pass) rep.messages.push_back("g takes negative values for x_p >= 0");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Cutoff

/// chi: odd, C^2, nondecreasing; chi(s) = s on [0,1], a quintic Hermite blend on
/// [1,2] and 2 beyond. scaled(s) = delta * chi(s / delta).
struct Cutoff {
    double delta = 1.0;

    static double chi(double s)
    {
        double a = std::abs(s);
        double v;
        if (a <= 1)
            v = a;
        else if (a >= 2)
            v = 2;
        else {
            double u = a - 1;
            v = 1 + u + u * u * u * (4 + u * (-7 + 3 * u));
        }
        return s < 0 ? -v : v;
    }
    static double dchi(double s)
    {
        double a = std::abs(s);
        if (a <= 1) return 1;
        if (a >= 2) return 0;
        double u = a - 1;
        return (u - 1) * (u - 1) * (15 * u * u + 2 * u + 1);
    }
    static double d2chi(double s)
    {
        double a = std::abs(s);
        if (a <= 1 || a >= 2) return 0;
        double u = a - 1;
        double v = u * (24 + u * (-84 + 60 * u));
        return s < 0 ? -v : v;
    }

    double scaled(double s) const { return delta * chi(s / delta); }

    template <class T>
    T apply(const T& s) const
    {
        if constexpr (std::is_same_v<T, double>) {
            return scaled(s);
        } else {
            double u = value_of(s) / delta;
            return s.compose(delta * chi(u), dchi(u), d2chi(u) / delta);
        }
    }
};

inline Cutoff build_cutoff(double delta)
{
    if (!(delta > 0)) throw NonPositiveInput("cutoff scale must be positive");
    return Cutoff{delta};
}

// ---------------------------------------------------------------------------
// Extended Q

/// Q(w, theta) normalized by q_{p+1} (Form1) or r_p (Form2), so that
///   a / q_{p+1} = eps^2 Q + psi(z)          with eps = t - phi(z)   (Form1)
///   a / r_p     = eps^2 Q + g(x_p, z)       with eps = t - x_p      (Form2)
/// wherever the cutoff is inactive.
///
/// w = (y_a, eta_a); theta = (t, z_x, z_xi, eps) for Form1 and
/// (t, z_x, z_xi, x_p, eps) for Form2, z = (x_b, xi_b) - (0, e_d).
class ExtendedQ {
public:
    ExtendedQ(NormalFormSpec spec, Cutoff cutoff) : spec_(std::move(spec)), cut_(cutoff)
    {
        validate(spec_);
        const PhasePoint base = PhasePoint::base(spec_.d);
        const PolySymbol& norm = normalizer_poly();
        norm_bar_ = norm.evaluate(base);
        for (const auto& f : spec_.q) {
            qc_.emplace_back(f);
            qbar_hat_.push_back(f.evaluate(base) / norm_bar_);
        }
        for (const auto& f : spec_.r) {
            rc_.emplace_back(f);
            rbar_hat_.push_back(f.evaluate(base) / norm_bar_);
        }
        remainder_ = is_form1() ? spec_.psi : spec_.g;
        remc_ = CompiledPoly(remainder_);
        normc_ = CompiledPoly(norm);

        std::vector<double> zero_w(w_dim(), 0.0);
        Jet2 j = constant_part_t<Jet2>(seed(zero_w));
        if (w_dim() > 0) {
            Eigen::VectorXd sol = j.h.ldlt().solve(-j.g);
            w_star_.assign(sol.data(), sol.data() + sol.size());
        }
        m_star_ = constant_part(w_star_);
    }

    const NormalFormSpec& spec() const { return spec_; }
    const Cutoff& cutoff() const { return cut_; }
    bool is_form1() const { return spec_.variant == NormalFormVariant::Form1; }
    int d() const { return spec_.d; }
    int p() const { return spec_.p; }
    int y_dim() const { return is_form1() ? spec_.p : spec_.p - 1; }
    int w_dim() const { return y_dim() + spec_.p; }
    int z_dim() const { return 2 * (spec_.d - spec_.p); }
    int theta_dim() const { return 2 + z_dim() + (is_form1() ? 0 : 1); }
    int eps_index() const { return theta_dim() - 1; }

    /// Normalized base values q_j/N, r_j/N at the base point.
    const std::vector<Rational>& qbar_hat() const { return qbar_hat_; }
    const std::vector<Rational>& rbar_hat() const { return rbar_hat_; }
    const Rational& normalizer_at_base() const { return norm_bar_; }
    const PolySymbol& normalizer_poly() const { return is_form1() ? spec_.q[spec_.p] : spec_.r[spec_.p - 1]; }
    const PolySymbol& remainder_poly() const { return remainder_; }

    /// Heuristic radius in |t| + |z| inside which Q(., theta) stays comparable to Q(., 0).
    double stability_radius() const { return cut_.delta / 4; }

    /// Minimizer and minimum of Q(., 0), solved in closed form.
    const std::vector<double>& constant_minimizer() const { return w_star_; }
    double constant_minimum() const { return m_star_; }

    template <class T>
    T evaluate(std::span<const T> w, std::span<const T> theta) const
    {
        check(w.size(), theta.size());
        const int d = spec_.d, p = spec_.p, n = Layout{d}.nvars();
        const Layout lay{d};
        const T zero = theta[0] * 0.0;
        const T& t = theta[0];
        const T& eps = theta[eps_index()];
        std::vector<T> pt(n, zero);
        pt[0] = t;
        const int zx = 1, zxi = 1 + (d - p);
        for (int j = p + 1; j <= d; ++j) {
            pt[lay.x(j)] = theta[zx + (j - p - 1)];
            pt[lay.xi(j)] = theta[zxi + (j - p - 1)] + (j == d ? 1.0 : 0.0);
        }
        if (is_form1()) {
            for (int k = 1; k <= p; ++k) pt[lay.x(k)] = cut_.apply(eps * w[k - 1] + t);
        } else {
            const T& xp = theta[theta_dim() - 2];
            pt[lay.x(p)] = xp;
            for (int k = 1; k < p; ++k) pt[lay.x(k)] = cut_.apply(xp - eps * w[k - 1]);
        }
        for (int k = 1; k <= p; ++k) pt[lay.xi(k)] = cut_.apply(eps * w[y_dim() + k - 1]);

        std::vector<double> scratch(n * 16);
        auto ev = [&](const PolySymbol& f, const CompiledPoly& c) -> T {
            if constexpr (std::is_same_v<T, double>) {
                if (scratch.size() < c.scratch_size()) scratch.resize(c.scratch_size());
                return c(pt.data(), scratch.data());
            } else {
                return f.evaluate_with<T>(std::span<const T>(pt), [&](const Rational& r) { return zero + to_double(r); });
            }
        };
        const T inv_norm = 1.0 / ev(normalizer_poly(), normc_) + zero;
        auto y = [&](int k) -> T { return k >= 1 && k <= y_dim() ? w[k - 1] : zero; };

        T sum = zero;
        if (is_form1()) {
            for (int j = 1; j <= p; ++j) {
                T dy = y(j - 1) - y(j);
                sum = sum + dy * dy * ev(spec_.q[j - 1], qc_[j - 1]) * inv_norm;
            }
            T anchor = y(p) + 1.0;
            sum = sum + anchor * anchor;
        } else {
            T anchor = y(1) + 1.0;
            sum = sum + anchor * anchor * ev(spec_.q[0], qc_[0]) * inv_norm;
            for (int j = 1; j < p; ++j) {
                T dy = y(j) - y(j + 1);
                sum = sum + dy * dy * ev(spec_.q[j], qc_[j]) * inv_norm;
            }
        }
        for (int j = 1; j <= p; ++j) {
            const T& eta = w[y_dim() + j - 1];
            sum = sum + eta * eta * ev(spec_.r[j - 1], rc_[j - 1]) * inv_norm;
        }
        return sum;
    }

    double operator()(std::span<const double> w, std::span<const double> theta) const { return evaluate<double>(w, theta); }

    /// Value, gradient and Hessian in w at fixed theta.
    Jet2 jet_in_w(std::span<const double> w, std::span<const double> theta) const
    {
        check(w.size(), theta.size());
        std::vector<Jet2> jw = seed(w);
        const int n = w_dim();
        std::vector<Jet2> jt;
        for (double v : theta) jt.emplace_back(v, n);
        return evaluate<Jet2>(std::span<const Jet2>(jw), std::span<const Jet2>(jt));
    }

    /// Closed-form Q(w, 0) from the cached base values.
    double constant_part(std::span<const double> w) const { return constant_part_t<double>(std::vector<double>(w.begin(), w.end())); }

    /// Phase-space coordinates (t, x, tau = 0, xi) represented by (w, theta), without cutoff.
    std::vector<double> reconstruct(std::span<const double> w, std::span<const double> theta) const
    {
        check(w.size(), theta.size());
        const int d = spec_.d, p = spec_.p;
        const Layout lay{d};
        std::vector<double> pt(lay.nvars(), 0.0);
        const double t = theta[0], eps = theta[eps_index()];
        pt[0] = t;
        for (int j = p + 1; j <= d; ++j) {
            pt[lay.x(j)] = theta[1 + (j - p - 1)];
            pt[lay.xi(j)] = theta[1 + (d - p) + (j - p - 1)] + (j == d ? 1.0 : 0.0);
        }
        if (is_form1()) {
            for (int k = 1; k <= p; ++k) pt[lay.x(k)] = eps * w[k - 1] + t;
        } else {
            const double xp = theta[theta_dim() - 2];
            pt[lay.x(p)] = xp;
            for (int k = 1; k < p; ++k) pt[lay.x(k)] = xp - eps * w[k - 1];
        }
        for (int k = 1; k <= p; ++k) pt[lay.xi(k)] = eps * w[y_dim() + k - 1];
        return pt;
    }

    /// psi(z) (Form1) or g(x_p, z) (Form2) at theta.
    double remainder(std::span<const double> theta) const
    {
        std::vector<double> w(w_dim(), 0.0);
        auto pt = reconstruct(w, theta);
        std::vector<double> scratch(remc_.scratch_size() + 1);
        return remc_(pt.data(), scratch.data());
    }

    double normalizer(std::span<const double> coords) const
    {
        std::vector<double> scratch(normc_.scratch_size() + 1);
        return normc_(coords.data(), scratch.data());
    }

    /// Builds theta from its parts; x_p is ignored for Form1.
    std::vector<double> make_theta(double t, std::span<const double> z, double x_p, double eps) const
    {
        if (static_cast<int>(z.size()) != z_dim()) throw DimensionMismatch("z has wrong length");
        std::vector<double> th{t};
        th.insert(th.end(), z.begin(), z.end());
        if (!is_form1()) th.push_back(x_p);
        th.push_back(eps);
        return th;
    }

private:
    void check(std::size_t nw, std::size_t nt) const
    {
        if (static_cast<int>(nw) != w_dim()) throw DimensionMismatch("w has wrong length");
        if (static_cast<int>(nt) != theta_dim()) throw DimensionMismatch("theta has wrong length");
    }

    std::vector<Jet2> seed(std::span<const double> w) const
    {
        std::vector<Jet2> jw;
        for (int i = 0; i < w_dim(); ++i) jw.push_back(Jet2::variable(w[i], i, w_dim()));
        return jw;
    }

    template <class T>
    T constant_part_t(const std::vector<T>& w) const
    {
        const int p = spec_.p;
        T zero{};
        if constexpr (std::is_same_v<T, double>)
            zero = 0.0;
        else
            zero = T(0.0, w_dim());
        auto y = [&](int k) -> T { return k >= 1 && k <= y_dim() ? w[k - 1] : zero; };
        T sum = zero;
        if (is_form1()) {
            for (int j = 1; j <= p; ++j) {
                T dy = y(j - 1) - y(j);
                sum = sum + dy * dy * to_double(qbar_hat_[j - 1]);
            }
            T anchor = y(p) + 1.0;
            sum = sum + anchor * anchor;
        } else {
            T anchor = y(1) + 1.0;
            sum = sum + anchor * anchor * to_double(qbar_hat_[0]);
            for (int j = 1; j < p; ++j) {
                T dy = y(j) - y(j + 1);
                sum = sum + dy * dy * to_double(qbar_hat_[j]);
            }
        }
        for (int j = 1; j <= p; ++j) sum = sum + w[y_dim() + j - 1] * w[y_dim() + j - 1] * to_double(rbar_hat_[j - 1]);
        return sum;
    }

    NormalFormSpec spec_;
    Cutoff cut_;
    Rational norm_bar_;
    std::vector<Rational> qbar_hat_, rbar_hat_;
    std::vector<CompiledPoly> qc_, rc_;
    PolySymbol remainder_;
    CompiledPoly remc_, normc_;
    std::vector<double> w_star_;
    double m_star_ = 0.0;
};

inline ExtendedQ build_extended_Q(const NormalFormSpec& spec, const Cutoff& cutoff) { return ExtendedQ(spec, cutoff); }

} // namespace hypcert
