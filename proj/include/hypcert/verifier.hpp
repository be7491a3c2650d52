#pragma once

// Grid certification of the lower bound a >= c min{t^2, (t - phi)^2}|xi|^2,
// the bracket bound {phi, a}^2 <= 4 kappa a, one-sidedness in t, the
// minimization of Q(w, theta) and the structural chain behind the lower bound.
// Every estimate here is empirical: an inf or sup over a finite tensor grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypcert/error.hpp"
#include "hypcert/jet.hpp"
#include "hypcert/normal_forms.hpp"
#include "hypcert/parallel.hpp"
#include "hypcert/poly_symbol.hpp"
#include "hypcert/symbolic_core.hpp"
#include "hypcert/time_functions.hpp"
#include "hypcert/univariate.hpp"

namespace hypcert {

// ---------------------------------------------------------------------------
// Region and grids

struct Region {
    double t_max = 0.1;
    double x_half = 0.1;
    double xi_half = 0.1;
    int t_count = 33;
    int x_count = 33;
    int xi_count = 33;
    /// Denominator exclusion threshold; 0 selects 1e-10 * scale^2.
    double eta_den = 0.0;

    double scale() const { return std::max({t_max, x_half, xi_half}); }
    double eta() const { return eta_den > 0 ? eta_den : 1e-10 * scale() * scale(); }

    void validate() const
    {
        if (!(t_max > 0)) throw InvariantViolation("region.t_max", "must be positive");
        if (!(x_half > 0) || !(xi_half > 0)) throw InvariantViolation("region.half_width", "must be positive");
        if (xi_half >= 1) throw InvariantViolation("region.xi_half", "must be below 1 so the box stays off xi = 0");
        if (t_count < 3 || x_count < 3 || xi_count < 3) throw InvariantViolation("region.counts", "grid counts must be >= 3");
        if (eta_den < 0) throw InvariantViolation("region.eta_den", "must be positive (0 selects the default)");
    }

    /// Same counts, half the extents.
    Region halved() const
    {
        Region r = *this;
        r.t_max /= 2;
        r.x_half /= 2;
        r.xi_half /= 2;
        return r;
    }

    /// Halves every grid spacing; the refined grid contains the original one.
    Region refined() const
    {
        Region r = *this;
        r.t_count = 2 * t_count - 1;
        r.x_count = 2 * x_count - 1;
        r.xi_count = 2 * xi_count - 1;
        return r;
    }

    std::uint64_t points(int d, bool mirrored = false) const
    {
        std::uint64_t n = static_cast<std::uint64_t>(mirrored ? t_count - 1 : t_count);
        for (int j = 0; j < d; ++j) n *= static_cast<std::uint64_t>(x_count) * static_cast<std::uint64_t>(xi_count);
        return n;
    }
};

/// Uniform tensor grid over the phase variables; tau is pinned to 0.
struct PhaseGrid {
    int d = 1;
    std::vector<std::vector<double>> values; // one axis per phase variable

    /// n uniform points on [lo, hi], built around the midpoint so that it is hit exactly
    /// for odd n and refinement (n -> 2n - 1) reproduces every original point bit for bit.
    static std::vector<double> axis(double lo, double hi, int n)
    {
        const double mid = (lo + hi) / 2, half = (hi - lo) / 2;
        std::vector<double> v(n);
        for (int k = 0; k < n; ++k) v[k] = mid + half * (double(2 * k - (n - 1)) / (n - 1));
        return v;
    }

    /// mirrored selects t in [-t_max, 0) instead of [0, t_max].
    static PhaseGrid make(int d, const Region& r, bool mirrored = false)
    {
        const Layout lay{d};
        PhaseGrid g;
        g.d = d;
        g.values.resize(lay.nvars());
        if (mirrored) {
            for (int k = 1; k < r.t_count; ++k) g.values[0].push_back(-(r.t_max * k / (r.t_count - 1)));
        } else {
            g.values[0] = axis(0.0, r.t_max, r.t_count);
        }
        g.values[lay.tau()] = {0.0};
        for (int j = 1; j <= d; ++j) {
            g.values[lay.x(j)] = axis(-r.x_half, r.x_half, r.x_count);
            auto off = axis(-r.xi_half, r.xi_half, r.xi_count);
            if (j == d)
                for (auto& v : off) v += 1.0;
            g.values[lay.xi(j)] = std::move(off);
        }
        return g;
    }

    std::uint64_t size() const
    {
        std::uint64_t n = 1;
        for (const auto& v : values) n *= v.size();
        return n;
    }

    /// Multi-index of a flat index; the last variable varies fastest.
    void decode(std::uint64_t flat, std::vector<int>& idx) const
    {
        idx.assign(values.size(), 0);
        for (int i = static_cast<int>(values.size()) - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(flat % values[i].size());
            flat /= values[i].size();
        }
    }

    void advance(std::vector<int>& idx) const
    {
        for (int i = static_cast<int>(values.size()) - 1; i >= 0; --i) {
            if (++idx[i] < static_cast<int>(values[i].size())) return;
            idx[i] = 0;
        }
    }

    std::vector<double> point(const std::vector<int>& idx) const
    {
        std::vector<double> p(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) p[i] = values[i][idx[i]];
        return p;
    }

    std::vector<double> point(std::uint64_t flat) const
    {
        std::vector<int> idx;
        decode(flat, idx);
        return point(idx);
    }
};

/// Polynomial evaluator on a PhaseGrid using tabulated axis powers.
class GridPoly {
public:
    GridPoly(const PolySymbol& f, const PhaseGrid& g)
    {
        const int n = f.layout().nvars();
        std::vector<int> maxdeg(n, 0);
        for (int i = 0; i < n; ++i) maxdeg[i] = f.degree_in(i);
        stride_.assign(n, 0);
        table_.assign(n, {});
        for (int i = 0; i < n; ++i) {
            stride_[i] = maxdeg[i] + 1;
            for (double v : g.values[i]) {
                double pw = 1.0;
                for (int e = 0; e <= maxdeg[i]; ++e, pw *= v) table_[i].push_back(pw);
            }
        }
        for (const auto& [e, c] : f.terms()) {
            coeff_.push_back(to_double(c));
            start_.push_back(static_cast<int>(factors_.size()));
            for (int i = 0; i < n; ++i)
                if (e[i]) factors_.push_back({i, e[i]});
        }
        start_.push_back(static_cast<int>(factors_.size()));
    }

    double operator()(const std::vector<int>& idx) const
    {
        double sum = 0.0;
        for (std::size_t t = 0; t < coeff_.size(); ++t) {
            double term = coeff_[t];
            for (int k = start_[t]; k < start_[t + 1]; ++k) {
                const auto& f = factors_[k];
                term *= table_[f.var][idx[f.var] * stride_[f.var] + f.exp];
            }
            sum += term;
        }
        return sum;
    }

private:
    struct Factor {
        int var;
        int exp;
    };
    std::vector<double> coeff_;
    std::vector<int> start_;
    std::vector<Factor> factors_;
    std::vector<std::vector<double>> table_;
    std::vector<int> stride_;
};

// ---------------------------------------------------------------------------
// Fused grid scan

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScanStats {
    std::uint64_t points = 0;
    double min_a = kInf;
    std::uint64_t min_a_at = 0;
    double max_abs_a = 0.0;

    double min_c = kInf;
    std::uint64_t min_c_at = 0;
    std::uint64_t c_evaluated = 0, c_excluded = 0;

    double max_k = -kInf;
    std::uint64_t max_k_at = 0;
    std::uint64_t k_evaluated = 0, k_excluded = 0;

    /// Merges a later chunk; strict comparisons keep the earliest witness on ties.
    void merge(const ScanStats& o)
    {
        points += o.points;
        if (o.min_a < min_a) {
            min_a = o.min_a;
            min_a_at = o.min_a_at;
        }
        max_abs_a = std::max(max_abs_a, o.max_abs_a);
        if (o.min_c < min_c) {
            min_c = o.min_c;
            min_c_at = o.min_c_at;
        }
        c_evaluated += o.c_evaluated;
        c_excluded += o.c_excluded;
        if (o.max_k > max_k) {
            max_k = o.max_k;
            max_k_at = o.max_k_at;
        }
        k_evaluated += o.k_evaluated;
        k_excluded += o.k_excluded;
    }
};

/// One pass over the grid. phi may be null (nonnegativity only).
inline ScanStats scan(const PolySymbol& a, const PolySymbol* phi, const PhaseGrid& g, double eta)
{
    const Layout lay = a.layout();
    const GridPoly ga(a, g);
    std::optional<GridPoly> gphi, gbr;
    if (phi) {
        gphi.emplace(*phi, g);
        gbr.emplace(poisson_bracket(*phi, a), g);
    }
    const std::uint64_t total = g.size();
    const std::uint64_t chunks = std::min<std::uint64_t>(total, 256);
    std::vector<ScanStats> parts(chunks);
    for_each_chunk(chunks, [&](std::size_t c) {
        const std::uint64_t begin = total * c / chunks, end = total * (c + 1) / chunks;
        ScanStats s;
        std::vector<int> idx;
        g.decode(begin, idx);
        for (std::uint64_t flat = begin; flat < end; ++flat, g.advance(idx)) {
            ++s.points;
            const double av = ga(idx);
            if (av < s.min_a) {
                s.min_a = av;
                s.min_a_at = flat;
            }
            s.max_abs_a = std::max(s.max_abs_a, std::abs(av));
            if (!phi) continue;

            const double t = g.values[0][idx[0]];
            const double ph = (*gphi)(idx);
            double xi2 = 0;
            for (int j = 1; j <= lay.d; ++j) {
                double v = g.values[lay.xi(j)][idx[lay.xi(j)]];
                xi2 += v * v;
            }
            const double den = std::min(t * t, (t - ph) * (t - ph)) * xi2;
            if (den >= eta) {
                ++s.c_evaluated;
                double r = av / den;
                if (r < s.min_c) {
                    s.min_c = r;
                    s.min_c_at = flat;
                }
            } else {
                ++s.c_excluded;
            }
            if (av >= eta) {
                ++s.k_evaluated;
                const double br = (*gbr)(idx);
                double r = br * br / (4 * av);
                if (r > s.max_k) {
                    s.max_k = r;
                    s.max_k_at = flat;
                }
            } else {
                ++s.k_excluded;
            }
        }
        parts[c] = s;
    });
    ScanStats out;
    for (const auto& p : parts) out.merge(p);
    return out;
}

} // namespace detail

struct NonnegativityResult {
    bool pass = false;
    double min_value = 0.0;
    std::vector<double> witness;
    std::uint64_t points = 0;
    /// Mirrored grid t in [-t_max, 0).
    bool negative_for_negative_t = false;
    double mirrored_min = 0.0;
    std::vector<double> mirrored_witness;
    std::uint64_t mirrored_points = 0;
};

struct Estimate {
    double value = 0.0;
    std::vector<double> witness;
    std::uint64_t evaluated = 0;
    std::uint64_t excluded = 0;
    std::uint64_t points = 0;
};

inline double nonneg_tolerance(double max_abs) { return -1e-12 * std::max(1.0, max_abs); }

inline NonnegativityResult verify_nonnegativity(const PolySymbol& a, const Region& region)
{
    region.validate();
    const PhaseGrid g = PhaseGrid::make(a.dim(), region), gm = PhaseGrid::make(a.dim(), region, true);
    auto s = detail::scan(a, nullptr, g, region.eta());
    auto m = detail::scan(a, nullptr, gm, region.eta());
    NonnegativityResult r;
    r.points = s.points;
    r.min_value = s.min_a;
    r.witness = g.point(s.min_a_at);
    r.pass = s.min_a >= nonneg_tolerance(s.max_abs_a);
    r.mirrored_points = m.points;
    r.mirrored_min = m.min_a;
    r.mirrored_witness = gm.point(m.min_a_at);
    r.negative_for_negative_t = m.min_a < nonneg_tolerance(m.max_abs_a);
    return r;
}

/// inf of a / (min{t^2, (t-phi)^2}|xi|^2) over grid points whose denominator is >= eta.
inline Estimate estimate_c(const PolySymbol& a, const PolySymbol& phi, const Region& region)
{
    region.validate();
    const PhaseGrid g = PhaseGrid::make(a.dim(), region);
    auto s = detail::scan(a, &phi, g, region.eta());
    if (s.c_evaluated == 0) throw AllPointsDegenerate("every grid point has a degenerate c denominator");
    return {s.min_c, g.point(s.min_c_at), s.c_evaluated, s.c_excluded, s.points};
}

/// sup of {phi, a}^2 / (4a) over grid points with a >= eta.
inline Estimate estimate_kappa(const PolySymbol& a, const PolySymbol& phi, const Region& region)
{
    region.validate();
    const PhaseGrid g = PhaseGrid::make(a.dim(), region);
    auto s = detail::scan(a, &phi, g, region.eta());
    if (s.k_evaluated == 0) throw AllPointsDegenerate("a is below eta_den at every grid point");
    return {s.max_k, g.point(s.max_k_at), s.k_evaluated, s.k_excluded, s.points};
}

struct GridCertificate {
    Region region;
    NonnegativityResult nonneg;
    std::optional<Estimate> c;
    std::optional<Estimate> kappa;
    std::string c_error, kappa_error;
};

/// Nonnegativity, c and kappa from a single fused pass (plus the mirrored pass).
inline GridCertificate certify_grid(const PolySymbol& a, const PolySymbol& phi, const Region& region)
{
    region.validate();
    GridCertificate out;
    out.region = region;
    const PhaseGrid g = PhaseGrid::make(a.dim(), region), gm = PhaseGrid::make(a.dim(), region, true);
    auto s = detail::scan(a, &phi, g, region.eta());
    auto m = detail::scan(a, nullptr, gm, region.eta());
    auto& nn = out.nonneg;
    nn.points = s.points;
    nn.min_value = s.min_a;
    nn.witness = g.point(s.min_a_at);
    nn.pass = s.min_a >= nonneg_tolerance(s.max_abs_a);
    nn.mirrored_points = m.points;
    nn.mirrored_min = m.min_a;
    nn.mirrored_witness = gm.point(m.min_a_at);
    nn.negative_for_negative_t = m.min_a < nonneg_tolerance(m.max_abs_a);
    if (s.c_evaluated)
        out.c = Estimate{s.min_c, g.point(s.min_c_at), s.c_evaluated, s.c_excluded, s.points};
    else
        out.c_error = "every grid point has a degenerate c denominator";
    if (s.k_evaluated)
        out.kappa = Estimate{s.max_k, g.point(s.max_k_at), s.k_evaluated, s.k_excluded, s.points};
    else
        out.kappa_error = "a is below eta_den at every grid point";
    return out;
}

// ---------------------------------------------------------------------------
// Glaeser

struct GlaeserResult {
    bool pass = false;
    /// max of f'(s)^2 / (2 M f(s)) over the core grid, M = sup |f''| on the enlarged interval.
    double worst_ratio = 0.0;
    double worst_point = 0.0;
    double sup_second_derivative = 0.0;
};

inline GlaeserResult glaeser_check(const RationalPoly& f, double lo, double hi, double margin, int samples = 2001)
{
    if (!(hi >= lo) || margin < 0 || samples < 2) throw InvariantViolation("glaeser", "bad interval");
    const UniPoly<double> fd = convert_poly<double>(f), f1 = convert_poly<double>(f.derivative()),
                          f2 = convert_poly<double>(f.derivative().derivative());
    const double elo = lo - margin, ehi = hi + margin;
    const int dense = 4 * samples;
    double fmax = 0, m = 0, fmin = detail::kInf, fmin_at = elo;
    for (int k = 0; k <= dense; ++k) {
        double s = elo + (ehi - elo) * k / dense;
        double v = fd(s);
        fmax = std::max(fmax, std::abs(v));
        if (v < fmin) {
            fmin = v;
            fmin_at = s;
        }
        m = std::max(m, std::abs(f2(s)));
    }
    if (fmin < -1e-12 * std::max(1.0, fmax))
        throw NegativeInput("f(" + std::to_string(fmin_at) + ") = " + std::to_string(fmin) + " < 0 on the enlarged interval");

    GlaeserResult r;
    r.sup_second_derivative = m;
    r.worst_point = lo;
    for (int k = 0; k < samples; ++k) {
        double s = lo + (hi - lo) * k / (samples - 1);
        double num = f1(s) * f1(s), den = 2 * m * std::max(fd(s), 0.0);
        double ratio = num == 0 ? 0.0 : (den == 0 ? detail::kInf : num / den);
        if (ratio > r.worst_ratio) {
            r.worst_ratio = ratio;
            r.worst_point = s;
        }
    }
    r.pass = r.worst_ratio <= 1 + 1e-9;
    return r;
}

// ---------------------------------------------------------------------------
// Minimization of Q(w, theta)

struct MinimizeResult {
    double m = 0.0;
    std::vector<double> w_bar;
    double hessian_cond = 1.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

/// Safeguarded Newton: regularized steps, Armijo backtracking, Q never increases.
inline MinimizeResult minimize_Q(const ExtendedQ& q, std::span<const double> theta, std::optional<std::vector<double>> start = std::nullopt)
{
    if (static_cast<int>(theta.size()) != q.theta_dim()) throw DimensionMismatch("theta has wrong length");
    MinimizeResult r;
    const int n = q.w_dim();
    if (n == 0) {
        r.m = q(std::vector<double>{}, theta);
        return r;
    }
    std::vector<double> w = start ? *start : q.constant_minimizer();
    if (static_cast<int>(w.size()) != n) throw DimensionMismatch("start point has wrong length");

    auto tol = [](double m) { return 1e-10 * (1 + std::abs(m)); };
    Jet2 j = q.jet_in_w(w, theta);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        r.iterations = it;
        if (j.g.norm() <= tol(j.v)) {
            converged = true;
            break;
        }
        Eigen::MatrixXd h = j.h;
        double mu = 0, hnorm = std::max(1.0, h.norm());
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        while (llt.info() != Eigen::Success) {
            mu = mu == 0 ? 1e-10 * hnorm : mu * 10;
            if (mu > 1e10 * hnorm) throw HessianDegenerate("cannot regularize the Hessian of Q");
            llt.compute(h + mu * Eigen::MatrixXd::Identity(n, n));
        }
        Eigen::VectorXd step = -llt.solve(j.g);
        const double slope = j.g.dot(step);
        bool accepted = false;
        for (double alpha = 1; alpha > 1e-12; alpha /= 2) {
            std::vector<double> trial(w);
            for (int i = 0; i < n; ++i) trial[i] += alpha * step(i);
            Jet2 jt = q.jet_in_w(trial, theta);
            const bool armijo = jt.v <= j.v + 1e-4 * alpha * slope;
            // Near the minimum Q stalls at rounding level; accept if the gradient still shrinks.
            const bool flat = jt.v <= j.v + 8 * std::numeric_limits<double>::epsilon() * (1 + std::abs(j.v)) && jt.g.norm() < j.g.norm();
            if (armijo || flat) {
                w = std::move(trial);
                j = std::move(jt);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (!converged && j.g.norm() <= tol(j.v)) converged = true;
    if (!converged) throw NoConvergence("minimize_Q: gradient norm " + std::to_string(j.g.norm()) + " after " + std::to_string(r.iterations) + " iterations");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j.h);
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 1e-12 * std::max(1.0, std::abs(lmax)))) throw HessianDegenerate("Hessian of Q is singular or indefinite at the minimizer");
    r.m = j.v;
    r.w_bar = std::move(w);
    r.hessian_cond = lmax / lmin;
    r.grad_norm = j.g.norm();
    return r;
}

/// d/dtheta Q(w, theta) at fixed w; at w = w_bar(theta) this is the gradient of m(theta).
inline std::vector<double> envelope_gradient(const ExtendedQ& q, std::span<const double> theta, std::span<const double> w)
{
    const int n = q.theta_dim();
    std::vector<Jet2> jt, jw;
    for (int i = 0; i < n; ++i) jt.push_back(Jet2::variable(theta[i], i, n));
    for (double v : w) jw.emplace_back(v, n);
    Jet2 j = q.evaluate<Jet2>(std::span<const Jet2>(jw), std::span<const Jet2>(jt));
    return std::vector<double>(j.g.data(), j.g.data() + n);
}

/// Minimizes along a set of theta values ordered by |theta|, warm-starting each
/// solve from the previous minimizer. Results are returned in input order.
inline std::vector<MinimizeResult> minimize_Q_path(const ExtendedQ& q, const std::vector<std::vector<double>>& thetas)
{
    std::vector<std::size_t> order(thetas.size());
    std::iota(order.begin(), order.end(), 0);
    auto norm = [](const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norm(thetas[a]) < norm(thetas[b]); });
    std::vector<MinimizeResult> out(thetas.size());
    std::optional<std::vector<double>> warm;
    for (std::size_t i : order) {
        out[i] = minimize_Q(q, thetas[i], warm);
        if (q.w_dim() > 0) warm = out[i].w_bar;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural chain

struct StructuralCheck {
    std::string name;
    bool pass = false;
    /// Best constant measured by the check (meaning depends on the check).
    double measured = 0.0;
    /// Smallest slack of the inequality over the samples.
    double worst_margin = 0.0;
    std::uint64_t samples = 0;
    std::string grid;
    std::string note;
};

struct StructuralOptions {
    /// Points per axis on the structural grids.
    int count = 7;
    /// Cutoff scale for Q(w, theta).
    double delta = 0.5;
};

namespace detail {

/// theta-grid: t outermost, then z, then x_p (Form2). Keeps the size under ~2e5.
struct ThetaGrid {
    int t_count = 0;
    std::size_t rest = 0;
    std::vector<std::vector<double>> thetas; // eps filled in by the caller
    std::string label;
};

inline ThetaGrid make_theta_grid(const ExtendedQ& q, const Region& region, int count)
{
    const int rest_axes = q.theta_dim() - 2; // z and x_p; t and eps excluded
    int n = std::max(3, count);
    while (n > 3 && std::pow(double(n), rest_axes + 1) > 2e5) n -= 2;
    ThetaGrid g;
    g.t_count = n;
    const int zx = q.d() - q.p();
    std::vector<std::vector<double>> axes;
    for (int k = 0; k < zx; ++k) axes.push_back(PhaseGrid::axis(-region.x_half, region.x_half, n));
    for (int k = 0; k < zx; ++k) axes.push_back(PhaseGrid::axis(-region.xi_half, region.xi_half, n));
    if (!q.is_form1()) axes.push_back(PhaseGrid::axis(-region.x_half, region.x_half, n));
    g.rest = 1;
    for (const auto& a : axes) g.rest *= a.size();
    const auto ts = PhaseGrid::axis(0.0, region.t_max, n);
    for (double t : ts) {
        std::vector<int> idx(axes.size(), 0);
        for (std::size_t r = 0; r < g.rest; ++r) {
            std::vector<double> th{t};
            for (std::size_t k = 0; k < axes.size(); ++k) th.push_back(axes[k][idx[k]]);
            th.push_back(0.0);
            g.thetas.push_back(std::move(th));
            for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
                if (++idx[k] < static_cast<int>(axes[k].size())) break;
                idx[k] = 0;
            }
        }
    }
    g.label = std::to_string(n) + " points per theta axis (t, z" + std::string(q.is_form1() ? "" : ", x_p") + "), delta = " + std::to_string(q.cutoff().delta);
    return g;
}

/// Exact restriction s -> a(t, x, xi - s grad phi(x)) along the H_phi flow (phi free of xi and t).
inline RationalPoly flow_restriction(const PolySymbol& a, const PolySymbol& phi, const std::vector<double>& pt)
{
    const Layout lay = a.layout();
    std::vector<Rational> rp(pt.begin(), pt.end());
    std::vector<RationalPoly> vals;
    for (int i = 0; i < lay.nvars(); ++i) vals.push_back(RationalPoly::constant(rp[i]));
    for (int j = 1; j <= lay.d; ++j) {
        Rational g = phi.derivative(lay.x(j)).evaluate(std::span<const Rational>(rp));
        vals[lay.xi(j)] = vals[lay.xi(j)] - RationalPoly::monomial(1, g);
    }
    return a.evaluate_with<RationalPoly>(std::span<const RationalPoly>(vals), [](const Rational& c) { return RationalPoly::constant(c); });
}

} // namespace detail

/// Samples the inequality chain that leads from the normal form to the lower bound:
///   reconstruction_bound   a/N >= m1 (t - phi)^2 + R at reconstructed points
///   t_phi_lower            m1(0, .) phi^2 + R >= 0
///   branch_c1              inf a / (t^2 |xi|^2) on {phi < 0}
///   branch_c_prime         inf a / ((t - phi)^2 |xi|^2) on {phi >= 0}
///   lipschitz_m1           sup |m1(t, .) - m1(0, .)| / t
///   glaeser                {phi, a}^2 <= 2 sup|H_phi^2 a| a along the H_phi flow
/// Here N = q_{p+1}, R = psi, phi = phi_p (Form1) and N = r_p, R = g, phi = x_p (Form2).
inline std::vector<StructuralCheck> check_structural(const NormalFormSpec& spec, const TimeFunctionCert& cert, const Region& region,
                                                     const StructuralOptions& opt = {})
{
    region.validate();
    const PolySymbol a = build_normal_form(spec);
    const ExtendedQ q = build_extended_Q(spec, build_cutoff(opt.delta));
    const bool f1 = q.is_form1();
    const Layout lay{spec.d};
    const CompiledPoly ca(a);
    std::vector<double> scratch(ca.scratch_size() + 1);

    // m1 on the theta grid via continuation.
    detail::ThetaGrid tg = detail::make_theta_grid(q, region, opt.count);
    const CompiledPoly cphi(spec.phi.dim() == spec.d ? spec.phi : PolySymbol(spec.d));
    std::vector<double> sphi(cphi.scratch_size() + 1);
    std::vector<double> branch_value(tg.thetas.size());
    for (std::size_t i = 0; i < tg.thetas.size(); ++i) {
        auto& th = tg.thetas[i];
        double b;
        if (f1) {
            auto base = q.reconstruct(std::vector<double>(q.w_dim(), 0.0), th);
            b = cphi(base.data(), sphi.data());
        } else {
            b = th[q.theta_dim() - 2];
        }
        branch_value[i] = b;
        th.back() = th[0] - b;
    }
    const auto mins = minimize_Q_path(q, tg.thetas);

    StructuralCheck recon{"reconstruction_bound", true, 0.0, detail::kInf, 0, tg.label, "margin of a/N - (m1 eps^2 + R)"};
    StructuralCheck tphi{"t_phi_lower", true, 0.0, detail::kInf, 0, tg.label, "margin of m1(0,.) phi^2 + R at t = 0"};
    StructuralCheck lip{"lipschitz_m1", true, 0.0, 0.0, 0, tg.label, "measured C in |m1(t,.) - m1(0,.)| <= C t"};
    double m1_min = detail::kInf;
    for (std::size_t i = 0; i < tg.thetas.size(); ++i) {
        const auto& th = tg.thetas[i];
        const double eps = th.back(), m1 = mins[i].m, rem = q.remainder(th);
        m1_min = std::min(m1_min, m1);
        // Probes: the minimizer and unit offsets along each w axis.
        std::vector<std::vector<double>> probes{mins[i].w_bar};
        for (int k = 0; k < q.w_dim(); ++k)
            for (double sgn : {-0.5, 0.5}) {
                auto w = mins[i].w_bar;
                w[k] += sgn;
                probes.push_back(std::move(w));
            }
        for (const auto& w : probes) {
            auto pt = q.reconstruct(w, th);
            const double lhs = ca(pt.data(), scratch.data()) / q.normalizer(pt);
            const double margin = lhs - (m1 * eps * eps + rem);
            recon.worst_margin = std::min(recon.worst_margin, margin);
            recon.pass = recon.pass && margin >= -1e-9 * std::max(1.0, std::abs(lhs));
            ++recon.samples;
        }
        const std::size_t kt = i / tg.rest, r = i % tg.rest;
        if (kt == 0) {
            const double margin = m1 * eps * eps + rem;
            tphi.worst_margin = std::min(tphi.worst_margin, margin);
            tphi.pass = tphi.pass && margin >= -1e-12;
            ++tphi.samples;
        } else {
            const double c = std::abs(m1 - mins[r].m) / th[0];
            lip.measured = std::max(lip.measured, c);
            ++lip.samples;
        }
    }
    recon.measured = m1_min;

    // Branch constants on a coarse phase grid with t > 0.
    Region coarse = region;
    coarse.t_count = coarse.x_count = coarse.xi_count = std::max(3, opt.count);
    while (coarse.x_count > 3 && coarse.points(spec.d) > 2e6) coarse.x_count = coarse.xi_count = coarse.x_count - 2;
    const PhaseGrid pg = PhaseGrid::make(spec.d, coarse);
    const PolySymbol branch_poly = f1 ? spec.phi : PolySymbol::x(spec.d, spec.p);
    const GridPoly ga(a, pg), gb(branch_poly, pg);
    const std::string coarse_label = std::to_string(coarse.t_count) + " t x " + std::to_string(coarse.x_count) + " x x " +
                                     std::to_string(coarse.xi_count) + " xi points per axis, t > 0";
    StructuralCheck c1{"branch_c1", true, detail::kInf, detail::kInf, 0, coarse_label, f1 ? "on {phi < 0}" : "on {x_p < 0}"};
    StructuralCheck cp{"branch_c_prime", true, detail::kInf, detail::kInf, 0, coarse_label, f1 ? "on {phi >= 0}" : "on {x_p >= 0}"};
    std::vector<int> idx;
    pg.decode(0, idx);
    for (std::uint64_t flat = 0; flat < pg.size(); ++flat, pg.advance(idx)) {
        const double t = pg.values[0][idx[0]];
        if (t <= 0) continue;
        double xi2 = 0;
        for (int j = 1; j <= spec.d; ++j) xi2 += std::pow(pg.values[lay.xi(j)][idx[lay.xi(j)]], 2);
        const double av = ga(idx), b = gb(idx);
        if (b < 0) {
            c1.measured = std::min(c1.measured, av / (t * t * xi2));
            ++c1.samples;
        } else {
            const double den = (t - b) * (t - b) * xi2;
            if (den < region.eta()) continue;
            cp.measured = std::min(cp.measured, av / den);
            ++cp.samples;
        }
    }
    for (auto* c : {&c1, &cp}) {
        if (c->samples == 0) {
            c->measured = 0;
            c->note += ", empty branch";
        }
        c->pass = c->samples == 0 || c->measured > 0;
        c->worst_margin = c->measured;
    }

    // Glaeser along the H_phi flow.
    StructuralCheck gl{"glaeser", true, 0.0, 0.0, 0, "", "worst f'^2 / (2 M f) along s -> a(t, x, xi - s grad phi)"};
    const PolySymbol& phi = cert.phi;
    bool xi_free = !phi.depends_on(0);
    for (int j = 1; j <= spec.d; ++j) xi_free = xi_free && !phi.depends_on(lay.xi(j));
    if (!xi_free) {
        gl.note = "skipped: phi depends on t or xi";
    } else {
        Region g5 = region;
        g5.t_count = g5.x_count = g5.xi_count = 3;
        const PhaseGrid gg = PhaseGrid::make(spec.d, g5);
        const double h = region.xi_half / 2;
        gl.grid = "3 points per axis, s in [-" + std::to_string(h) + ", " + std::to_string(h) + "], margin " + std::to_string(h);
        std::vector<int> gi;
        gg.decode(0, gi);
        for (std::uint64_t flat = 0; flat < gg.size(); ++flat, gg.advance(gi)) {
            auto pt = gg.point(gi);
            try {
                auto res = glaeser_check(detail::flow_restriction(a, phi, pt), -h, h, h, 201);
                gl.measured = std::max(gl.measured, res.worst_ratio);
                gl.pass = gl.pass && res.pass;
            } catch (const NegativeInput& e) {
                gl.pass = false;
                gl.note = std::string("negative along the flow: ") + e.what();
            }
            ++gl.samples;
        }
        gl.worst_margin = 1 - gl.measured;
    }

    return {recon, tphi, c1, cp, lip, gl};
}

// ---------------------------------------------------------------------------
// Report

struct CertificateReport {
    GridCertificate grid;
    std::vector<StructuralCheck> structural;
    std::vector<std::string> marginal_flags;

    bool structural_ok() const
    {
        return std::all_of(structural.begin(), structural.end(), [](const StructuralCheck& c) { return c.pass; });
    }
};

/// Grid certificate plus the structural chain. Flags estimates that sit on a decision boundary.
inline CertificateReport build_certificate(const NormalFormSpec& spec, const TimeFunctionCert& cert, const Region& region,
                                           const StructuralOptions& opt = {})
{
    CertificateReport out;
    const PolySymbol a = build_normal_form(spec);
    out.grid = certify_grid(a, cert.phi, region);
    out.structural = check_structural(spec, cert, region, opt);

    const auto& nn = out.grid.nonneg;
    if (nn.min_value < 0 && nn.pass) out.marginal_flags.push_back("nonnegativity holds only within the rounding tolerance");
    if (out.grid.kappa && std::abs(out.grid.kappa->value - 1) <= 1e-6) out.marginal_flags.push_back("kappa_est within 1e-6 of 1");
    if (out.grid.c && out.grid.c->value > 0 && out.grid.c->value <= 1e-9) out.marginal_flags.push_back("c_est within 1e-9 of 0");
    return out;
}

} // namespace hypcert
