#pragma once

// Hamilton maps of quadratic forms and their spectra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypcert/rational_matrix.hpp"
#include "hypcert/symbolic_core.hpp"
#include "hypcert/univariate.hpp"

namespace hypcert {

using Complex = std::complex<double>;

/// F = (1/2) [[p_{zeta y}, p_{zeta zeta}], [-p_{y y}, -p_{y zeta}]], with t and tau
/// counted among the positions and dual variables respectively.
struct HamiltonMap {
    RationalMatrix exact;
    Eigen::MatrixXd matrix;

    int size() const { return exact.rows(); }
    double norm() const { return matrix.norm(); }
};

inline HamiltonMap hamilton_map(const QuadraticJet& jet)
{
    if (!jet.form.is_symmetric()) throw InvariantViolation("QuadraticJet.form", "matrix is not symmetric");
    const int n = jet.size();
    const int h = n / 2;
    // M = Hess/2, so the halving in F is already absorbed.
    const RationalMatrix& m = jet.form;
    RationalMatrix f(n, n);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < h; ++j) {
            f(i, j) = m(h + i, j);
            f(i, h + j) = m(h + i, h + j);
            f(h + i, j) = -m(i, j);
            f(h + i, h + j) = -m(i, h + j);
        }
    }
    return HamiltonMap{f, f.to_eigen()};
}

/// Characteristic polynomial det(lambda I - A), exact, via similarity reduction to
/// upper Hessenberg form over Q followed by the Hessenberg recurrence.
inline RationalPoly characteristic_polynomial(RationalMatrix h)
{
    const int n = h.rows();
    for (int c = 0; c + 2 < n; ++c) {
        int piv = -1;
        for (int i = c + 1; i < n; ++i)
            if (h(i, c) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != c + 1) {
            for (int j = 0; j < n; ++j) std::swap(h(piv, j), h(c + 1, j));
            for (int i = 0; i < n; ++i) std::swap(h(i, piv), h(i, c + 1));
        }
        for (int r = c + 2; r < n; ++r) {
            if (h(r, c) == 0) continue;
            Rational u = h(r, c) / h(c + 1, c);
            for (int j = 0; j < n; ++j) h(r, j) -= u * h(c + 1, j);
            for (int i = 0; i < n; ++i) h(i, c + 1) += u * h(i, r);
        }
    }
    // p_0 = 1, p_m = (x - h_mm) p_{m-1} - sum_{i<m} h_{i,m} (prod_{j=i+1..m} h_{j,j-1}) p_{i-1}
    std::vector<RationalPoly> p;
    p.push_back(RationalPoly::constant(1));
    const RationalPoly x = RationalPoly::monomial(1);
    for (int m = 0; m < n; ++m) {
        RationalPoly next = (x - RationalPoly::constant(h(m, m))) * p[m];
        Rational prod = 1;
        for (int i = m - 1; i >= 0; --i) {
            prod *= h(i + 1, i);
            if (prod == 0) break;
            if (h(i, m) != 0) next = next - (prod * h(i, m)) * p[i];
        }
        p.push_back(std::move(next));
    }
    return p.back();
}

enum class SpectrumClass { RealPairPresent, PureImaginaryOnly, ZeroOnly };

inline const char* to_string(SpectrumClass c)
{
    switch (c) {
    case SpectrumClass::RealPairPresent: return "real-pair-present";
    case SpectrumClass::PureImaginaryOnly: return "pure-imaginary-only";
    case SpectrumClass::ZeroOnly: return "zero-only";
    }
    return "?";
}

struct Spectrum {
    std::vector<Complex> eigenvalues; // repeated per multiplicity, sorted
    SpectrumClass classification = SpectrumClass::ZeroOnly;
    double tol = 0.0;
    bool marginal = false;
    double max_residual = 0.0; // max over eigenvalues of sigma_min(F - lambda I)
    RationalPoly characteristic;

    bool is_real_nonzero(const Complex& z) const { return std::abs(z.imag()) <= tol && std::abs(z.real()) > tol; }
};

inline double default_tolerance(const HamiltonMap& f) { return 1e-9 * (1.0 + f.norm()); }

namespace detail {

    using LComplex = std::complex<long double>;

    /// Roots of a square-free monic rational polynomial: companion eigenvalues polished by Newton.
    inline std::vector<LComplex> simple_roots(const RationalPoly& f)
    {
        const int m = f.degree();
        std::vector<LComplex> roots;
        if (m < 1) return roots;
        if (m == 1) {
            roots.emplace_back(static_cast<long double>((-f[0] / f[1]).convert_to<long double>()), 0.0L);
            return roots;
        }
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
        for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < m; ++i) comp(i, m - 1) = -to_double(f[i] / f[m]);
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
        if (es.info() != Eigen::Success) throw NoConvergence("companion eigenvalue iteration failed");

        const UniPoly<long double> fl = convert_poly<long double>(f);
        const UniPoly<long double> dl = fl.derivative();
        for (int k = 0; k < m; ++k) {
            LComplex z(es.eigenvalues()[k].real(), es.eigenvalues()[k].imag());
            for (int it = 0; it < 100; ++it) {
                LComplex fz = fl(z);
                LComplex dz = dl(z);
                if (dz == LComplex(0)) break;
                LComplex step = fz / dz;
                z -= step;
                if (std::abs(step) <= 1e-19L * std::max(1.0L, std::abs(z))) break;
            }
            roots.push_back(z);
        }
        // Real coefficients: snap numerically real roots onto the axis and re-polish.
        for (auto& z : roots) {
            if (std::abs(z.imag()) <= 1e-14L * std::max(1.0L, std::abs(z))) {
                long double r = z.real();
                for (int it = 0; it < 50; ++it) {
                    long double d = dl(r);
                    if (d == 0) break;
                    long double step = fl(r) / d;
                    r -= step;
                    if (std::abs(step) <= 1e-19L * std::max(1.0L, std::abs(r))) break;
                }
                z = LComplex(r, 0);
            }
        }
        return roots;
    }

    inline double min_singular_value(const Eigen::MatrixXd& f, Complex lambda)
    {
        const int n = static_cast<int>(f.rows());
        Eigen::MatrixXcd a = f.cast<Complex>();
        for (int i = 0; i < n; ++i) a(i, i) -= lambda;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
        return svd.singularValues()(n - 1);
    }

} // namespace detail

/// All eigenvalues of F with multiplicities.
///
/// Works from the exact characteristic polynomial: the zero root is split off
/// exactly, evenness (Hamiltonian symmetry) is used to pass to mu = lambda^2, and
/// each square-free factor is solved numerically. Every returned eigenvalue is
/// checked to satisfy min ||(F - lambda) v|| <= tol ||F|| for a unit v.
inline Spectrum spectrum(const HamiltonMap& f, double tol)
{
    if (tol <= 0) throw NonPositiveInput("spectrum tolerance must be positive");
    if (f.size() > 64) throw DimensionMismatch("Hamilton map larger than 64x64");
    Spectrum s;
    s.tol = tol;
    s.characteristic = characteristic_polynomial(f.exact);
    const RationalPoly& cp = s.characteristic;
    const int n = cp.degree();

    int zero_mult = 0;
    while (zero_mult < n && cp[zero_mult] == 0) ++zero_mult;
    std::vector<Rational> rest(cp.coeffs().begin() + zero_mult, cp.coeffs().end());
    RationalPoly reduced(rest);

    bool even = true;
    for (int k = 1; k <= reduced.degree(); k += 2)
        if (reduced[k] != 0) even = false;

    RationalPoly target = reduced;
    if (even) {
        std::vector<Rational> mu;
        for (int k = 0; k <= reduced.degree(); k += 2) mu.push_back(reduced[k]);
        target = RationalPoly(mu);
    }

    std::vector<Complex> eig(zero_mult, Complex(0, 0));
    for (const auto& [factor, mult] : square_free_factors(target)) {
        for (const auto& root : detail::simple_roots(factor)) {
            if (even) {
                detail::LComplex l = std::sqrt(root);
                for (int k = 0; k < mult; ++k) {
                    eig.emplace_back(static_cast<double>(l.real()), static_cast<double>(l.imag()));
                    eig.emplace_back(static_cast<double>(-l.real()), static_cast<double>(-l.imag()));
                }
            } else {
                for (int k = 0; k < mult; ++k) eig.emplace_back(static_cast<double>(root.real()), static_cast<double>(root.imag()));
            }
        }
    }
    if (static_cast<int>(eig.size()) != n) throw NoConvergence("root count does not match matrix size");

    // Clean signed zeros so output is reproducible, then order deterministically.
    for (auto& z : eig) {
        if (z.real() == 0) z.real(0.0);
        if (z.imag() == 0) z.imag(0.0);
    }
    std::sort(eig.begin(), eig.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });

    const double fnorm = f.norm();
    for (std::size_t i = 0; i < eig.size(); ++i) {
        if (i > 0 && eig[i] == eig[i - 1]) continue;
        double r = detail::min_singular_value(f.matrix, eig[i]);
        s.max_residual = std::max(s.max_residual, r);
        if (r > tol * std::max(fnorm, 1.0))
            throw NoConvergence("eigenpair residual " + std::to_string(r) + " exceeds tolerance");
    }

    bool real_pair = false, nonzero = false;
    for (const auto& z : eig) {
        const double re = std::abs(z.real()), im = std::abs(z.imag());
        if (s.is_real_nonzero(z)) real_pair = true;
        if (std::abs(z) > tol) nonzero = true;
        if ((re > tol && re <= 10 * tol) || (re > tol && im > tol && im <= 10 * tol)) s.marginal = true;
    }
    s.classification = real_pair ? SpectrumClass::RealPairPresent : nonzero ? SpectrumClass::PureImaginaryOnly : SpectrumClass::ZeroOnly;
    s.eigenvalues = std::move(eig);
    return s;
}

inline Spectrum spectrum(const HamiltonMap& f) { return spectrum(f, default_tolerance(f)); }

struct Classification {
    bool effective = false;
    std::optional<Complex> witness; // the positive real eigenvalue of largest size
    Spectrum spectrum;
    QuadraticJet jet;
    bool marginal() const { return spectrum.marginal; }
};

/// Effective hyperbolicity of p at a double characteristic: F_p has a real nonzero eigenvalue.
inline Classification classify_effective_hyperbolicity(const PolySymbol& p, const PhasePoint& at, std::optional<double> tol = {})
{
    Classification c;
    c.jet = quadratic_jet(p, at);
    HamiltonMap f = hamilton_map(c.jet);
    c.spectrum = spectrum(f, tol ? *tol : default_tolerance(f));
    for (const auto& z : c.spectrum.eigenvalues) {
        if (c.spectrum.is_real_nonzero(z) && z.real() > 0 && (!c.witness || z.real() > c.witness->real())) c.witness = z;
    }
    c.effective = c.witness.has_value();
    return c;
}

/// p = -tau^2 + a for a symbol a(t, x, xi).
inline PolySymbol principal_symbol(const PolySymbol& a) { return a - PolySymbol::tau(a.dim()).pow(2); }

// ---------------------------------------------------------------------------
// Block factorisation of det(lambda + F)

struct BlockFactorization {
    RationalPoly lhs_exact;
    RationalPoly rhs_exact;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double max_coeff_dev = 0.0;
};

/// Restricts a jet to an index set closed under t<->tau, x_j<->xi_j.
inline RationalMatrix restrict_form(const QuadraticJet& jet, const std::vector<int>& idx)
{
    RationalMatrix r(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) r(i, j) = jet.form(idx[i], idx[j]);
    return r;
}

namespace detail {
    /// Hamilton map of a form restricted to the canonical pairs listed in positions
    /// (position indices only; the dual partners are implied).
    inline RationalMatrix hamilton_on_pairs(const QuadraticJet& jet, const std::vector<int>& positions)
    {
        const Layout lay{jet.d};
        std::vector<int> idx = positions;
        for (int p : positions) idx.push_back(lay.partner(p));
        QuadraticJet sub;
        sub.d = static_cast<int>(positions.size()) - 1;
        sub.form = restrict_form(jet, idx);
        return hamilton_map(sub).exact;
    }
}

/// Compares det(lambda + F) with det(lambda + F_{Q_A}) det(lambda + F_{Q_B}).
/// The partition must consist of whole canonical pairs and carry no A-B cross terms.
inline BlockFactorization block_char_factorization(const QuadraticJet& jet)
{
    const Layout lay{jet.d};
    const int n = jet.size();
    std::vector<bool> in_a(n, false);
    for (int i : jet.block_a) {
        if (i < 0 || i >= n) throw DimensionMismatch("partition index out of range");
        in_a[i] = true;
    }
    for (int i = 0; i < n; ++i)
        if (in_a[i] != in_a[lay.partner(i)])
            throw InvariantViolation("QuadraticJet.block_a", lay.name(i) + " and " + lay.name(lay.partner(i)) + " are split across blocks");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (in_a[i] && !in_a[j] && jet.form(i, j) != 0)
                throw CrossTermsPresent("coupling " + lay.name(i) + "*" + lay.name(j) + " between blocks");

    std::vector<int> pos_a, pos_b;
    for (int i = 0; i < lay.half(); ++i) (in_a[i] ? pos_a : pos_b).push_back(i);

    auto det_plus = [](const RationalMatrix& m) { return Rational(m.rows() % 2 ? -1 : 1) * characteristic_polynomial(m).reflect(); };

    BlockFactorization bf;
    bf.lhs_exact = det_plus(hamilton_map(jet).exact);
    RationalPoly fa = pos_a.empty() ? RationalPoly::constant(1) : det_plus(detail::hamilton_on_pairs(jet, pos_a));
    RationalPoly fb = pos_b.empty() ? RationalPoly::constant(1) : det_plus(detail::hamilton_on_pairs(jet, pos_b));
    bf.rhs_exact = fa * fb;
    const int deg = std::max(bf.lhs_exact.degree(), bf.rhs_exact.degree());
    for (int k = 0; k <= deg; ++k) {
        bf.lhs.push_back(to_double(bf.lhs_exact[k]));
        bf.rhs.push_back(to_double(bf.rhs_exact[k]));
        bf.max_coeff_dev = std::max(bf.max_coeff_dev, std::abs(bf.lhs.back() - bf.rhs.back()));
    }
    return bf;
}

// ---------------------------------------------------------------------------
// The psi(0) criterion for the chain model -tau^2 + sum qbar_i (x_{i-1}-x_i)^2 + sum rbar_i xi_i^2

/// psi(0) = -(prod 4 qbar_j)(prod rbar_j)(sum 1/rbar_j - 1).
inline Rational psi_zero(const std::vector<Rational>& qbar, const std::vector<Rational>& rbar)
{
    if (qbar.size() != rbar.size() || qbar.empty()) throw DimensionMismatch("qbar and rbar must have the same positive length");
    Rational prod_q = 1, prod_r = 1, inv_sum = 0;
    for (std::size_t j = 0; j < qbar.size(); ++j) {
        if (qbar[j] <= 0 || rbar[j] <= 0) throw NonPositiveInput("qbar and rbar entries must be positive");
        prod_q *= 4 * qbar[j];
        prod_r *= rbar[j];
        inv_sum += 1 / rbar[j];
    }
    return -prod_q * prod_r * (inv_sum - 1);
}

/// The model jet -tau^2 + sum_i qbar_i (x_{i-1} - x_i)^2 + sum_i rbar_i xi_i^2, x_0 = t, in d = p.
inline QuadraticJet chain_model_jet(const std::vector<Rational>& qbar, const std::vector<Rational>& rbar)
{
    const int p = static_cast<int>(qbar.size());
    PolySymbol q = -PolySymbol::tau(p).pow(2);
    for (int i = 1; i <= p; ++i) {
        PolySymbol prev = i == 1 ? PolySymbol::t(p) : PolySymbol::x(p, i - 1);
        q += (prev - PolySymbol::x(p, i)).pow(2) * qbar[i - 1];
        q += PolySymbol::xi(p, i).pow(2) * rbar[i - 1];
    }
    return QuadraticJet::from_quadratic(q);
}

/// The constant term of det(lambda + F)/lambda^2 for the chain model, computed exactly.
/// Its normalisation differs from psi_zero(); only the sign is comparable.
inline Rational reduced_psi_zero(const std::vector<Rational>& qbar, const std::vector<Rational>& rbar)
{
    QuadraticJet jet = chain_model_jet(qbar, rbar);
    RationalPoly cp = characteristic_polynomial(hamilton_map(jet).exact);
    return cp[2];
}

struct PsiSignCheck {
    int sign_psi = 0;
    bool has_real_eig = false;
    bool agree = false;
    Spectrum spectrum;
};

inline PsiSignCheck psi_zero_sign_equivalence(const std::vector<Rational>& qbar, const std::vector<Rational>& rbar, double tol)
{
    if (qbar.size() > 8) throw DimensionMismatch("chain length above 8");
    PsiSignCheck r;
    r.sign_psi = sign(psi_zero(qbar, rbar));
    r.spectrum = spectrum(hamilton_map(chain_model_jet(qbar, rbar)), tol);
    for (const auto& z : r.spectrum.eigenvalues)
        if (r.spectrum.is_real_nonzero(z)) r.has_real_eig = true;
    r.agree = (r.sign_psi < 0) == r.has_real_eig;
    return r;
}

} // namespace hypcert
