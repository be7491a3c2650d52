#pragma once

// Time functions f = t - phi for the two normal-form branches and the exact
// weights that fix the bracket constant kappa.

#include <string>
#include <vector>

#include "hypcert/error.hpp"
#include "hypcert/normal_forms.hpp"
#include "hypcert/poly_symbol.hpp"
#include "hypcert/rational.hpp"
#include "hypcert/symbolic_core.hpp"

namespace hypcert {

enum class TimeBranch { Form1Lift, Form2Weights };

inline std::string to_string(TimeBranch b) { return b == TimeBranch::Form1Lift ? "Form1Lift" : "Form2Weights"; }

struct EpsilonWeights {
    std::vector<Rational> eps;
    /// sum eps_i^2 rbar_i
    Rational rho_weight;
    Rational kappa;
};

/// Weights eps_i = (1/rbar_i) / sum_j (1/rbar_j): the minimizer of sum eps_i^2 rbar_i
/// subject to sum eps_i = 1, whose minimum is 1 / sum_j (1/rbar_j).
inline EpsilonWeights epsilon_weights(const std::vector<Rational>& rbar, const Rational& slack)
{
    if (rbar.empty()) throw DimensionMismatch("epsilon_weights needs at least one rbar");
    if (slack <= 0) throw NonPositiveInput("slack must be positive");
    Rational inv_sum = 0;
    for (const auto& r : rbar) {
        if (r <= 0) throw NonPositiveInput("rbar entries must be positive");
        inv_sum += 1 / r;
    }
    if (inv_sum <= 1) throw BbisViolated("sum of 1/rbar_i = " + format_rational(inv_sum) + " <= 1");

    EpsilonWeights w;
    for (const auto& r : rbar) w.eps.push_back((1 / r) / inv_sum);
    w.rho_weight = 0;
    for (std::size_t i = 0; i < rbar.size(); ++i) w.rho_weight += w.eps[i] * w.eps[i] * rbar[i];
    if (w.rho_weight != 1 / inv_sum) throw InvariantViolation("rho_weight", "closed form disagrees with the weighted sum");
    w.kappa = w.rho_weight + slack / 2;
    if (w.kappa >= 1) throw SlackTooLarge("kappa = " + format_rational(w.kappa) + " >= 1");
    return w;
}

/// alpha_j = sum_{i >= j} eps_i, so that t - sum eps_i x_i = sum alpha_j (x_{j-1} - x_j), x_0 = t.
inline std::vector<Rational> alpha_coefficients(const std::vector<Rational>& eps)
{
    Rational total = 0;
    for (const auto& e : eps) total += e;
    if (total != 1 || eps.empty()) throw WeightsNotNormalized("weights sum to " + format_rational(total));

    const int p = static_cast<int>(eps.size());
    std::vector<Rational> alpha(p);
    Rational tail = 0;
    for (int j = p - 1; j >= 0; --j) {
        tail += eps[j];
        alpha[j] = tail;
    }

    // Exact telescoping identity in p position variables.
    auto xk = [&](int k) { return k == 0 ? PolySymbol::t(p) : PolySymbol::x(p, k); };
    PolySymbol lhs = PolySymbol::t(p), rhs(p);
    for (int i = 1; i <= p; ++i) {
        lhs -= xk(i) * eps[i - 1];
        rhs += (xk(i - 1) - xk(i)) * alpha[i - 1];
    }
    if (!(lhs == rhs)) throw InvariantViolation("alpha", "telescoping identity failed");
    return alpha;
}

struct TimeFunctionCert {
    PolySymbol phi;
    TimeBranch branch = TimeBranch::Form1Lift;
    Rational slack;
    Rational kappa_target;
    /// Form2 only.
    std::vector<Rational> eps;
    Rational rho_weight = 0;
    std::vector<Rational> alpha;
    std::vector<std::string> notes;

    /// f = t - phi.
    PolySymbol time_function() const { return PolySymbol::t(phi.dim()) - phi; }
};

inline TimeFunctionCert construct_time_function(const NormalFormSpec& spec, const Rational& slack = Rational(1, 100))
{
    validate(spec);
    if (slack <= 0) throw NonPositiveInput("slack must be positive");
    TimeFunctionCert c;
    c.slack = slack;
    if (spec.variant == NormalFormVariant::Form1) {
        c.branch = TimeBranch::Form1Lift;
        c.phi = spec.phi;
        c.kappa_target = slack / 2;
        if (c.kappa_target >= 1) throw SlackTooLarge("kappa = " + format_rational(c.kappa_target) + " >= 1");
        c.notes.push_back("phi = phi_p lifted; {phi,{phi,psi}} vanishes at the base point so kappa_target is slack/2");
    } else {
        c.branch = TimeBranch::Form2Weights;
        const PhasePoint base = PhasePoint::base(spec.d);
        std::vector<Rational> rbar;
        for (const auto& r : spec.r) rbar.push_back(r.evaluate(base));
        EpsilonWeights w = epsilon_weights(rbar, slack);
        c.eps = w.eps;
        c.rho_weight = w.rho_weight;
        c.kappa_target = w.kappa;
        c.alpha = alpha_coefficients(c.eps);
        c.phi = PolySymbol(spec.d);
        for (int i = 1; i <= spec.p; ++i) c.phi += PolySymbol::x(spec.d, i) * c.eps[i - 1];
        c.notes.push_back("phi = sum eps_i x_i with eps_i proportional to 1/rbar_i; H_phi^2 a at the base point = 2 rho_weight");
    }
    if (!homogeneity_check(c.phi, 0).homogeneous) throw InvariantViolation("phi", "not of xi-degree 0");
    return c;
}

struct TimeFunctionCheck {
    Rational exact;
    double value = 0.0;
    bool is_time_function = false;
};

/// p_rho(-H_f(rho)) where p_rho is the quadratic jet of the principal symbol at rho.
inline TimeFunctionCheck time_function_condition(const QuadraticJet& jet, const PolySymbol& f, const PhasePoint& at)
{
    if (f.dim() != jet.d || at.dim() != jet.d) throw DimensionMismatch("time function, jet and point dimensions differ");
    std::vector<Rational> h = hamilton_field(f, at);
    for (auto& v : h) v = -v;
    TimeFunctionCheck out;
    out.exact = jet.evaluate(h);
    out.value = to_double(out.exact);
    out.is_time_function = out.exact < 0;
    return out;
}

} // namespace hypcert
