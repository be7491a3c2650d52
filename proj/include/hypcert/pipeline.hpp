#pragma once

// End-to-end run: singular point -> classification -> side conditions ->
// time function -> grid and structural certificates, and report emission.

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypcert/error.hpp"
#include "hypcert/normal_forms.hpp"
#include "hypcert/spectral.hpp"
#include "hypcert/symbol_file.hpp"
#include "hypcert/symbolic_core.hpp"
#include "hypcert/time_functions.hpp"
#include "hypcert/verifier.hpp"

namespace hypcert {

inline constexpr const char* kToolName = "hypcert";
inline constexpr const char* kToolVersion = "0.1.0";

enum class Status { Certified, Failed, Marginal, NotApplicable };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::Certified: return "CERTIFIED";
    case Status::Failed: return "FAILED";
    case Status::Marginal: return "MARGINAL";
    case Status::NotApplicable: return "NOT_APPLICABLE";
    }
    return "?";
}

inline int exit_code(Status s)
{
    switch (s) {
    case Status::Certified: return 0;
    case Status::Marginal: return 2;
    default: return 1;
    }
}

struct Report {
    Status status = Status::Failed;
    /// Last stage reached: singular_point, classification, normal_form, side_conditions, time_function, certificate, done.
    std::string stage;
    std::string reason;
    std::string input_hash;
    int dim = 1;
    Region region;
    FileOptions options;
    bool classify_only = false;

    std::optional<Classification> classification;
    std::optional<Complex> marginal_eigenvalue;
    std::optional<SideConditionReport> side_conditions;
    std::optional<TimeFunctionCert> time_function;
    std::optional<TimeFunctionCheck> time_condition;
    std::optional<CertificateReport> certificate;
};

namespace detail {

/// The eigenvalue that triggered the marginal flag (same rule as the spectral module).
inline std::optional<Complex> marginal_eigenvalue(const Spectrum& s)
{
    for (const auto& z : s.eigenvalues) {
        const double re = std::abs(z.real()), im = std::abs(z.imag());
        if ((re > s.tol && re <= 10 * s.tol) || (re > s.tol && im > s.tol && im <= 10 * s.tol)) return z;
    }
    return std::nullopt;
}

inline std::string format_complex(const Complex& z)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.12g%+.12gi", z.real(), z.imag());
    return buf;
}

inline Report finish(Report r, Status s, std::string stage, std::string reason)
{
    r.status = s;
    r.stage = std::move(stage);
    r.reason = std::move(reason);
    return r;
}

} // namespace detail

/// Hash of the canonical serialisation; whitespace and key order do not matter.
inline std::string input_hash(const SymbolFile& file) { return "fnv1a64:" + fnv1a_hex(serialize(file)); }

/// Runs every stage; the first failing stage fixes status and reason.
/// With classify_only the run stops after classification and an effective,
/// non-marginal base point is reported as CERTIFIED.
inline Report run_pipeline(const SymbolFile& file, bool classify_only = false)
{
    Report r;
    r.input_hash = input_hash(file);
    r.dim = file.dim;
    r.region = file.region;
    r.options = file.options;
    r.classify_only = classify_only;

    const PolySymbol p = principal_symbol(file.symbol);
    try {
        r.classification = classify_effective_hyperbolicity(p, file.base_point,
                                                            file.options.tol > 0 ? std::optional<double>(file.options.tol) : std::nullopt);
    } catch (const NotSingular& e) {
        return detail::finish(std::move(r), Status::Failed, "singular_point", std::string("NotSingular: ") + e.what());
    } catch (const Error& e) {
        return detail::finish(std::move(r), Status::Failed, "classification", e.what());
    }
    const Classification& cls = *r.classification;
    if (cls.marginal()) {
        r.marginal_eigenvalue = detail::marginal_eigenvalue(cls.spectrum);
        std::string ev = r.marginal_eigenvalue ? detail::format_complex(*r.marginal_eigenvalue) : "?";
        return detail::finish(std::move(r), Status::Marginal, "classification", "marginal spectrum: eigenvalue " + ev + " lies within 10*tol of an axis");
    }
    if (!cls.effective)
        return detail::finish(std::move(r), Status::Failed, "classification",
                              std::string("not effectively hyperbolic: spectrum is ") + to_string(cls.spectrum.classification));
    if (classify_only) return detail::finish(std::move(r), Status::Certified, "classification", "effectively hyperbolic double characteristic");

    if (!file.normal_form)
        return detail::finish(std::move(r), Status::NotApplicable, "normal_form", "no normal_form block: certification needs a normal form");
    const NormalFormSpec& spec = *file.normal_form;
    if (!(file.base_point == PhasePoint::base(file.dim)))
        return detail::finish(std::move(r), Status::Failed, "normal_form", "normal forms are anchored at the base point (0, 0, 0, e_d)");
    try {
        validate(spec);
    } catch (const Error& e) {
        return detail::finish(std::move(r), Status::Failed, "normal_form", e.what());
    }

    r.side_conditions = check_side_conditions(spec);
    if (!r.side_conditions->ok()) {
        std::string why = "side conditions fail";
        for (const auto& m : r.side_conditions->messages) why += "; " + m;
        return detail::finish(std::move(r), Status::Failed, "side_conditions", why);
    }

    try {
        r.time_function = construct_time_function(spec, file.options.slack);
        r.time_condition = time_function_condition(cls.jet, r.time_function->time_function(), file.base_point);
    } catch (const Error& e) {
        return detail::finish(std::move(r), Status::Failed, "time_function", e.what());
    }
    if (!r.time_condition->is_time_function)
        return detail::finish(std::move(r), Status::Failed, "time_function", "p(-H_f) = " + format_rational(r.time_condition->exact) + " is not negative");

    try {
        r.certificate = build_certificate(spec, *r.time_function, file.region, file.options.structural);
    } catch (const Error& e) {
        return detail::finish(std::move(r), Status::Failed, "certificate", e.what());
    }
    const CertificateReport& c = *r.certificate;
    if (!c.grid.nonneg.pass) return detail::finish(std::move(r), Status::Failed, "certificate", "a takes negative values on t >= 0");
    if (!c.grid.c) return detail::finish(std::move(r), Status::Failed, "certificate", c.grid.c_error);
    if (!c.grid.kappa) return detail::finish(std::move(r), Status::Failed, "certificate", c.grid.kappa_error);
    if (!(c.grid.c->value > 0)) return detail::finish(std::move(r), Status::Failed, "certificate", "c_est is not positive");
    if (!(c.grid.kappa->value < 1)) return detail::finish(std::move(r), Status::Failed, "certificate", "kappa_est is not below 1");
    if (!c.structural_ok()) {
        std::string why = "structural checks fail:";
        for (const auto& s : c.structural)
            if (!s.pass) why += " " + s.name;
        return detail::finish(std::move(r), Status::Failed, "certificate", why);
    }
    if (!c.marginal_flags.empty()) {
        std::string why = "marginal certificate:";
        for (const auto& m : c.marginal_flags) why += " " + m + ";";
        why.pop_back();
        return detail::finish(std::move(r), Status::Marginal, "certificate", why);
    }
    return detail::finish(std::move(r), Status::Certified, "done", "all stages passed");
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline json complex_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline json rationals_json(const std::vector<Rational>& v) { return write_rationals(v); }

inline json region_json(const Region& r)
{
    return {{"t_range", json::array({0.0, r.t_max})},
            {"mirrored_t_range", json::array({-r.t_max, 0.0})},
            {"x_half", r.x_half},
            {"xi_half", r.xi_half},
            {"xi_center", "e_d"},
            {"counts", {{"t", r.t_count}, {"x", r.x_count}, {"xi", r.xi_count}}},
            {"eta_den", r.eta()}};
}

inline json estimate_json(const Estimate& e)
{
    return {{"value", e.value}, {"witness", e.witness}, {"evaluated", e.evaluated}, {"excluded", e.excluded}, {"points", e.points}};
}

inline json classification_json(const Classification& c, const std::optional<Complex>& marginal)
{
    json eig = json::array();
    for (const auto& z : c.spectrum.eigenvalues) eig.push_back(complex_json(z));
    return {{"effective", c.effective},
            {"witness", c.witness ? complex_json(*c.witness) : json(nullptr)},
            {"eigenvalues", eig},
            {"spectrum_class", to_string(c.spectrum.classification)},
            {"tol", c.spectrum.tol},
            {"max_residual", c.spectrum.max_residual},
            {"marginal", c.marginal()},
            {"marginal_eigenvalue", marginal ? complex_json(*marginal) : json(nullptr)},
            {"d2a_dt2", format_rational(2 * c.jet.form(0, 0))}};
}

inline json side_json(const SideConditionReport& s)
{
    return {{"variant", to_string(s.variant)},
            {"double_bracket", format_rational(s.double_bracket)},
            {"double_bracket_ok", s.double_bracket_ok},
            {"inverse_r_sum", s.inverse_r_sum ? json(format_rational(*s.inverse_r_sum)) : json(nullptr)},
            {"bbis_ok", s.bbis_ok},
            {"positivity_ok", s.positivity_ok},
            {"one_sided", {{"pass", s.one_sided.pass}, {"worst", s.one_sided.worst}, {"witness", s.one_sided.witness}, {"samples", s.one_sided.samples}, {"grid", s.one_sided.grid}}},
            {"messages", s.messages},
            {"ok", s.ok()}};
}

inline json time_json(const TimeFunctionCert& t, const std::optional<TimeFunctionCheck>& chk)
{
    json j = {{"phi", t.phi.to_string()},
              {"f", t.time_function().to_string()},
              {"branch", to_string(t.branch)},
              {"slack", format_rational(t.slack)},
              {"kappa_target", format_rational(t.kappa_target)},
              {"kappa_target_value", to_double(t.kappa_target)},
              {"eps", rationals_json(t.eps)},
              {"rho_weight", format_rational(t.rho_weight)},
              {"alpha", rationals_json(t.alpha)},
              {"notes", t.notes}};
    if (chk) j["condition"] = {{"p_of_minus_Hf", format_rational(chk->exact)}, {"value", chk->value}, {"is_time_function", chk->is_time_function}};
    return j;
}

inline json certificate_json(const CertificateReport& c, const std::optional<TimeFunctionCert>& t)
{
    const auto& nn = c.grid.nonneg;
    json structural = json::array();
    for (const auto& s : c.structural)
        structural.push_back({{"name", s.name}, {"pass", s.pass}, {"measured", s.measured}, {"worst_margin", s.worst_margin},
                              {"samples", s.samples}, {"grid", s.grid}, {"note", s.note}});
    return {{"empirical", true},
            {"grid", region_json(c.grid.region)},
            {"summary",
             {{"c_est", c.grid.c ? json(c.grid.c->value) : json(nullptr)},
              {"kappa_est", c.grid.kappa ? json(c.grid.kappa->value) : json(nullptr)},
              {"kappa_target", t ? json(to_double(t->kappa_target)) : json(nullptr)},
              {"nonneg_min", nn.min_value},
              {"mirrored_min", nn.mirrored_min}}},
            {"nonneg", {{"pass", nn.pass}, {"min_value", nn.min_value}, {"witness", nn.witness}, {"points", nn.points}}},
            {"one_sided",
             {{"negative_for_negative_t", nn.negative_for_negative_t}, {"min_value", nn.mirrored_min}, {"witness", nn.mirrored_witness}, {"points", nn.mirrored_points}}},
            {"c", c.grid.c ? estimate_json(*c.grid.c) : json(nullptr)},
            {"c_error", c.grid.c_error},
            {"kappa", c.grid.kappa ? estimate_json(*c.grid.kappa) : json(nullptr)},
            {"kappa_error", c.grid.kappa_error},
            {"structural", structural},
            {"marginal_flags", c.marginal_flags}};
}

inline std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string point_text(const std::vector<double>& v)
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + ")";
}

} // namespace detail

inline nlohmann::json to_json(const Report& r)
{
    using detail::json;
    json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["input_hash"] = r.input_hash;
    j["status"] = to_string(r.status);
    j["stage"] = r.stage;
    j["reason"] = r.reason;
    j["mode"] = r.classify_only ? "classify" : "certify";
    j["settings"] = {{"dim", r.dim},
                     {"region", detail::region_json(r.region)},
                     {"slack", format_rational(r.options.slack)},
                     {"tol", r.options.tol},
                     {"structural_grid", r.options.structural.count},
                     {"cutoff_delta", r.options.structural.delta},
                     {"threads_affect_output", false}};
    j["classification"] = r.classification ? detail::classification_json(*r.classification, r.marginal_eigenvalue) : json(nullptr);
    j["side_conditions"] = r.side_conditions ? detail::side_json(*r.side_conditions) : json(nullptr);
    j["time_function"] = r.time_function ? detail::time_json(*r.time_function, r.time_condition) : json(nullptr);
    j["certificate"] = r.certificate ? detail::certificate_json(*r.certificate, r.time_function) : json(nullptr);
    return j;
}

enum class ReportFormat { Json, Text };

inline std::string emit_text(const Report& r)
{
    using detail::num;
    std::string s;
    auto line = [&](const std::string& l) { s += l + "\n"; };
    line(std::string(kToolName) + " " + kToolVersion);
    line("input " + r.input_hash);
    line(std::string("status: ") + to_string(r.status) + " (stage " + r.stage + ")");
    line("reason: " + r.reason);
    const Region& g = r.region;
    line("grid: t in [0, " + num(g.t_max) + "], |x| <= " + num(g.x_half) + ", |xi - e_d| <= " + num(g.xi_half) + ", counts t=" +
         std::to_string(g.t_count) + " x=" + std::to_string(g.x_count) + " xi=" + std::to_string(g.xi_count) + ", eta_den " + num(g.eta()));
    if (r.classification) {
        const auto& c = *r.classification;
        std::string l = std::string("classification: ") + (c.effective ? "effective" : "not effective") + ", spectrum " +
                        to_string(c.spectrum.classification) + ", tol " + num(c.spectrum.tol);
        if (c.witness) l += ", witness eigenvalue " + detail::format_complex(*c.witness);
        line(l);
        std::string eig = "eigenvalues:";
        for (const auto& z : c.spectrum.eigenvalues) eig += " " + detail::format_complex(z);
        line(eig);
        if (c.marginal())
            line("marginal: eigenvalue " + (r.marginal_eigenvalue ? detail::format_complex(*r.marginal_eigenvalue) : std::string("?")) +
                 " within 10*tol of an axis");
    }
    if (r.side_conditions) {
        const auto& sc = *r.side_conditions;
        line(std::string("side conditions: ") + (sc.ok() ? "ok" : "fail") + ", double bracket " + format_rational(sc.double_bracket) +
             (sc.inverse_r_sum ? ", sum 1/r " + format_rational(*sc.inverse_r_sum) : std::string()) + ", one-sided worst " + num(sc.one_sided.worst));
        for (const auto& m : sc.messages) line("  " + m);
    }
    if (r.time_function) {
        const auto& t = *r.time_function;
        line("time function: f = " + t.time_function().to_string() + ", branch " + to_string(t.branch) + ", kappa_target " +
             format_rational(t.kappa_target) + " (" + num(to_double(t.kappa_target)) + ")");
        if (r.time_condition) line("  p(-H_f) at base = " + format_rational(r.time_condition->exact));
    }
    if (r.certificate) {
        const auto& c = *r.certificate;
        const auto& nn = c.grid.nonneg;
        line("certificate (empirical grid estimates):");
        line(std::string("  nonnegativity on t >= 0: ") + (nn.pass ? "pass" : "fail") + ", min a = " + num(nn.min_value) + " at " +
             detail::point_text(nn.witness) + ", " + std::to_string(nn.points) + " points");
        line(std::string("  one-sided: a < 0 somewhere on t < 0: ") + (nn.negative_for_negative_t ? "yes" : "no") + ", min a = " +
             num(nn.mirrored_min) + " at " + detail::point_text(nn.mirrored_witness));
        line("  c_est = " + (c.grid.c ? num(c.grid.c->value) + " at " + detail::point_text(c.grid.c->witness) : c.grid.c_error));
        line("  kappa_est = " + (c.grid.kappa ? num(c.grid.kappa->value) + " at " + detail::point_text(c.grid.kappa->witness) : c.grid.kappa_error));
        for (const auto& st : c.structural)
            line("  structural " + st.name + ": " + (st.pass ? "pass" : "fail") + ", measured " + num(st.measured) + ", worst margin " +
                 num(st.worst_margin) + ", " + std::to_string(st.samples) + " samples" + (st.note.empty() ? "" : " (" + st.note + ")"));
        for (const auto& m : c.marginal_flags) line("  marginal: " + m);
    }
    return s;
}

inline std::string emit_report(const Report& r, ReportFormat fmt)
{
    if (fmt == ReportFormat::Text) return emit_text(r);
    return to_json(r).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Study helpers exposed by the command line tool

/// minimize_Q at one theta for the file's normal form; theta defaults to 0.
inline nlohmann::json minimize_report(const SymbolFile& file, std::vector<double> theta)
{
    using detail::json;
    if (!file.normal_form) throw SchemaError("$.normal_form", "minimize needs a normal_form block");
    const ExtendedQ q = build_extended_Q(*file.normal_form, build_cutoff(file.options.structural.delta));
    if (theta.empty()) theta.assign(q.theta_dim(), 0.0);
    if (static_cast<int>(theta.size()) != q.theta_dim())
        throw DimensionError("theta has " + std::to_string(theta.size()) + " entries, expected " + std::to_string(q.theta_dim()));
    double norm = 0;
    for (double v : theta) norm += v * v;
    norm = std::sqrt(norm);
    MinimizeResult m = minimize_Q(q, theta);
    return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
            {"input_hash", input_hash(file)},
            {"theta", theta},
            {"theta_norm", norm},
            {"stability_radius", q.stability_radius()},
            {"within_stability_radius", norm <= q.stability_radius()},
            {"m", m.m},
            {"w_bar", m.w_bar},
            {"hessian_cond", m.hessian_cond},
            {"grad_norm", m.grad_norm},
            {"iterations", m.iterations},
            {"envelope_gradient", envelope_gradient(q, theta, m.w_bar)}};
}

inline nlohmann::json frame_report(const CandidateFrame& frame)
{
    FrameReport rep = check_frame(frame);
    return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}}, {"ok", rep.ok}, {"failures", rep.failures}};
}

} // namespace hypcert
