#pragma once

// JSON input files: a symbol a(t, x, xi) as an exact term list, an optional
// normal-form block, the certification region and pipeline options.
// serialize() is canonical, so serialize(parse(s)) == s for canonical s.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypcert/error.hpp"
#include "hypcert/normal_forms.hpp"
#include "hypcert/poly_symbol.hpp"
#include "hypcert/rational.hpp"
#include "hypcert/verifier.hpp"

namespace hypcert {

inline constexpr int kSchemaVersion = 1;

struct FileOptions {
    Rational slack = Rational(1, 100);
    /// Spectral tolerance; 0 selects 1e-9 (1 + |F|).
    double tol = 0.0;
    StructuralOptions structural;

    bool operator==(const FileOptions& o) const
    {
        return slack == o.slack && tol == o.tol && structural.count == o.structural.count && structural.delta == o.structural.delta;
    }
};

struct SymbolFile {
    int dim = 1;
    PhasePoint base_point;
    PolySymbol symbol;
    std::optional<NormalFormSpec> normal_form;
    Region region;
    FileOptions options;
};

namespace detail {

using json = nlohmann::json;

inline void require_object(const json& j, const std::string& path, std::initializer_list<const char*> required,
                           std::initializer_list<const char*> optional = {})
{
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    for (const char* k : required)
        if (!j.contains(k)) throw SchemaError(path, std::string("missing key '") + k + "'");
    for (const auto& [k, v] : j.items()) {
        auto hit = [&](std::initializer_list<const char*> keys) {
            return std::any_of(keys.begin(), keys.end(), [&](const char* c) { return k == c; });
        };
        if (!hit(required) && !hit(optional)) throw SchemaError(path + "." + k, "unknown key");
    }
}

inline int read_int(const json& j, const std::string& path, int lo, int hi)
{
    if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
    auto v = j.get<std::int64_t>();
    if (v < lo || v > hi) throw SchemaError(path, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

inline double read_double(const json& j, const std::string& path)
{
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

inline Rational read_rational(const json& j, const std::string& path)
{
    if (!j.is_string()) throw SchemaError(path, "exact values are strings such as \"1/3\"");
    try {
        return parse_rational(j.get<std::string>());
    } catch (const ParseError& e) {
        throw SchemaError(path, e.what());
    }
}

/// Variable index for an exponent key; DimensionError for x_j / xi_j with j > d.
inline int variable_index(const std::string& name, int d, const std::string& path)
{
    const int idx = Layout{d}.index_of(name);
    if (idx >= 0) return idx;
    auto digits_from = [&](std::size_t k) {
        return name.size() > k && name[k] != '0' && std::all_of(name.begin() + k, name.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if ((name.rfind("xi", 0) == 0 && digits_from(2)) || (name.rfind("x", 0) == 0 && digits_from(1)))
        throw DimensionError(path + ": variable '" + name + "' exceeds dim " + std::to_string(d));
    throw SchemaError(path, "unknown variable '" + name + "'");
}

inline PolySymbol read_terms(const json& j, int d, const std::string& path, bool allow_empty)
{
    if (!j.is_array()) throw SchemaError(path, "expected a term list");
    if (j.empty() && !allow_empty) throw SchemaError(path, "a must be nonzero (empty term list)");
    const Layout lay{d};
    PolySymbol out(d);
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string tp = path + "[" + std::to_string(k) + "]";
        require_object(j[k], tp, {"coeff", "exp"});
        Rational c = read_rational(j[k]["coeff"], tp + ".coeff");
        if (c == 0) throw SchemaError(tp + ".coeff", "zero coefficient");
        const json& e = j[k]["exp"];
        if (!e.is_object()) throw SchemaError(tp + ".exp", "expected an object");
        Exponent ex(lay.nvars(), 0);
        for (const auto& [name, pw] : e.items()) {
            const std::string ep = tp + ".exp." + name;
            int idx = variable_index(name, d, ep);
            ex[idx] = read_int(pw, ep, 1, 1000);
        }
        if (out.coefficient(ex) != 0) throw SchemaError(tp, "duplicate monomial");
        out.add_term(std::move(ex), c);
    }
    return out;
}

inline json write_terms(const PolySymbol& p)
{
    const Layout lay = p.layout();
    json arr = json::array();
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        json exp = json::object();
        for (int i = 0; i < lay.nvars(); ++i)
            if (it->first[i]) exp[lay.name(i)] = it->first[i];
        arr.push_back({{"coeff", format_rational(it->second)}, {"exp", exp}});
    }
    return arr;
}

inline std::vector<Rational> read_rational_array(const json& j, const std::string& path, int d)
{
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    if (static_cast<int>(j.size()) != d)
        throw DimensionError(path + ": expected " + std::to_string(d) + " entries, got " + std::to_string(j.size()));
    std::vector<Rational> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_rational(j[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

inline json write_rationals(const std::vector<Rational>& v)
{
    json arr = json::array();
    for (const auto& r : v) arr.push_back(format_rational(r));
    return arr;
}

inline std::vector<PolySymbol> read_term_lists(const json& j, int d, const std::string& path)
{
    if (!j.is_array()) throw SchemaError(path, "expected an array of term lists");
    std::vector<PolySymbol> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_terms(j[k], d, path + "[" + std::to_string(k) + "]", true));
    return out;
}

inline NormalFormSpec read_normal_form(const json& j, int d, const PolySymbol& symbol)
{
    const std::string path = "$.normal_form";
    if (!j.is_object() || !j.contains("variant")) throw SchemaError(path, "missing key 'variant'");
    NormalFormSpec s;
    s.d = d;
    const json& v = j["variant"];
    if (v == "form1") {
        s.variant = NormalFormVariant::Form1;
        require_object(j, path, {"variant", "p", "q", "r", "phi", "psi"});
        s.phi = read_terms(j["phi"], d, path + ".phi", true);
        s.psi = read_terms(j["psi"], d, path + ".psi", true);
    } else if (v == "form2") {
        s.variant = NormalFormVariant::Form2;
        require_object(j, path, {"variant", "p", "q", "r", "g"});
        s.g = read_terms(j["g"], d, path + ".g", true);
    } else {
        throw SchemaError(path + ".variant", "expected \"form1\" or \"form2\"");
    }
    s.p = read_int(j["p"], path + ".p", 0, d);
    s.q = read_term_lists(j["q"], d, path + ".q");
    s.r = read_term_lists(j["r"], d, path + ".r");
    s.composite = symbol;
    return s;
}

inline json write_normal_form(const NormalFormSpec& s)
{
    json j;
    j["variant"] = to_string(s.variant);
    j["p"] = s.p;
    json q = json::array(), r = json::array();
    for (const auto& f : s.q) q.push_back(write_terms(f));
    for (const auto& f : s.r) r.push_back(write_terms(f));
    j["q"] = q;
    j["r"] = r;
    if (s.variant == NormalFormVariant::Form1) {
        j["phi"] = write_terms(s.phi);
        j["psi"] = write_terms(s.psi);
    } else {
        j["g"] = write_terms(s.g);
    }
    return j;
}

/// 1-based line and column of a byte offset.
inline std::pair<int, int> line_column(const std::string& text, std::size_t offset)
{
    int line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json parse_json(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is one past the offending character.
        auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(msg, line, col);
    }
}

} // namespace detail

inline SymbolFile parse_symbol_json(const nlohmann::json& j)
{
    using detail::read_double;
    using detail::read_int;
    detail::require_object(j, "$", {"schema_version", "dim", "base_point", "symbol"}, {"normal_form", "region", "options"});
    const int version = read_int(j["schema_version"], "$.schema_version", 0, 1 << 30);
    if (version != kSchemaVersion) throw SchemaError("$.schema_version", "unsupported version " + std::to_string(version));

    SymbolFile f;
    f.dim = read_int(j["dim"], "$.dim", 1, 64);
    const int d = f.dim;

    const auto& bp = j["base_point"];
    detail::require_object(bp, "$.base_point", {"t", "x", "tau", "xi"});
    f.base_point.t = detail::read_rational(bp["t"], "$.base_point.t");
    f.base_point.tau = detail::read_rational(bp["tau"], "$.base_point.tau");
    f.base_point.x = detail::read_rational_array(bp["x"], "$.base_point.x", d);
    f.base_point.xi = detail::read_rational_array(bp["xi"], "$.base_point.xi", d);

    f.symbol = detail::read_terms(j["symbol"], d, "$.symbol", false);
    if (j.contains("normal_form")) f.normal_form = detail::read_normal_form(j["normal_form"], d, f.symbol);

    if (j.contains("region")) {
        const auto& r = j["region"];
        detail::require_object(r, "$.region", {}, {"t_max", "x_half", "xi_half", "eta_den"});
        if (r.contains("t_max")) f.region.t_max = read_double(r["t_max"], "$.region.t_max");
        if (r.contains("x_half")) f.region.x_half = read_double(r["x_half"], "$.region.x_half");
        if (r.contains("xi_half")) f.region.xi_half = read_double(r["xi_half"], "$.region.xi_half");
        if (r.contains("eta_den")) f.region.eta_den = read_double(r["eta_den"], "$.region.eta_den");
    }
    if (j.contains("options")) {
        const auto& o = j["options"];
        detail::require_object(o, "$.options", {}, {"slack", "tol", "grid", "structural_grid", "cutoff_delta"});
        if (o.contains("slack")) f.options.slack = detail::read_rational(o["slack"], "$.options.slack");
        if (o.contains("tol")) f.options.tol = read_double(o["tol"], "$.options.tol");
        if (o.contains("grid")) {
            const auto& g = o["grid"];
            detail::require_object(g, "$.options.grid", {}, {"t", "x", "xi"});
            if (g.contains("t")) f.region.t_count = read_int(g["t"], "$.options.grid.t", 3, 100000);
            if (g.contains("x")) f.region.x_count = read_int(g["x"], "$.options.grid.x", 3, 100000);
            if (g.contains("xi")) f.region.xi_count = read_int(g["xi"], "$.options.grid.xi", 3, 100000);
        }
        if (o.contains("structural_grid")) f.options.structural.count = read_int(o["structural_grid"], "$.options.structural_grid", 3, 1000);
        if (o.contains("cutoff_delta")) f.options.structural.delta = read_double(o["cutoff_delta"], "$.options.cutoff_delta");
    }
    try {
        f.region.validate();
    } catch (const InvariantViolation& e) {
        throw SchemaError("$.region", e.what());
    }
    if (f.options.slack <= 0) throw SchemaError("$.options.slack", "must be positive");
    if (f.options.tol < 0) throw SchemaError("$.options.tol", "must be nonnegative (0 selects the default)");
    if (!(f.options.structural.delta > 0)) throw SchemaError("$.options.cutoff_delta", "must be positive");
    return f;
}

/// Parses JSON text; syntax errors carry line and column.
inline SymbolFile parse_symbol_text(const std::string& text) { return parse_symbol_json(detail::parse_json(text)); }

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SymbolFile parse_symbol_file(const std::string& path) { return parse_symbol_text(read_file(path)); }

inline nlohmann::json to_json(const SymbolFile& f)
{
    using detail::json;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["dim"] = f.dim;
    j["base_point"] = {{"t", format_rational(f.base_point.t)},
                       {"x", detail::write_rationals(f.base_point.x)},
                       {"tau", format_rational(f.base_point.tau)},
                       {"xi", detail::write_rationals(f.base_point.xi)}};
    j["symbol"] = detail::write_terms(f.symbol);
    if (f.normal_form) j["normal_form"] = detail::write_normal_form(*f.normal_form);
    j["region"] = {{"t_max", f.region.t_max}, {"x_half", f.region.x_half}, {"xi_half", f.region.xi_half}, {"eta_den", f.region.eta_den}};
    j["options"] = {{"slack", format_rational(f.options.slack)},
                    {"tol", f.options.tol},
                    {"grid", {{"t", f.region.t_count}, {"x", f.region.x_count}, {"xi", f.region.xi_count}}},
                    {"structural_grid", f.options.structural.count},
                    {"cutoff_delta", f.options.structural.delta}};
    return j;
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string serialize(const SymbolFile& f) { return to_json(f).dump(2) + "\n"; }

/// Candidate frame file: {schema_version, dim, base_point, first_index, pairs: [{X, Xi}]}.
inline CandidateFrame parse_frame_json(const nlohmann::json& j)
{
    detail::require_object(j, "$", {"schema_version", "dim", "base_point", "first_index", "pairs"});
    const int version = detail::read_int(j["schema_version"], "$.schema_version", 0, 1 << 30);
    if (version != kSchemaVersion) throw SchemaError("$.schema_version", "unsupported version " + std::to_string(version));
    const int d = detail::read_int(j["dim"], "$.dim", 1, 64);
    CandidateFrame fr;
    const auto& bp = j["base_point"];
    detail::require_object(bp, "$.base_point", {"t", "x", "tau", "xi"});
    fr.base.t = detail::read_rational(bp["t"], "$.base_point.t");
    fr.base.tau = detail::read_rational(bp["tau"], "$.base_point.tau");
    fr.base.x = detail::read_rational_array(bp["x"], "$.base_point.x", d);
    fr.base.xi = detail::read_rational_array(bp["xi"], "$.base_point.xi", d);
    fr.first_index = detail::read_int(j["first_index"], "$.first_index", 1, d);
    const auto& pairs = j["pairs"];
    if (!pairs.is_array() || pairs.empty()) throw SchemaError("$.pairs", "expected a nonempty array");
    if (fr.first_index + static_cast<int>(pairs.size()) - 1 != d)
        throw DimensionError("$.pairs: indices " + std::to_string(fr.first_index) + ".." + std::to_string(d) + " need " +
                             std::to_string(d - fr.first_index + 1) + " pairs, got " + std::to_string(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const std::string pp = "$.pairs[" + std::to_string(k) + "]";
        detail::require_object(pairs[k], pp, {"X", "Xi"});
        fr.pairs.push_back({detail::read_terms(pairs[k]["X"], d, pp + ".X", true), detail::read_terms(pairs[k]["Xi"], d, pp + ".Xi", true)});
    }
    return fr;
}

inline CandidateFrame parse_frame_text(const std::string& text) { return parse_frame_json(detail::parse_json(text)); }

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xf];
    return out;
}

} // namespace hypcert
