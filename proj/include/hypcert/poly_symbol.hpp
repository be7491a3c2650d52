#pragma once

// Exact sparse polynomials on the phase space (t, x_1..x_d, tau, xi_1..xi_d).

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hypcert/error.hpp"
#include "hypcert/rational.hpp"

namespace hypcert {

/// Variable indexing. Positions (t, x) come first, then the dual variables (tau, xi).
struct Layout {
    int d = 1;

    int nvars() const { return 2 * (d + 1); }
    int half() const { return d + 1; }
    static constexpr int t() { return 0; }
    int x(int j) const { return j; } // 1-based j
    int tau() const { return d + 1; }
    int xi(int j) const { return d + 1 + j; }
    bool is_dual(int idx) const { return idx > d; }
    /// Conjugate partner of a variable: t <-> tau, x_j <-> xi_j.
    int partner(int idx) const { return is_dual(idx) ? idx - (d + 1) : idx + (d + 1); }

    std::string name(int idx) const
    {
        if (idx == 0) return "t";
        if (idx <= d) return "x" + std::to_string(idx);
        if (idx == d + 1) return "tau";
        return "xi" + std::to_string(idx - d - 1);
    }
    /// Inverse of name(); returns -1 if the name is not a variable of this layout.
    int index_of(const std::string& n) const
    {
        auto tail = [&](std::size_t from) -> int {
            if (n.size() <= from) return -1;
            int v = 0;
            for (std::size_t i = from; i < n.size(); ++i) {
                if (n[i] < '0' || n[i] > '9') return -1;
                v = v * 10 + (n[i] - '0');
                if (v > d) return -1;
            }
            if (n[from] == '0') return -1;
            return v >= 1 ? v : -1;
        };
        if (n == "t") return 0;
        if (n == "tau") return d + 1;
        if (n.rfind("xi", 0) == 0) {
            int j = tail(2);
            return j < 0 ? -1 : xi(j);
        }
        if (n.rfind("x", 0) == 0) {
            int j = tail(1);
            return j < 0 ? -1 : x(j);
        }
        return -1;
    }
};

using Exponent = std::vector<int>;

/// Graded lexicographic order: total degree first, then lex with t > x1 > ... > xi_d.
struct GradedLex {
    bool operator()(const Exponent& a, const Exponent& b) const
    {
        int da = std::accumulate(a.begin(), a.end(), 0);
        int db = std::accumulate(b.begin(), b.end(), 0);
        if (da != db) return da < db;
        // a < b when at the first differing slot a has the smaller power.
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

/// A point of T*(R^{1+d}) with exact coordinates.
struct PhasePoint {
    Rational t;
    std::vector<Rational> x;
    Rational tau;
    std::vector<Rational> xi;

    int dim() const { return static_cast<int>(x.size()); }

    /// The distinguished point (0, 0, 0, e_d).
    static PhasePoint base(int d)
    {
        PhasePoint p{0, std::vector<Rational>(d, 0), 0, std::vector<Rational>(d, 0)};
        p.xi[d - 1] = 1;
        return p;
    }

    std::vector<Rational> coords() const
    {
        std::vector<Rational> c;
        c.reserve(2 * x.size() + 2);
        c.push_back(t);
        c.insert(c.end(), x.begin(), x.end());
        c.push_back(tau);
        c.insert(c.end(), xi.begin(), xi.end());
        return c;
    }

    static PhasePoint from_coords(int d, std::span<const Rational> c)
    {
        if (static_cast<int>(c.size()) != 2 * (d + 1)) throw DimensionMismatch("phase point coordinate count");
        PhasePoint p;
        p.t = c[0];
        p.x.assign(c.begin() + 1, c.begin() + 1 + d);
        p.tau = c[d + 1];
        p.xi.assign(c.begin() + d + 2, c.end());
        return p;
    }

    bool operator==(const PhasePoint&) const = default;
};

/// Exact sparse multivariate polynomial symbol with rational coefficients.
///
/// Terms are keyed by exponent vectors of length 2(d+1) in Layout order; zero
/// coefficients are never stored.
class PolySymbol {
public:
    using TermMap = std::map<Exponent, Rational, GradedLex>;

    PolySymbol() = default;
    explicit PolySymbol(int d) : d_(d)
    {
        if (d < 1) throw DimensionMismatch("dimension d must be positive");
    }

    static PolySymbol constant(int d, const Rational& c)
    {
        PolySymbol p(d);
        p.add_term(Exponent(p.layout().nvars(), 0), c);
        return p;
    }
    static PolySymbol variable(int d, int idx, int power = 1)
    {
        PolySymbol p(d);
        Exponent e(p.layout().nvars(), 0);
        if (idx < 0 || idx >= p.layout().nvars()) throw DimensionMismatch("variable index out of range");
        e[idx] = power;
        p.add_term(std::move(e), 1);
        return p;
    }
    static PolySymbol t(int d) { return variable(d, 0); }
    static PolySymbol x(int d, int j) { return variable(d, Layout{d}.x(j)); }
    static PolySymbol tau(int d) { return variable(d, Layout{d}.tau()); }
    static PolySymbol xi(int d, int j) { return variable(d, Layout{d}.xi(j)); }

    int dim() const { return d_; }
    Layout layout() const { return Layout{d_}; }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    /// Adds c * monomial(e); drops the term if the sum cancels.
    void add_term(Exponent e, const Rational& c)
    {
        if (static_cast<int>(e.size()) != layout().nvars()) throw DimensionMismatch("exponent length");
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(std::move(e), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Rational coefficient(const Exponent& e) const
    {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    int total_degree() const
    {
        int deg = -1;
        for (const auto& [e, c] : terms_) deg = std::max(deg, std::accumulate(e.begin(), e.end(), 0));
        return deg;
    }
    int degree_in(int idx) const
    {
        int deg = 0;
        for (const auto& [e, c] : terms_) deg = std::max(deg, e[idx]);
        return deg;
    }
    /// True if the polynomial involves the given variable.
    bool depends_on(int idx) const { return degree_in(idx) > 0; }

    PolySymbol operator-() const
    {
        PolySymbol r = *this;
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }
    PolySymbol& operator+=(const PolySymbol& o)
    {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    PolySymbol& operator-=(const PolySymbol& o)
    {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    PolySymbol& operator*=(const Rational& s)
    {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }
    friend PolySymbol operator+(PolySymbol a, const PolySymbol& b) { return a += b; }
    friend PolySymbol operator-(PolySymbol a, const PolySymbol& b) { return a -= b; }
    friend PolySymbol operator*(PolySymbol a, const Rational& s) { return a *= s; }
    friend PolySymbol operator*(const Rational& s, PolySymbol a) { return a *= s; }
    friend PolySymbol operator+(PolySymbol a, const Rational& s) { return a += constant(a.dim(), s); }
    friend PolySymbol operator-(PolySymbol a, const Rational& s) { return a -= constant(a.dim(), s); }

    friend PolySymbol operator*(const PolySymbol& a, const PolySymbol& b)
    {
        a.check_dim(b);
        PolySymbol r(a.d_);
        const int n = a.layout().nvars();
        Exponent e(n);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                for (int i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }
    PolySymbol& operator*=(const PolySymbol& o) { return *this = *this * o; }

    PolySymbol pow(int k) const
    {
        PolySymbol r = constant(d_, 1);
        PolySymbol base = *this;
        while (k > 0) {
            if (k & 1) r *= base;
            k >>= 1;
            if (k) base *= base;
        }
        return r;
    }

    bool operator==(const PolySymbol& o) const { return d_ == o.d_ && terms_ == o.terms_; }

    /// Exact partial derivative with respect to variable idx.
    PolySymbol derivative(int idx) const
    {
        PolySymbol r(d_);
        for (const auto& [e, c] : terms_) {
            if (e[idx] == 0) continue;
            Exponent ne = e;
            --ne[idx];
            r.add_term(std::move(ne), c * e[idx]);
        }
        return r;
    }

    /// Evaluates over any commutative ring T, converting coefficients with conv.
    template <class T, class Conv>
    T evaluate_with(std::span<const T> vals, Conv&& conv) const
    {
        const int n = layout().nvars();
        if (static_cast<int>(vals.size()) != n) throw DimensionMismatch("evaluation point has wrong length");
        T zero = conv(Rational(0));
        T one = conv(Rational(1));
        std::vector<std::vector<T>> powers(n);
        for (int i = 0; i < n; ++i) {
            int deg = degree_in(i);
            powers[i].reserve(deg + 1);
            powers[i].push_back(one);
            for (int k = 1; k <= deg; ++k) powers[i].push_back(powers[i].back() * vals[i]);
        }
        T sum = zero;
        for (const auto& [e, c] : terms_) {
            T term = conv(c);
            for (int i = 0; i < n; ++i)
                if (e[i]) term = term * powers[i][e[i]];
            sum = sum + term;
        }
        return sum;
    }

    Rational evaluate(std::span<const Rational> vals) const
    {
        return evaluate_with<Rational>(vals, [](const Rational& r) { return r; });
    }
    Rational evaluate(const PhasePoint& p) const
    {
        check_point(p);
        auto c = p.coords();
        return evaluate(std::span<const Rational>(c));
    }
    double evaluate(std::span<const double> vals) const
    {
        return evaluate_with<double>(vals, [](const Rational& r) { return to_double(r); });
    }

    /// Substitutes variable idx by the polynomial g (exact composition).
    PolySymbol substitute(int idx, const PolySymbol& g) const
    {
        check_dim(g);
        std::vector<PolySymbol> gpow{constant(d_, 1)};
        PolySymbol r(d_);
        for (const auto& [e, c] : terms_) {
            while (static_cast<int>(gpow.size()) <= e[idx]) gpow.push_back(gpow.back() * g);
            Exponent rest = e;
            rest[idx] = 0;
            PolySymbol mono(d_);
            mono.add_term(std::move(rest), c);
            r += mono * gpow[e[idx]];
        }
        return r;
    }

    void check_dim(const PolySymbol& o) const
    {
        if (d_ != o.d_) throw DimensionMismatch("symbols of dimension " + std::to_string(d_) + " and " + std::to_string(o.d_));
    }
    void check_point(const PhasePoint& p) const
    {
        if (p.dim() != d_ || static_cast<int>(p.xi.size()) != d_) throw DimensionMismatch("phase point dimension");
    }

    /// Human-readable form, leading (highest graded-lex) term first.
    std::string to_string() const
    {
        if (terms_.empty()) return "0";
        const Layout lay = layout();
        std::string out;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [e, c] = *it;
            bool constant_term = std::all_of(e.begin(), e.end(), [](int k) { return k == 0; });
            Rational mag = c < 0 ? Rational(-c) : c;
            if (first)
                out += c < 0 ? "-" : "";
            else
                out += c < 0 ? " - " : " + ";
            first = false;
            std::string mono;
            for (int i = 0; i < lay.nvars(); ++i) {
                if (!e[i]) continue;
                if (!mono.empty()) mono += "*";
                mono += lay.name(i);
                if (e[i] > 1) mono += "^" + std::to_string(e[i]);
            }
            if (constant_term)
                out += format_rational(mag);
            else if (mag == 1)
                out += mono;
            else
                out += format_rational(mag) + "*" + mono;
        }
        return out;
    }

private:
    int d_ = 1;
    TermMap terms_;
};

/// Double-precision snapshot of a PolySymbol for hot evaluation loops.
class CompiledPoly {
public:
    CompiledPoly() = default;
    explicit CompiledPoly(const PolySymbol& p) : nvars_(p.layout().nvars())
    {
        maxdeg_.assign(nvars_, 0);
        for (const auto& [e, c] : p.terms()) {
            coeff_.push_back(to_double(c));
            for (int i = 0; i < nvars_; ++i) {
                exps_.push_back(e[i]);
                maxdeg_[i] = std::max(maxdeg_[i], e[i]);
            }
        }
        offset_.assign(nvars_ + 1, 0);
        for (int i = 0; i < nvars_; ++i) offset_[i + 1] = offset_[i] + maxdeg_[i] + 1;
    }

    int nvars() const { return nvars_; }
    bool is_zero() const { return coeff_.empty(); }

    /// scratch must hold at least scratch_size() doubles.
    std::size_t scratch_size() const { return offset_.empty() ? 0 : static_cast<std::size_t>(offset_.back()); }

    double operator()(const double* v, double* scratch) const
    {
        for (int i = 0; i < nvars_; ++i) {
            double* pw = scratch + offset_[i];
            pw[0] = 1.0;
            for (int k = 1; k <= maxdeg_[i]; ++k) pw[k] = pw[k - 1] * v[i];
        }
        double sum = 0.0;
        const int* e = exps_.data();
        for (std::size_t t = 0; t < coeff_.size(); ++t, e += nvars_) {
            double term = coeff_[t];
            for (int i = 0; i < nvars_; ++i)
                if (e[i]) term *= scratch[offset_[i] + e[i]];
            sum += term;
        }
        return sum;
    }

    double operator()(std::span<const double> v) const
    {
        std::vector<double> scratch(scratch_size());
        return (*this)(v.data(), scratch.data());
    }

private:
    int nvars_ = 0;
    std::vector<double> coeff_;
    std::vector<int> exps_;
    std::vector<int> maxdeg_;
    std::vector<int> offset_;
};

} // namespace hypcert
