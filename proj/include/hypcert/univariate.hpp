#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hypcert/error.hpp"
#include "hypcert/rational.hpp"

namespace hypcert {

/// Dense univariate polynomial, coefficients stored lowest degree first.
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
template <class T>
class UniPoly {
public:
    UniPoly() = default;
    explicit UniPoly(std::vector<T> c) : c_(std::move(c)) { trim(); }
    static UniPoly constant(const T& v) { return UniPoly(std::vector<T>{v}); }
    static UniPoly monomial(int k, const T& v = T(1))
    {
        std::vector<T> c(k + 1, T(0));
        c[k] = v;
        return UniPoly(std::move(c));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<T>& coeffs() const { return c_; }
    T operator[](int k) const { return k < static_cast<int>(c_.size()) && k >= 0 ? c_[k] : T(0); }
    const T& leading() const { return c_.back(); }

    bool operator==(const UniPoly&) const = default;

    friend UniPoly operator+(const UniPoly& a, const UniPoly& b)
    {
        std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return UniPoly(std::move(c));
    }
    friend UniPoly operator-(const UniPoly& a, const UniPoly& b) { return a + (-b); }
    UniPoly operator-() const
    {
        UniPoly r = *this;
        for (auto& v : r.c_) v = -v;
        return r;
    }
    friend UniPoly operator*(const UniPoly& a, const UniPoly& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<T> c(a.c_.size() + b.c_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return UniPoly(std::move(c));
    }
    friend UniPoly operator*(const T& s, UniPoly a)
    {
        for (auto& v : a.c_) v *= s;
        a.trim();
        return a;
    }
    // Allows UniPoly to act as a scalar in PolySymbol::evaluate_with.
    UniPoly& operator+=(const UniPoly& o) { return *this = *this + o; }
    UniPoly& operator*=(const UniPoly& o) { return *this = *this * o; }

    UniPoly derivative() const
    {
        if (c_.size() <= 1) return {};
        std::vector<T> c(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * T(static_cast<int>(i));
        return UniPoly(std::move(c));
    }

    template <class S>
    S operator()(const S& x) const
    {
        S acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + S(*it);
        return acc;
    }

    /// Polynomial long division; requires a field coefficient type.
    static std::pair<UniPoly, UniPoly> divmod(const UniPoly& num, const UniPoly& den)
    {
        if (den.is_zero()) throw Error("polynomial division by zero");
        std::vector<T> r = num.c_;
        const int dd = den.degree();
        if (num.degree() < dd) return {UniPoly(), num};
        std::vector<T> q(num.degree() - dd + 1, T(0));
        for (int k = num.degree() - dd; k >= 0; --k) {
            T coef = r[k + dd] / den.leading();
            q[k] = coef;
            if (coef == T(0)) continue;
            for (int j = 0; j <= dd; ++j) r[k + j] -= coef * den.c_[j];
        }
        r.resize(dd);
        return {UniPoly(std::move(q)), UniPoly(std::move(r))};
    }
    friend UniPoly operator/(const UniPoly& a, const UniPoly& b) { return divmod(a, b).first; }
    friend UniPoly operator%(const UniPoly& a, const UniPoly& b) { return divmod(a, b).second; }

    UniPoly monic() const
    {
        if (is_zero()) return *this;
        UniPoly r = *this;
        T lead = leading();
        for (auto& v : r.c_) v /= lead;
        return r;
    }

    /// Substitutes x -> -x.
    UniPoly reflect() const
    {
        UniPoly r = *this;
        for (std::size_t i = 1; i < r.c_.size(); i += 2) r.c_[i] = -r.c_[i];
        return r;
    }

    std::string to_string() const
        requires std::is_same_v<T, Rational>
    {
        if (is_zero()) return "0";
        std::string s;
        for (int k = degree(); k >= 0; --k) {
            if (c_[k] == 0) continue;
            if (!s.empty()) s += " + ";
            s += "(" + format_rational(c_[k]) + ")";
            if (k > 0) s += k == 1 ? "*L" : "*L^" + std::to_string(k);
        }
        return s;
    }

private:
    void trim()
    {
        while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
    }
    std::vector<T> c_;
};

using RationalPoly = UniPoly<Rational>;

template <class U>
UniPoly<U> convert_poly(const RationalPoly& p)
{
    std::vector<U> c;
    c.reserve(p.coeffs().size());
    for (const auto& v : p.coeffs()) c.push_back(v.template convert_to<U>());
    return UniPoly<U>(std::move(c));
}

inline RationalPoly gcd(RationalPoly a, RationalPoly b)
{
    while (!b.is_zero()) {
        RationalPoly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

/// Yun square-free decomposition: returns (factor, multiplicity) pairs with
/// f = lc(f) * prod factor^multiplicity and each factor monic, square-free, pairwise coprime.
inline std::vector<std::pair<RationalPoly, int>> square_free_factors(const RationalPoly& f)
{
    std::vector<std::pair<RationalPoly, int>> out;
    if (f.degree() < 1) return out;
    RationalPoly a = f.monic();
    RationalPoly c = gcd(a, a.derivative());
    RationalPoly w = a / c;
    int i = 1;
    while (c.degree() > 0) {
        RationalPoly y = gcd(w, c);
        RationalPoly z = w / y;
        if (z.degree() > 0) out.emplace_back(z.monic(), i);
        ++i;
        w = y;
        c = c / y;
    }
    if (w.degree() > 0) out.emplace_back(w.monic(), i);
    return out;
}

} // namespace hypcert
