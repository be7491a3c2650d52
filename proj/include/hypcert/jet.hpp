#pragma once

#include <Eigen/Dense>

namespace hypcert {

/// Second-order forward-mode jet: value, gradient and Hessian in n seed variables.
struct Jet2 {
    double v = 0.0;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;

    Jet2() = default;
    Jet2(double value, int n) : v(value), g(Eigen::VectorXd::Zero(n)), h(Eigen::MatrixXd::Zero(n, n)) {}

    static Jet2 variable(double value, int i, int n)
    {
        Jet2 j(value, n);
        j.g(i) = 1.0;
        return j;
    }

    int size() const { return static_cast<int>(g.size()); }

    /// f(*this) given f, f', f'' at v.
    Jet2 compose(double f0, double f1, double f2) const
    {
        Jet2 r;
        r.v = f0;
        r.g = f1 * g;
        r.h = f1 * h + f2 * (g * g.transpose());
        return r;
    }

    friend Jet2 operator+(Jet2 a, const Jet2& b)
    {
        a.v += b.v;
        a.g += b.g;
        a.h += b.h;
        return a;
    }
    friend Jet2 operator-(Jet2 a, const Jet2& b)
    {
        a.v -= b.v;
        a.g -= b.g;
        a.h -= b.h;
        return a;
    }
    Jet2 operator-() const
    {
        Jet2 r = *this;
        r.v = -r.v;
        r.g = -r.g;
        r.h = -r.h;
        return r;
    }
    friend Jet2 operator*(const Jet2& a, const Jet2& b)
    {
        Jet2 r;
        r.v = a.v * b.v;
        r.g = a.v * b.g + b.v * a.g;
        r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
        return r;
    }
    friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * b.compose(1.0 / b.v, -1.0 / (b.v * b.v), 2.0 / (b.v * b.v * b.v)); }
    friend Jet2 operator/(double c, const Jet2& b) { return c * b.compose(1.0 / b.v, -1.0 / (b.v * b.v), 2.0 / (b.v * b.v * b.v)); }
    friend Jet2 operator+(Jet2 a, double c)
    {
        a.v += c;
        return a;
    }
    friend Jet2 operator+(double c, Jet2 a) { return a + c; }
    friend Jet2 operator-(Jet2 a, double c)
    {
        a.v -= c;
        return a;
    }
    friend Jet2 operator-(double c, const Jet2& a) { return -a + c; }
    friend Jet2 operator*(Jet2 a, double c)
    {
        a.v *= c;
        a.g *= c;
        a.h *= c;
        return a;
    }
    friend Jet2 operator*(double c, Jet2 a) { return a * c; }
};

inline double value_of(double x) { return x; }
inline double value_of(const Jet2& x) { return x.v; }

} // namespace hypcert
