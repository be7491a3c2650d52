#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hypcert/rational.hpp"

namespace hypcert {

/// Dense row-major matrix of exact rationals. Only what the spectral code needs.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, Rational(0)) {}
    static RationalMatrix identity(int n)
    {
        RationalMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    bool operator==(const RationalMatrix&) const = default;

    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b)
    {
        RationalMatrix r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0) continue;
                for (int j = 0; j < b.cols_; ++j) r(i, j) += a(i, k) * b(k, j);
            }
        return r;
    }
    friend RationalMatrix operator+(RationalMatrix a, const RationalMatrix& b)
    {
        for (std::size_t i = 0; i < a.a_.size(); ++i) a.a_[i] += b.a_[i];
        return a;
    }
    friend RationalMatrix operator*(const Rational& s, RationalMatrix a)
    {
        for (auto& v : a.a_) v *= s;
        return a;
    }

    RationalMatrix transpose() const
    {
        RationalMatrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    bool is_symmetric() const
    {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    Eigen::MatrixXd to_eigen() const
    {
        Eigen::MatrixXd m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = to_double((*this)(i, j));
        return m;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Rational> a_;
};

} // namespace hypcert
